//! Scenario runner: parses a TOML scenario, runs one subcommand, and writes
//! every artifact plus a hash manifest to the output directory.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use galem_core::Scheme;

use crate::artifacts::Artifacts;
use crate::commands::Context;
use crate::config::Command;
use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "GALEM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "galem", version, about = "Field covariance and coupled dynamics scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,

    /// Scenario file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; overrides the environment and the scenario.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,

    /// Worker threads (0 picks the machine default).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Spatial derivative scheme: spectral or fd2.
    #[arg(long, global = true)]
    pub scheme: Option<Scheme>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum CliCommand {
    /// Point invariants, optionally under boosts.
    Invariants,
    /// Boost a field history.
    Boost,
    /// Residual report of a field history.
    Residuals,
    /// Covariance verdict (exit 1 when not covariant).
    Covariance,
    /// Gap between Lorentz and Galilean boosts versus c.
    LimitStudy,
    /// Magnetic-limit fields from static sources.
    SolveMagnetic,
    /// Static nonlinear solve for E.
    SolveCaseA,
    /// Schrodinger evolution in prescribed potentials.
    EvolveQuantum,
    /// Coupled Schrodinger and field evolution.
    EvolveCoupled,
    /// Synthesize sources for a field history.
    Manufacture,
    /// Run the subcommand named by the scenario's `command` key.
    Run,
}

impl CliCommand {
    fn resolve(self) -> Option<Command> {
        Some(match self {
            CliCommand::Invariants => Command::Invariants,
            CliCommand::Boost => Command::Boost,
            CliCommand::Residuals => Command::Residuals,
            CliCommand::Covariance => Command::Covariance,
            CliCommand::LimitStudy => Command::LimitStudy,
            CliCommand::SolveMagnetic => Command::SolveMagnetic,
            CliCommand::SolveCaseA => Command::SolveCaseA,
            CliCommand::EvolveQuantum => Command::EvolveQuantum,
            CliCommand::EvolveCoupled => Command::EvolveCoupled,
            CliCommand::Manufacture => Command::Manufacture,
            CliCommand::Run => return None,
        })
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let fail = |e: CliError| {
        eprintln!("galem: {e}");
        e.exit_code()
    };
    let Some(path) = &cli.config else {
        return fail(CliError::Config("missing `--config`".into()));
    };
    let loaded = match config::load(path) {
        Ok(l) => l,
        Err(e) => return fail(e),
    };
    let sc = &loaded.scenario;
    let cmd = match cli.command.resolve().or(sc.command) {
        Some(c) => c,
        None => return fail(CliError::Config("missing key `command`".into())),
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| sc.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("galem-out").join(&sc.name));
    let scheme = cli.scheme.or(sc.scheme).unwrap_or_default();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => return fail(CliError::Config(format!("threads: {e}"))),
    };
    let mut out = match Artifacts::create(&dir) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let result = pool.install(|| {
        let mut cx = Context {
            scenario: sc,
            base: &loaded.base_dir,
            scheme,
            out: &mut out,
        };
        commands::dispatch(cmd, &mut cx)
    });
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            if let Err(w) = out.text("error.txt", &format!("{e}\n")) {
                eprintln!("galem: {w}");
            }
            eprintln!("galem: {e}");
            code
        }
    };
    match out.finish(&sc.name, cmd.name(), code) {
        Ok(m) => println!("{} {}: exit {code}, manifest {}", cmd.name(), sc.name, m.display()),
        Err(e) => return fail(e),
    }
    code
}
