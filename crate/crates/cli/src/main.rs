use clap::Parser;

fn main() {
    let cli = galem_cli::Cli::parse();
    std::process::exit(galem_cli::run(&cli));
}
