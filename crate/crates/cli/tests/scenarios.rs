use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_galem");

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn galem(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GALEM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn run_file(file: &Path, out: &Path, threads: usize) -> Output {
    galem(
        &["run", "--config", file.to_str().unwrap(), "--threads", &threads.to_string()],
        out,
    )
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

// (file, expected exit code, artifacts that must exist)
const BUNDLED: &[(&str, i32, &[&str])] = &[
    ("case_a_boost.toml", 0, &["boosted/frame_000.fs1", "boosted/history.json"]),
    ("case_a_covariance.toml", 0, &["verdict.txt", "covariance.json"]),
    ("case_a_residuals.toml", 0, &["residuals.txt", "residuals.json"]),
    ("case_a_static_solve.toml", 0, &["solution.fs1", "trace.csv", "summary.json"]),
    ("case_b_manufacture.toml", 0, &["manufactured/frame_004.fs1", "continuity.json"]),
    ("charged_vacuum_covariance.toml", 1, &["verdict.txt"]),
    ("coupled_packet.toml", 0, &["observables.csv", "final_psi.fs1", "final_fields.fs1"]),
    ("free_gaussian.toml", 0, &["observables.csv", "final.fs1"]),
    ("invariants_random.toml", 0, &["invariants.json"]),
    ("limit_study.toml", 0, &["limit.csv", "limit.json"]),
    ("magnetic_single_mode.toml", 0, &["fields.fs1", "residuals.txt"]),
];

#[test]
fn every_bundled_scenario_is_listed() {
    let mut files: Vec<String> = std::fs::read_dir(scenario(""))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|f| f.ends_with(".toml"))
        .collect();
    files.sort();
    let listed: Vec<String> = BUNDLED.iter().map(|(f, _, _)| f.to_string()).collect();
    assert_eq!(files, listed);
}

#[test]
fn bundled_scenarios_exit_as_expected() {
    let tmp = tempfile::tempdir().unwrap();
    for (file, code, artifacts) in BUNDLED {
        let out = tmp.path().join(file);
        let o = run_file(&scenario(file), &out, 2);
        assert_eq!(o.status.code(), Some(*code), "{file}: {}", stderr(&o));
        assert!(out.join("manifest.json").exists(), "{file}");
        for a in *artifacts {
            assert!(out.join(a).exists(), "{file}: missing {a}");
        }
    }
}

#[test]
fn covariance_verdict_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_file(&scenario("case_a_covariance.toml"), tmp.path(), 0);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(tmp.path().join("verdict.txt")).unwrap(), "covariant: true\n");

    let tmp = tempfile::tempdir().unwrap();
    let o = run_file(&scenario("charged_vacuum_covariance.toml"), tmp.path(), 0);
    assert_eq!(o.status.code(), Some(1));
    let v = std::fs::read_to_string(tmp.path().join("verdict.txt")).unwrap();
    assert!(v.starts_with("covariant: false\n"));
    assert!(v.contains("failed: constitutive.linf"));
}

#[test]
fn explicit_subcommand_overrides_scenario_command() {
    let tmp = tempfile::tempdir().unwrap();
    let f = scenario("case_a_covariance.toml");
    let o = galem(&["residuals", "--config", f.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(tmp.path().join("residuals.txt").exists());
    assert!(!tmp.path().join("verdict.txt").exists());
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn missing_grid_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("case_a_covariance.toml")).unwrap();
    let text = text.replace("[grid]\nn = [64, 4, 4]\nl = [\"2*pi\", \"2*pi\", \"2*pi\"]\n", "");
    assert!(!text.contains("[grid]"));
    let cfg = write_config(tmp.path(), "no_grid.toml", &text);
    let o = run_file(&cfg, &tmp.path().join("out"), 0);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("case_a_covariance.toml")).unwrap();
    let cfg = write_config(tmp.path(), "typo.toml", &text.replace("samples = 5", "samples = 5\nsampels = 4"));
    let o = run_file(&cfg, &tmp.path().join("out"), 0);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sampels"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    let o = Command::new(BIN).arg("covariance").env_remove("GALEM_OUT_DIR").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(BIN).arg("no-such-command").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn nonconvergence_exits_three_with_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("case_a_static_solve.toml")).unwrap();
    let cfg = write_config(tmp.path(), "short.toml", &text.replace("max_iter = 50", "max_iter = 1"));
    let out = tmp.path().join("out");
    let o = run_file(&cfg, &out, 0);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(out.join("trace.csv").exists());
    assert!(out.join("error.txt").exists());
    let m = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(m.contains("\"exit_code\": 3"));
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("limit_study.toml")).unwrap();
    let from_cfg = tmp.path().join("from-config");
    let cfg = write_config(
        tmp.path(),
        "limit.toml",
        &text.replace(
            "command = \"limit-study\"",
            &format!("command = \"limit-study\"\noutput_dir = {:?}", from_cfg.to_str().unwrap()),
        ),
    );
    let cfg = cfg.to_str().unwrap();
    let run = |env: Option<&Path>, out: Option<&Path>| {
        let mut c = Command::new(BIN);
        c.args(["run", "--config", cfg]).env_remove("GALEM_OUT_DIR");
        if let Some(e) = env {
            c.env("GALEM_OUT_DIR", e);
        }
        if let Some(o) = out {
            c.arg("--out").arg(o);
        }
        assert_eq!(c.output().unwrap().status.code(), Some(0));
    };
    run(None, None);
    assert!(from_cfg.join("limit.csv").exists());
    let from_env = tmp.path().join("from-env");
    run(Some(&from_env), None);
    assert!(from_env.join("limit.csv").exists());
    let from_flag = tmp.path().join("from-flag");
    let ignored = tmp.path().join("ignored");
    run(Some(&ignored), Some(&from_flag));
    assert!(from_flag.join("limit.csv").exists());
    assert!(!ignored.exists());
}

#[test]
fn snapshots_feed_back_as_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let made = tmp.path().join("made");
    let text = std::fs::read_to_string(scenario("case_a_residuals.toml")).unwrap();
    let cfg = write_config(tmp.path(), "make.toml", &text.replace("\"residuals\"", "\"manufacture\""));
    assert_eq!(run_file(&cfg, &made, 0).status.code(), Some(0));

    let snap = "[fields]\nsnapshot = \"made/manufactured/frame_000.fs1\"\n";
    let start = text.find("[time]").unwrap();
    let reread = format!("{}{snap}", &text[..start]);
    let cfg = write_config(tmp.path(), "reread.toml", &reread);
    let out = tmp.path().join("reread");
    let o = run_file(&cfg, &out, 0);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = std::fs::read_to_string(out.join("residuals.txt")).unwrap();
    for line in rep.lines().filter(|l| l.contains(".l")) {
        let v: f64 = line.split(": ").nth(1).unwrap().parse().unwrap();
        assert!(v < 1e-11, "{line}");
    }
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn artifacts_do_not_depend_on_threads_or_repetition() {
    let tmp = tempfile::tempdir().unwrap();
    for file in ["case_b_manufacture.toml", "case_a_covariance.toml", "coupled_packet.toml", "case_a_static_solve.toml"] {
        let runs: Vec<_> = [(1, "a"), (4, "b"), (4, "c")]
            .iter()
            .map(|(threads, tag)| {
                let out = tmp.path().join(format!("{file}-{tag}"));
                assert!(run_file(&scenario(file), &out, *threads).status.success());
                tree_bytes(&out)
            })
            .collect();
        assert!(!runs[0].is_empty());
        assert!(runs[0] == runs[1], "{file}: 1 vs 4 threads differ");
        assert!(runs[1] == runs[2], "{file}: repeated runs differ");
    }
}

#[test]
fn bundled_scenarios_round_trip_through_toml() {
    for (file, _, _) in BUNDLED {
        let text = std::fs::read_to_string(scenario(file)).unwrap();
        let s = galem_cli::config::parse(&text).unwrap();
        assert_eq!(galem_cli::config::parse(&s.to_toml()).unwrap(), s, "{file}");
    }
}

mod round_trip {
    use galem_cli::config::{parse, Scenario};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn numeric_settings_survive(seed in any::<u64>(), n in 1usize..128, l in 1e-3..1e3f64, dt in 1e-9..1.0f64, samples in 1usize..64) {
            let text = format!(
                "name = \"p\"\nseed = {seed}\n[grid]\nn = [{n}, 4, 4]\nl = [{l:?}, \"2*pi\", 1.0]\n[time]\ndt = {dt:?}\nsamples = {samples}\n"
            );
            let s: Scenario = parse(&text).unwrap();
            prop_assert_eq!(parse(&s.to_toml()).unwrap(), s);
        }
    }
}
