use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use statarb::io::output::{parse_estimates_csv, verify_checksums, RunManifest, ESTIMATES_HEADER};
use statarb::io::{experiment_to_toml, ConfigFile};
use statarb::mc::ExperimentConfig;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn statarb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_statarb")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(csv: &str, key: &str) -> String {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("{key} missing from\n{csv}"))
        .to_string()
}

/// A shortened copy of a shipped config.
fn small_config(dir: &Path, name: &str, paths: usize) -> PathBuf {
    let mut c = ConfigFile::read(configs().join(name)).unwrap().experiment().unwrap();
    c.paths = paths;
    let path = dir.join(name);
    fs::write(&path, experiment_to_toml(&c)).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analytic_constant_barrier_report() {
    let cfg = configs().join("example2_const_barrier.toml");
    let out = statarb(&["analytic", "--config", s(&cfg)]);
    assert!(out.status.success());
    let text = stdout(&out);
    let profit: f64 = value(&text, "expected_profit_limit").parse().unwrap();
    assert!((profit - 0.14134).abs() < 1e-5);
    assert!(value(&text, "d_laplace_d_barrier").starts_with('-'));

    let json = statarb(&["analytic", "--config", s(&cfg), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!((v["ig_mean"].as_f64().unwrap() - 1.30230).abs() < 1e-5);
}

#[test]
fn analytic_det_barrier_loss_limit_is_zero() {
    let out = statarb(&["analytic", "--config", s(&configs().join("example3_long_det_barrier.toml"))]);
    assert_eq!(value(&stdout(&out), "loss_prob_limit"), "0");
}

#[test]
fn configuration_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("example2_const_barrier.toml")).unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, text.replace("sigma = 0.2\n", "")).unwrap();
    let out = statarb(&["analytic", "--config", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));

    let out = statarb(&["analytic", "--config", s(&dir.path().join("absent.toml"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("example2_const_barrier.toml")).unwrap();
    let zero_rate = dir.path().join("r0.toml");
    fs::write(&zero_rate, text.replace("r_f = 0.04", "r_f = 0.0")).unwrap();
    let out = statarb(&["analytic", "--config", s(&zero_rate)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_f > 0"));

    let out = statarb(&["portfolio", "--sigma1", "0.2", "--sigma2", "0.2", "--rho", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn classify_examples() {
    let verdict = |name: &str| {
        value(&stdout(&statarb(&["classify", "--config", s(&configs().join(name))])), "verdict")
    };
    assert_eq!(verdict("example3_long_det_barrier.toml"), "LongStatArb");
    assert_eq!(verdict("example4_short_det_barrier.toml"), "ShortStatArb");
    assert_eq!(verdict("no_stat_arb.toml"), "ShortStatArb");

    let dir = tempfile::tempdir().unwrap();
    let edge = dir.path().join("edge.toml");
    fs::write(&edge, "[params]\nalpha = 0.75\nr_f = 0.25\nsigma = 1.0\ns0 = 1.0\n").unwrap();
    assert_eq!(value(&stdout(&statarb(&["classify", "--config", s(&edge)])), "verdict"), "NoBarrierStatArb");
}

#[test]
fn portfolio_weights() {
    let out = stdout(&statarb(&["portfolio", "--sigma1", "0.1", "--sigma2", "0.3", "--rho", "0"]));
    assert_eq!(value(&out, "a_hat"), "0.9");
    assert_eq!(value(&out, "b_hat"), "0.1");
    let out = stdout(&statarb(&["portfolio", "--sigma1", "0.2", "--sigma2", "0.2", "--rho", "-0.5"]));
    assert_eq!(value(&out, "a_hat"), "0.5");
}

#[test]
fn simulate_example3_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("ex3");
    let out = statarb(&[
        "simulate",
        "--config",
        s(&configs().join("example3_long_det_barrier.toml")),
        "--out",
        s(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("estimates.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(ESTIMATES_HEADER));
    let series = parse_estimates_csv(&csv, 0, 0.0).unwrap();
    assert!((series.row_at(50.0).unwrap().mean - 0.05).abs() < 0.002);
    for h in ["1", "2", "5", "10", "20", "50"] {
        assert!(out_dir.join(format!("hist_T{h}.csv")).exists());
    }
    let check = statarb(&["check", s(&out_dir.join("estimates.csv"))]);
    assert_eq!(check.status.code(), Some(0), "{}", stdout(&check));
    assert_eq!(value(&stdout(&check), "statistical_arbitrage"), "true");
}

#[test]
fn simulate_example4_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = statarb(&[
        "simulate",
        "--config",
        s(&configs().join("example4_short_det_barrier.toml")),
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
    let mean = parse_estimates_csv(&csv, 0, 0.0).unwrap().row_at(50.0).unwrap().mean;
    assert!((mean - 0.05 / 1.05).abs() < 0.002, "{mean}");
}

#[test]
fn check_fails_with_exit_4_without_arbitrage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "no_stat_arb.toml", 2000);
    let out_dir = dir.path().join("run");
    assert!(statarb(&["simulate", "--config", s(&cfg), "--out", s(&out_dir)]).status.success());
    let check = statarb(&["check", s(&out_dir.join("estimates.csv")), "--format", "json"]);
    assert_eq!(check.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&check.stdout).unwrap();
    assert_eq!(v["c3_loss_decay"], false);
}

#[test]
fn repeated_seed_gives_identical_outputs_and_manifest_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "example2_const_barrier.toml", 500);
    let run = |name: &str, extra: &[&str]| {
        let out_dir = dir.path().join(name);
        let mut args = vec!["simulate", "--config", s(&cfg), "--out", s(&out_dir), "--seed", "5"];
        args.extend_from_slice(extra);
        let o = statarb(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out_dir
    };
    let a = run("a", &[]);
    let b = run("b", &["--workers", "3"]);
    let bytes = |d: &Path| fs::read(d.join("estimates.csv")).unwrap();
    assert_eq!(bytes(&a), bytes(&b));

    let manifest = RunManifest::read(a.join("manifest.json")).unwrap();
    assert_eq!(manifest.seed, 5);
    assert!(verify_checksums(&a, &manifest).unwrap().is_empty());
    assert!(verify_checksums(&b, &manifest).unwrap().is_empty());

    // the echoed config re-parses to the same value and reproduces the run
    let json = fs::read_to_string(a.join("manifest.json")).unwrap();
    let echoed: ExperimentConfig =
        serde_json::from_value(serde_json::from_str::<serde_json::Value>(&json).unwrap()["config"].clone()).unwrap();
    assert_eq!(echoed, manifest.config);
    let again = dir.path().join("again.toml");
    fs::write(&again, experiment_to_toml(&echoed)).unwrap();
    let c = dir.path().join("c");
    assert!(statarb(&["simulate", "--config", s(&again), "--out", s(&c)]).status.success());
    assert!(verify_checksums(&c, &manifest).unwrap().is_empty());

    let bridged = run("bridged", &["--bridge-correction"]);
    assert_ne!(bytes(&a), bytes(&bridged));
    assert!(RunManifest::read(bridged.join("manifest.json")).unwrap().config.bridge_correction);
}

#[test]
fn emitted_cells_are_finite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "example1_buyhold.toml", 300);
    let out_dir = dir.path().join("run");
    assert!(statarb(&["simulate", "--config", s(&cfg), "--out", s(&out_dir)]).status.success());
    for entry in fs::read_dir(&out_dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            for line in fs::read_to_string(&path).unwrap().lines().skip(1) {
                for cell in line.split(',').filter(|c| !c.is_empty()) {
                    assert!(cell.parse::<f64>().unwrap().is_finite(), "{} in {}", cell, path.display());
                }
            }
        }
    }
}

#[test]
fn unwritable_output_directory_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "example3_long_det_barrier.toml", 100);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = statarb(&["simulate", "--config", s(&cfg), "--out", s(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        ConfigFile::read(&path).unwrap().experiment().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
