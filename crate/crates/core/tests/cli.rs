use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ndd::experiments::{self, ExperimentConfig, ExperimentName};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ndd(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ndd"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n);
    }
    cmd.output().expect("binary runs")
}

fn run_to(experiment: &str, config: &Path, out: &Path, extra: &[&str], threads: Option<&str>) -> String {
    let mut args = vec![
        experiment,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let output = ndd(&args, threads);
    assert!(
        output.status.success(),
        "{experiment} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    fs::read_to_string(out).unwrap()
}

fn error_line(output: &Output) -> serde_json::Value {
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    let line = stderr.lines().last().expect("error line on stderr");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not json ({e}): {line}"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn metadata<'a>(csv: &'a str, key: &str) -> Option<&'a str> {
    let prefix = format!("# {key}: ");
    csv.lines().find_map(|l| l.strip_prefix(prefix.as_str()))
}

#[test]
fn writes_csv_with_metadata_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/forward.csv");
    let csv = run_to(
        "forward-compensation",
        &configs().join("forward-compensation.json"),
        &out,
        &["--paths", "300", "--seed", "11"],
        None,
    );
    assert_eq!(metadata(&csv, "experiment"), Some("forward-compensation"));
    assert_eq!(metadata(&csv, "paths"), Some("300"));
    assert_eq!(metadata(&csv, "seed"), Some("11"));
    assert_eq!(metadata(&csv, "version"), Some(env!("CARGO_PKG_VERSION")));
    assert_eq!(metadata(&csv, "config-sha256").map(str::len), Some(64));

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv.as_bytes());
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "sigma");
    assert!(header.iter().any(|h| h == "analytic_state_dependent"));
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.len() == header.len()));
}

#[test]
fn seed_changes_output_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("intensity-analogy.json");
    let a = run_to("intensity-analogy", &config, &dir.path().join("a.csv"), &["--paths", "200"], None);
    let b = run_to(
        "intensity-analogy",
        &config,
        &dir.path().join("b.csv"),
        &["--paths", "200", "--seed", "99"],
        None,
    );
    assert_ne!(a, b);
    assert_ne!(metadata(&a, "config-sha256"), metadata(&b, "config-sha256"));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (experiment, file, paths) in [
        ("stream-temporal", "stream-temporal.json", "2000"),
        ("intensity-analogy", "intensity-analogy.json", "2000"),
    ] {
        let config = configs().join(file);
        let extra = ["--paths", paths];
        let one = run_to(experiment, &config, &dir.path().join("one.csv"), &extra, Some("1"));
        let four = run_to(experiment, &config, &dir.path().join("four.csv"), &extra, Some("4"));
        let again = run_to(experiment, &config, &dir.path().join("again.csv"), &extra, None);
        assert_eq!(one, four, "{experiment}: thread count changed output");
        assert_eq!(one, again, "{experiment}: rerun changed output");
    }
}

#[test]
fn output_path_does_not_enter_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("iam-rate.json");
    let a = run_to("iam-rate", &config, &dir.path().join("x.csv"), &[], None);
    let b = run_to("iam-rate", &config, &dir.path().join("y.csv"), &[], None);
    assert_eq!(a, b);
    assert_eq!(metadata(&a, "seed"), None);
}

#[test]
fn stdout_when_no_output_is_configured() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "iam.json", r#"{"maturity": 10.0}"#);
    let output = ndd(&["iam-rate", "--config", config.to_str().unwrap()], None);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("# experiment: iam-rate\n"));
    assert!(text.lines().any(|l| l.starts_with("r,lambda,")));
}

#[test]
fn bad_field_reports_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.json", r#"{"gbm": {"x0": 1.0, "r": 0.02, "sigma": -0.3}}"#);
    let output = ndd(&["stream-temporal", "--config", config.to_str().unwrap()], None);
    let line = error_line(&output);
    assert_eq!(line["error"], "config-error");
    assert_eq!(line["path"], "gbm");
    assert!(line["message"].as_str().unwrap().contains("sigma"), "{line}");
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.json", r#"{"lmm": {"tenour": 0.5}}"#);
    let output = ndd(&["par-swap-notional", "--config", config.to_str().unwrap()], None);
    let line = error_line(&output);
    assert_eq!(line["error"], "config-error");
    assert!(line["message"].as_str().unwrap().contains("tenour"), "{line}");
}

#[test]
fn mismatched_experiment_field_is_rejected() {
    let config = configs().join("iam-rate.json");
    let output = ndd(&["forward-compensation", "--config", config.to_str().unwrap()], None);
    let line = error_line(&output);
    assert_eq!(line["error"], "config-error");
    assert_eq!(line["path"], "experiment");
}

#[test]
fn unknown_experiment_and_missing_file_fail_cleanly() {
    let config = configs().join("iam-rate.json");
    let line = error_line(&ndd(&["no-such-thing", "--config", config.to_str().unwrap()], None));
    assert!(line["message"].as_str().unwrap().contains("no-such-thing"), "{line}");

    let line = error_line(&ndd(&["iam-rate", "--config", "/nonexistent/config.json"], None));
    assert_eq!(line["error"], "io-error");
}

#[test]
fn invalid_run_settings_are_rejected() {
    let config = configs().join("forward-compensation.json");
    let line = error_line(&ndd(
        &["forward-compensation", "--config", config.to_str().unwrap(), "--paths", "0"],
        None,
    ));
    assert_eq!(line["error"], "config-error");
    assert_eq!(line["path"], "paths");
}

#[test]
fn shipped_configs_are_the_defaults() {
    for name in ExperimentName::ALL {
        let path = configs().join(format!("{name}.json"));
        let mut shipped = experiments::load_config(name, &path).unwrap();
        assert!(shipped.output().unwrap().starts_with(&format!("results/{name}")));
        shipped.set_overrides(None, None, None).unwrap();
        let defaults = ExperimentConfig::defaults(name);
        assert_eq!(shipped.to_json(), defaults.to_json(), "{name}");
    }

    let high = experiments::load_config(
        ExperimentName::ForwardCurveNotional,
        &configs().join("forward-curve-notional-vol-1.0.json"),
    )
    .unwrap();
    let ExperimentConfig::ForwardCurveNotional(mut high) = high else {
        unreachable!()
    };
    assert_eq!(high.lmm.vol_scale, 1.0);
    high.lmm.vol_scale = 0.5;
    high.output = None;
    let ExperimentConfig::ForwardCurveNotional(mut base) = ExperimentConfig::defaults(ExperimentName::ForwardCurveNotional)
    else {
        unreachable!()
    };
    base.output = None;
    assert_eq!(high, base);
}
