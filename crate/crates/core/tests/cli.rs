use std::path::Path;
use std::process::{Command, Output};

use randstop::config::RunConfig;
use randstop::estimate::parse_row;

fn randstop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randstop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let config = r#"{
        "model": {
            "dim": 2, "spot": [100.0], "strike": 100.0, "rate": 0.05,
            "dividend": 0.1, "vol": 0.2, "maturity": 3.0, "num_dates": 9
        },
        "degree": 2,
        "train_paths": 3000,
        "eval_paths": 20000,
        "optimizer": { "max_iters": 60 }
    }"#;
    let path = dir.join("small.json");
    std::fs::write(&path, config).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn price_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    let o = randstop(&["price", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["resolved_config.json", "policy.json", "fit_reports.json", "results.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("[expectation] estimate"));

    let mut rdr = csv::Reader::from_path(out.join("results.csv")).unwrap();
    let row: Vec<String> = rdr.records().next().unwrap().unwrap().iter().map(String::from).collect();
    let report = parse_row(&row).unwrap();
    assert_eq!(report.num_paths, 20000);
    assert_eq!(report.train_paths, 3000);
    assert!(report.estimate > 0.0);
}

#[test]
fn identical_runs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "2")] {
        let out = dir.path().join(name);
        let o = randstop(&[
            "price",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let first = dir.path().join("first");
    let o = randstop(&["price", "--config", cfg.to_str().unwrap(), "--output", first.to_str().unwrap()]);
    assert!(o.status.success());
    let resolved = first.join("resolved_config.json");
    let parsed = RunConfig::load(&resolved).unwrap();
    assert_eq!(parsed.optimizer_config().max_iters, 60);

    let second = dir.path().join("second");
    let o = randstop(&["price", "--config", resolved.to_str().unwrap(), "--output", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(first.join("results.csv")).unwrap(),
        std::fs::read(second.join("results.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(first.join("policy.json")).unwrap(),
        std::fs::read(second.join("policy.json")).unwrap()
    );
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("run");
    let o = randstop(&[
        "price",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--eval-paths",
        "5000",
        "--eval-mode",
        "sampled",
        "--link",
        "logistic",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let line = csv.lines().nth(1).unwrap();
    assert!(line.contains(",sampled,logistic,2,3000,5000,"), "{line}");
}

#[test]
fn invalid_model_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"model": {"dim": 2, "spot": [100.0], "strike": 100.0, "rate": 0.05,
        "dividend": 0.1, "vol": -0.2, "maturity": 3.0, "num_dates": 9}}"#)
        .unwrap();
    let o = randstop(&["price", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.vol"), "{}", stderr(&o));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    std::fs::write(&path, r#"{"train_path": 10}"#).unwrap();
    let o = randstop(&["price", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("train_path"));
}

#[test]
fn missing_config_file_is_reported() {
    let o = randstop(&["price", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));
}

#[test]
fn duplicate_sweep_entries_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = randstop(&["sweep", "--config", cfg.to_str().unwrap(), "--sweep", "1000,1000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duplicate"), "{}", stderr(&o));
}

#[test]
fn sweep_without_sizes_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = randstop(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn small_sweep_writes_a_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("sweep");
    let o = randstop(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--sweep",
        "500,2000",
        "--reps",
        "2",
        "--eval-paths",
        "5000",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert!(rows[0].starts_with("row_type,M,rep"));
    assert_eq!(rows.iter().filter(|r| r.starts_with("reference,")).count(), 1);
    assert_eq!(rows.iter().filter(|r| r.starts_with("rep,")).count(), 4);
    assert_eq!(rows.iter().filter(|r| r.starts_with("summary,")).count(), 2);
}

#[test]
fn bad_flag_values_fail_to_parse() {
    let o = randstop(&["price", "--method", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    let o = randstop(&["price", "--degree", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn excessive_degree_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = randstop(&["price", "--config", cfg.to_str().unwrap(), "--degree", "40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degree"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let c = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 4);
}
