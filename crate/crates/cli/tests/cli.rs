use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisy-submod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn gen_coverage(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec![
        "gen", "--kind", "random-coverage", "--n", "14", "--items", "30", "--density", "0.2", "--seed", "3", "--out",
    ];
    args.push(&path);
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_coverage(dir.path(), "a.json", &["--rank", "4"]);
    let b = gen_coverage(dir.path(), "b.json", &["--rank", "4"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn solve_reports_a_feasible_set() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_coverage(
        dir.path(),
        "i.json",
        &["--rank", "4", "--noise", r#"{"family":"uniform_band","halfwidth":0.1}"#],
    );
    let out = run(&[
        "solve", "--instance", &inst, "--algorithm", "card-small", "--epsilon", "0.2", "--seed", "7", "--opt",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["feasible"], true);
    assert_eq!(report["set"].as_array().unwrap().len(), 4);
    let ratio = report["ratio"].as_f64().unwrap();
    assert!(ratio > 0.0 && ratio <= 1.0 + 1e-9);
}

#[test]
fn solve_dispatches_on_partition_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_coverage(dir.path(), "p.json", &["--blocks", "4"]);
    let out = run(&["solve", "--instance", &inst, "--regime", "small"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["algorithm"], "matroid-small");
    assert_eq!(report["feasible"], true);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_coverage(dir.path(), "i.json", &["--rank", "4"]);
    let out = run(&["solve", "--instance", &inst, "--algorithm", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--instance", &inst, "--algorithm", "sbo"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    let out = run(&["solve", "--instance", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, format!(r#"{{"instance": {{"file": {inst:?}}}, "seeds": []}}"#)).unwrap();
    let out = run(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

fn strip_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn experiment_reruns_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{
            "instance": {"generator": {"kind": "random_coverage", "n": 12, "items": 30, "density": 0.2,
                                       "constraint": {"kind": "uniform", "rank": 3}}},
            "algorithms": ["card-small", "greedy"],
            "seeds": [1, 2, 3],
            "noise": {"family": "uniform_band", "halfwidth": 0.1},
            "sample_multiplier": 0.5
        }"#,
    )
    .unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    for path in [&csv_a, &csv_b] {
        let out = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read_to_string(&csv_a).unwrap();
    let b = std::fs::read_to_string(&csv_b).unwrap();
    assert_eq!(a.lines().next().unwrap(), noisy_submod::harness::CSV_HEADER);
    assert_eq!(a.lines().count(), 7);
    assert_eq!(strip_wall_time(&a), strip_wall_time(&b));
}

#[test]
fn verify_passes() {
    let out = run(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn demo_thresholds_set_the_exit_code() {
    let base = ["demo-counterexample", "--trials", "8", "--n", "60", "--no-compare"];
    let out = run(&[&base[..], &["--threshold", "0"]].concat());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("miss frequency"));
    let out = run(&[&base[..], &["--threshold", "1.01"]].concat());
    assert_eq!(out.status.code(), Some(1));
}
