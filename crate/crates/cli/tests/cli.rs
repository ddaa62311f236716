use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn fogft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fogft"))
        .args(args)
        .env_remove("FOGFT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = fogft(&[
        "run",
        path_str(&fixture("run.json")),
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("policy=flbfh"));
    for f in ["metrics.json", "actions.csv", "tasks.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let metrics: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["metrics"]["tasks"], 150);
    let mut rdr = csv::Reader::from_path(dir.path().join("tasks.csv")).unwrap();
    assert_eq!(rdr.records().count(), 150);
}

#[test]
fn run_output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fogft"))
        .args(["run", path_str(&fixture("run.json")), "--tasks", "20"])
        .env("FOGFT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("metrics.json").is_file());
}

#[test]
fn seed_and_policy_overrides() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let cfg = fixture("run.json");
    let runs = [
        vec!["--seed", "7"],
        vec!["--seed", "8"],
        vec!["--seed", "7", "--policy", "ftsm"],
    ];
    for (dir, extra) in dirs.iter().zip(&runs) {
        let mut args = vec!["run", path_str(&cfg), "--out", path_str(dir.path())];
        args.extend(extra);
        let o = fogft(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let tasks = |i: usize| std::fs::read(dirs[i].path().join("tasks.csv")).unwrap();
    assert_ne!(tasks(0), tasks(1));
    let metrics = std::fs::read_to_string(dirs[2].path().join("metrics.json")).unwrap();
    assert!(metrics.contains("\"policy\": \"ftsm\""));
}

#[test]
fn missing_trace_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"trace": {"source": {"kind": "normalized", "path": "nowhere/trace.csv"}}}"#,
    )
    .unwrap();
    let o = fogft(&[
        "run",
        path_str(&cfg),
        "--out",
        path_str(&dir.path().join("out")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere/trace.csv"), "{}", stderr(&o));
}

#[test]
fn invalid_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"devices": {"count": 0}, "monitor_interval_s": -1}"#,
    )
    .unwrap();
    let o = fogft(&["run", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("devices.count") && err.contains("monitor_interval_s"),
        "{err}"
    );
}

#[test]
fn compare_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let trace = fixture("synthetic_30d.csv");
    let text = serde_json::json!({
        "base": {"devices": {"count": 6}, "workload": {"tasks": 30}},
        "policies": ["flbfh"],
        "traces": [{"name": "fixture", "trace": {
            "source": {"kind": "normalized", "path": trace},
            "duration_s": 86400
        }}],
        "seeds": [1]
    });
    std::fs::write(&plan, text.to_string()).unwrap();
    let out = dir.path().join("reports");
    let o = fogft(&["compare", path_str(&plan), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(out.join("comparison.csv")).unwrap();
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!((&rows[0][0], &rows[0][1]), ("flbfh", "fixture"));
    assert!(out.join("long.csv").is_file());
}

fn score(args: &[&str]) -> Output {
    let mut all = vec!["score"];
    all.extend(args);
    fogft(&all)
}

const ALL_TEN: [&str; 10] = [
    "--mobility",
    "10",
    "--response",
    "10",
    "--power",
    "10",
    "--cpu",
    "10",
    "--network",
    "10",
];

#[test]
fn score_safe_device() {
    let o = score(&ALL_TEN);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(
        s.contains("d_f=25 ") && s.trim_end().ends_with("action=NONE"),
        "{s}"
    );
}

#[test]
fn score_checkpoint_band() {
    let o = score(&[
        "--mobility",
        "80",
        "--response",
        "20",
        "--power",
        "20",
        "--cpu",
        "20",
        "--network",
        "20",
    ]);
    let s = stdout(&o);
    assert!(s.contains("mrp=77.5 "), "{s}");
    assert!(s.trim_end().ends_with("action=CHECKPOINT"), "{s}");
}

#[test]
fn score_failure_flag() {
    let mut args = ALL_TEN.to_vec();
    args.push("--fail");
    let s = stdout(&score(&args));
    assert!(
        s.contains("d_f=100 ") && s.trim_end().ends_with("action=CHECKPOINT_RECOVER"),
        "{s}"
    );
}

#[test]
fn score_rejects_out_of_range() {
    let mut args = ALL_TEN.to_vec();
    args[1] = "120";
    let o = score(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("120"), "{}", stderr(&o));
}

#[test]
fn trace_convert_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lanl.csv");
    let o = fogft(&[
        "trace",
        "convert",
        path_str(&fixture("lanl_excerpt.csv")),
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("17 events, 8 nodes"));
    assert!(stderr(&o).contains("dropped 1"));

    let o = fogft(&["trace", "stats", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stats: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stats["events"], 17);
    assert_eq!(stats["nodes"], 8);

    let o = fogft(&[
        "trace",
        "convert",
        path_str(&fixture("lanl_excerpt.csv")),
        path_str(&out),
        "--top-n-failing",
        "2",
    ]);
    assert!(stdout(&o).contains(", 2 nodes"), "{}", stdout(&o));
}

#[test]
fn trace_synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = fogft(&[
            "trace",
            "synth",
            path_str(p),
            "--nodes",
            "20",
            "--span-s",
            "2592000",
            "--mtbf-s",
            "172800",
            "--mttr-s",
            "7200",
            "--seed",
            "11",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    // The bundled fixture was produced by exactly this command.
    assert_eq!(bytes, std::fs::read(fixture("synthetic_30d.csv")).unwrap());
}

#[test]
fn trace_stats_reports_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "node_id,start_s,end_s,category\n1,abc,5,CPU\n").unwrap();
    let o = fogft(&["trace", "stats", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dump_rules_lists_both_scorers() {
    let o = fogft(&["dump-rules"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mrp"]["rules"]["rules"].as_array().unwrap().len(), 9);
    assert_eq!(v["cpmnr"]["rules"]["rules"].as_array().unwrap().len(), 33);
}
