mod common;

use std::collections::BTreeMap;
use std::path::Path;

use fogft_core::metrics::{task_cost, CostRates};
use fogft_core::policy::PolicyKind;
use fogft_core::sim::{run, write_run_outputs, TaskRecord};
use proptest::prelude::*;
use serde_json::Value;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Recomputes the aggregates from `tasks.csv` alone, reading columns by
/// name and applying the cost model from first principles.
fn aggregate(tasks_csv: &Path) -> BTreeMap<&'static str, f64> {
    let mut rdr = csv::Reader::from_path(tasks_csv).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let num = |rec: &csv::StringRecord, name: &str| -> Option<f64> {
        let raw = &rec[col(name)];
        (!raw.is_empty()).then(|| raw.parse().unwrap())
    };
    let (mut delays, mut processing) = (Vec::new(), Vec::new());
    let (mut messages, mut minutes, mut failed, mut rows) = (0.0, 0.0, 0.0, 0.0);
    for rec in rdr.records() {
        let rec = rec.unwrap();
        rows += 1.0;
        if let Some(start) = num(&rec, "exec_start_s") {
            delays.push(start - num(&rec, "submit_s").unwrap());
        }
        let status = &rec[col("status")];
        if matches!(status, "DONE" | "DONE_LATE" | "FAILED") {
            processing.push(num(&rec, "proc_end_s").unwrap() - num(&rec, "proc_start_s").unwrap());
        }
        if matches!(status, "DONE_LATE" | "FAILED") {
            failed += 1.0;
        }
        let count = |name| num(&rec, name).unwrap();
        messages += 2.0
            + 2.0 * count("checkpoints")
            + 4.0 * count("migrations")
            + 2.0 * count("recoveries")
            + 2.0 * count("replications");
        minutes += count("connection_s") / 60.0;
    }
    let mut out = BTreeMap::new();
    out.insert("tasks", rows);
    out.insert(
        "avg_delay_s",
        delays.iter().sum::<f64>() / delays.len() as f64,
    );
    out.insert(
        "max_delay_s",
        delays.iter().copied().fold(f64::MIN, f64::max),
    );
    out.insert(
        "min_delay_s",
        delays.iter().copied().fold(f64::MAX, f64::min),
    );
    out.insert("total_processing_s", processing.iter().sum());
    out.insert("total_messages", messages);
    out.insert("total_connection_minutes", minutes);
    out.insert("total_cost", (messages * 1.65 + minutes * 0.132) / 1e6);
    out.insert("failed", failed);
    out
}

#[test]
fn aggregates_match_recomputation_from_task_log() {
    for (policy, seed) in [
        (PolicyKind::Flbfh, 1),
        (PolicyKind::Hffr, 2),
        (PolicyKind::Ftsm, 3),
        (PolicyKind::None, 4),
    ] {
        let out = run(&common::small_faulty(policy, seed)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_run_outputs(dir.path(), &out).unwrap();
        let text = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
        let metrics: Value = serde_json::from_str(&text).unwrap();
        let metrics = &metrics["metrics"];
        for (key, want) in aggregate(&dir.path().join("tasks.csv")) {
            let got = metrics[key]
                .as_f64()
                .unwrap_or_else(|| panic!("{key} missing"));
            assert!(close(got, want), "{policy} {key}: {got} vs {want}");
        }
    }
}

fn task(counts: [u32; 4], connection_s: f64) -> TaskRecord {
    let mut t = TaskRecord::new(0, 0, 1000.0, 0.0, 0.1, 1000.0);
    t.checkpoints = counts[0];
    t.migrations = counts[1];
    t.recoveries = counts[2];
    t.replications = counts[3];
    t.connection_s = connection_s;
    t
}

proptest! {
    #[test]
    fn cost_is_linear_in_each_rate(
        counts in prop::array::uniform4(0u32..50),
        conn in 0.0..1e5f64,
        k in 0.0..10.0f64,
    ) {
        let t = task(counts, conn);
        let base = CostRates::default();
        let only_messages = CostRates { connection_rate: 0.0, ..base.clone() };
        let only_conn = CostRates { message_rate: 0.0, ..base.clone() };
        let scaled = CostRates { message_rate: base.message_rate * k, ..only_messages.clone() };
        prop_assert!(close(task_cost(&t, &scaled), k * task_cost(&t, &only_messages)));
        prop_assert!(close(
            task_cost(&t, &base),
            task_cost(&t, &only_messages) + task_cost(&t, &only_conn)
        ));
    }

    #[test]
    fn cost_grows_with_action_counts(
        counts in prop::array::uniform4(0u32..50),
        which in 0usize..4,
        conn in 0.0..1e5f64,
    ) {
        let rates = CostRates::default();
        let mut more = counts;
        more[which] += 1;
        prop_assert!(task_cost(&task(more, conn), &rates) > task_cost(&task(counts, conn), &rates));
    }
}
