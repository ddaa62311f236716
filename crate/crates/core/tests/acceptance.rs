//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs without the libtest harness so the lines are
//! always shown.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use common::oracle;
use fogft_core::experiment::ExperimentPlan;
use fogft_core::fuzzy::{build_rule_base, OutputLabel};
use fogft_core::policy::{
    action_band, flbfh_decide, Action, FlbfhParams, LedgerEntry, PolicyKind, TaskView,
};
use fogft_core::sim::{run, write_run_outputs, RunConfig, TaskStatus, TraceSource};
use fogft_core::trace::{parse_lanl, parse_normalized_csv, to_normalized_csv};
use fogft_core::ScorerPairF64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNITY_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_VECTORS: usize = 1000;
const GATE_CASES: usize = 20_000;
const EXPERIMENT_SEEDS_REQUIRED: usize = 4;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rule_counts() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (k, total, normal) in [(3, 9, 7), (5, 33, 31)] {
        let rb = build_rule_base(k).map_err(|e| e.to_string())?;
        let n = rb.count(OutputLabel::Normal);
        ok &= rb.len() == total && n == normal;
        detail.push(format!("k={k}: {} rules, {n} NORMAL", rb.len()));
    }
    check(ok, detail.join("; "))
}

fn partition_of_unity() -> Outcome {
    let pair = ScorerPairF64::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for var in pair.mrp.inputs.iter().chain(&pair.cpmnr.inputs) {
        count += 1;
        for step in 0..=200 {
            let x = f64::from(step) * 0.5;
            let m = var.fuzzify(x).map_err(|e| e.to_string())?;
            worst = worst.max((m.iter().sum::<f64>() - 1.0).abs());
        }
    }
    check(
        count == 8 && worst <= UNITY_TOL,
        format!("{count} variables, max |sum - 1| = {worst:e}"),
    )
}

fn defuzzification_oracle() -> Outcome {
    let pair = ScorerPairF64::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst = 0.0f64;
    for scorer in [&pair.mrp, &pair.cpmnr] {
        for _ in 0..ORACLE_VECTORS {
            let xs: Vec<f64> = (0..scorer.arity())
                .map(|_| rng.random_range(0.0..=100.0))
                .collect();
            let got = scorer.score(&xs).map_err(|e| e.to_string())?;
            worst = worst.max((got - oracle::score(&xs)).abs());
        }
    }
    check(
        worst <= ORACLE_TOL,
        format!("{ORACLE_VECTORS} vectors per scorer, max error {worst:e}"),
    )
}

fn band_table() -> Outcome {
    use Action::*;
    let table = [
        (0.0, None),
        (49.99, None),
        (50.0, Checkpoint),
        (65.0, Checkpoint),
        (80.0, Checkpoint),
        (80.01, Migrate),
        (99.9, Migrate),
        (100.0, CheckpointRecover),
    ];
    let wrong: Vec<String> = table
        .iter()
        .filter(|(d, want)| action_band(*d) != *want)
        .map(|(d, want)| format!("{d} -> {} (want {want})", action_band(*d)))
        .collect();
    check(
        wrong.is_empty(),
        if wrong.is_empty() {
            "8/8 rows".into()
        } else {
            wrong.join(", ")
        },
    )
}

fn replication_gate() -> Outcome {
    let params = FlbfhParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut fired_total = 0;
    for case in 0..GATE_CASES {
        let mut ledger = LedgerEntry {
            a_c: rng.random_range(0..30),
            replica_active: rng.random_bool(0.3),
            ..LedgerEntry::default()
        };
        ledger.sd_ft = ledger.a_c as f64 * rng.random_range(0.0..=100.0);
        ledger.asd_f = if ledger.a_c > 0 {
            ledger.sd_ft / ledger.a_c as f64
        } else {
            0.0
        };
        let before = ledger;
        let d_f = match rng.random_range(0..4) {
            0 => 50.0,
            1 => 100.0,
            _ => rng.random_range(0.0..=100.0),
        };
        let view = TaskView {
            app_id: 0,
            task_id: 0,
            now: 0.0,
            host_since_s: 0.0,
            last_checkpoint_s: Option::None,
            checkpointing: false,
        };
        let out = flbfh_decide(&view, Some(d_f), &mut ledger, &params);
        let a_c = before.a_c + 1;
        let asd = (before.sd_ft + d_f) / a_c as f64;
        let expect = !before.replica_active && asd >= 50.0 && a_c > 10;
        let fired = out.kinds().contains(&Action::Replicate);
        fired_total += usize::from(fired);
        if fired != expect {
            return Err(format!("case {case}: a_c={a_c} asd={asd} fired={fired}"));
        }
    }
    check(
        true,
        format!("{GATE_CASES} random ledgers, {fired_total} replications, all as expected"),
    )
}

fn directional_experiment() -> Outcome {
    let plan = ExperimentPlan::from_path(&common::fixture("experiment.json"))
        .map_err(|e| e.to_string())?;
    let results = plan.run();
    let mut by_policy = std::collections::BTreeMap::new();
    for r in &results {
        let report = r
            .outcome
            .as_ref()
            .map_err(|e| format!("{} seed {}: {e}", r.cell.policy, r.cell.seed))?;
        if report.invariant_violations > 0 {
            return Err(format!(
                "{} seed {}: invariant violations",
                r.cell.policy, r.cell.seed
            ));
        }
        by_policy.insert((r.cell.policy, r.cell.seed), report.metrics.clone());
    }
    let mut wins = Vec::new();
    let mut ok = true;
    for baseline in [PolicyKind::Hffr, PolicyKind::Ftsm] {
        let (mut delay, mut ptime, mut cost) = (0, 0, 0);
        for &seed in &plan.seeds {
            let f = &by_policy[&(PolicyKind::Flbfh, seed)];
            let b = &by_policy[&(baseline, seed)];
            delay += usize::from(f.avg_delay_s < b.avg_delay_s);
            ptime += usize::from(f.total_processing_s < b.total_processing_s);
            cost += usize::from(f.total_cost < b.total_cost);
        }
        let n = plan.seeds.len();
        ok &= [delay, ptime, cost]
            .iter()
            .all(|&w| w >= EXPERIMENT_SEEDS_REQUIRED);
        wins.push(format!(
            "vs {baseline}: delay {delay}/{n}, ptime {ptime}/{n}, cost {cost}/{n}"
        ));
    }
    check(ok, wins.join("; "))
}

fn lanl_smoke() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let parsed = parse_lanl(&common::fixture("lanl_excerpt.csv")).map_err(|e| e.to_string())?;
    let converted = dir.path().join("lanl.csv");
    to_normalized_csv(&parsed.traces, &converted).map_err(|e| e.to_string())?;
    let back = parse_normalized_csv(&converted).map_err(|e| e.to_string())?;
    if back != parsed.traces {
        return Err("normalized round trip changed the trace".into());
    }

    let mut cfg = RunConfig::default();
    cfg.devices.count = 8;
    cfg.workload.tasks = 60;
    cfg.workload.arrival_rate_per_s = 60.0 / 80_000.0;
    cfg.trace.source = TraceSource::Lanl {
        path: common::fixture("lanl_excerpt.csv"),
    };
    // Four trace days squeezed into one simulated day.
    cfg.trace.duration_s = Some(4 * 86_400);
    cfg.trace.compression = 4.0;
    let out = run(&cfg).map_err(|e| e.to_string())?;
    let terminal = out.tasks.iter().all(|t| t.status.is_terminal());
    check(
        out.violations.is_empty() && terminal,
        format!(
            "{} events ({} dropped), {} device failures, {} violations, all tasks terminal: {terminal}",
            parsed.traces.len(),
            parsed.dropped,
            out.report.device_failures,
            out.violations.len()
        ),
    )
}

fn determinism() -> Outcome {
    let cfg = RunConfig::from_path(&common::fixture("run.json")).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for policy in [PolicyKind::Flbfh, PolicyKind::Hffr, PolicyKind::Ftsm] {
        let mut cfg = cfg.clone();
        cfg.policy.kind = policy;
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let out = run(&cfg).map_err(|e| e.to_string())?;
            write_run_outputs(d.path(), &out).map_err(|e| e.to_string())?;
        }
        for file in ["metrics.json", "actions.csv", "tasks.csv"] {
            let read = |p: &Path| std::fs::read(p.join(file)).unwrap();
            if read(dirs[0].path()) != read(dirs[1].path()) {
                return Err(format!("{policy}: {file} differs between runs"));
            }
            compared += 1;
        }
    }
    check(true, format!("{compared} file pairs byte-identical"))
}

fn failure_free() -> Outcome {
    let (mut actions, mut tasks, mut not_done) = (0, 0, 0);
    for seed in 1..=5 {
        let out = run(&common::failure_free(PolicyKind::Flbfh, seed)).map_err(|e| e.to_string())?;
        actions += out.actions.len();
        tasks += out.tasks.len();
        not_done += out
            .tasks
            .iter()
            .filter(|t| {
                t.status != TaskStatus::Done || t.proc_end_s.is_none_or(|e| e > t.deadline_s)
            })
            .count();
    }
    check(
        actions == 0 && not_done == 0,
        format!("{tasks} tasks over 5 seeds, {actions} actions, {not_done} not DONE in time"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("rule-base exactness", rule_counts),
        ("membership partition of unity", partition_of_unity),
        ("defuzzification oracle", defuzzification_oracle),
        ("action band table", band_table),
        ("replication gate", replication_gate),
        ("directional experiment", directional_experiment),
        ("LANL smoke test", lanl_smoke),
        ("determinism", determinism),
        ("failure-free sanity", failure_free),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.1} s): {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
