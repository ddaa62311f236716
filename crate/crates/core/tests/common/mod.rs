// Shared by several test targets; not every target uses every helper.
#![allow(dead_code)]

use std::path::PathBuf;

use fogft_core::policy::PolicyKind;
use fogft_core::sim::{RunConfig, TraceSource};

/// Independent evaluator written straight from the rule definitions, with
/// the default breakpoints as literals. Shares no code with the engine.
pub mod oracle {
    pub fn good(x: f64) -> f64 {
        if x <= 30.0 {
            1.0
        } else if x < 50.0 {
            (50.0 - x) / 20.0
        } else {
            0.0
        }
    }

    pub fn mid(x: f64) -> f64 {
        if x <= 30.0 || x >= 90.0 {
            0.0
        } else if x < 50.0 {
            (x - 30.0) / 20.0
        } else if x <= 70.0 {
            1.0
        } else {
            (90.0 - x) / 20.0
        }
    }

    pub fn bad(x: f64) -> f64 {
        if x <= 70.0 {
            0.0
        } else if x < 90.0 {
            (x - 70.0) / 20.0
        } else {
            1.0
        }
    }

    /// (LOW, NORMAL, HIGH) activations by brute force: HIGH is "any input
    /// BAD", LOW is "every input GOOD", NORMAL is the best of every way to
    /// put a non-empty subset in MID and the rest in GOOD.
    pub fn activations(xs: &[f64]) -> (f64, f64, f64) {
        let high = xs.iter().map(|&x| bad(x)).fold(0.0, f64::max);
        let low = xs.iter().map(|&x| good(x)).fold(1.0, f64::min);
        let mut normal = 0.0f64;
        for subset in 1u32..(1 << xs.len()) {
            let strength = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    if subset & (1 << i) != 0 {
                        mid(x)
                    } else {
                        good(x)
                    }
                })
                .fold(1.0, f64::min);
            normal = normal.max(strength);
        }
        (low, normal, high)
    }

    pub fn score(xs: &[f64]) -> f64 {
        let (l, n, h) = activations(xs);
        (25.0 * l + 65.0 * n + 90.0 * h) / (l + n + h)
    }
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Small run with no failures at all and a slot for every task, so nothing
/// queues. Default telemetry stays below the MID plateau, which keeps every
/// score under the checkpoint band.
pub fn failure_free(policy: PolicyKind, seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    cfg.policy.kind = policy;
    cfg.trace.source = TraceSource::None;
    cfg.devices.count = 20;
    cfg.workload.tasks = 40;
    cfg.workload.arrival_rate_per_s = 0.005;
    cfg
}

/// Short run on the bundled 30-day trace, windowed to its first two days.
pub fn small_faulty(policy: PolicyKind, seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    cfg.policy.kind = policy;
    cfg.devices.count = 8;
    cfg.workload.tasks = 120;
    cfg.workload.arrival_rate_per_s = 0.002;
    cfg.trace.source = TraceSource::Normalized {
        path: fixture("synthetic_30d.csv"),
    };
    cfg.trace.duration_s = Some(2 * 86_400);
    cfg
}
