//! Fuzzy-logic-based failure handling.
//!
//! Each evaluation fuses the two fuzzy scores into one degree of failure
//! `d_f = max(mrp, cpmnr)`, maps it to an action band and folds it into the
//! application's ledger, which gates replication.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Action, FailureHistory, FailurePolicy, PolicyDecision, PolicyKind, TaskView};
use crate::device::DeviceState;
use crate::fuzzy::{FuzzyError, ScorerPair};

/// Degree of failure injected when the hosting device actually goes down.
/// Defuzzification can never reach it (the highest output center is 90).
pub const FAILURE_SENTINEL: f64 = 100.0;

/// Band edges: `[0,50)` NONE, `[50,80]` CHECKPOINT, `(80,100)` MIGRATE,
/// `>= 100` CHECKPOINT_RECOVER. NaN maps to NONE.
pub fn action_band(d_f: f64) -> Action {
    if d_f.is_nan() || d_f < 50.0 {
        Action::None
    } else if d_f <= 80.0 {
        Action::Checkpoint
    } else if d_f < FAILURE_SENTINEL {
        Action::Migrate
    } else {
        Action::CheckpointRecover
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Degree {
    pub mrp: f64,
    pub cpmnr: f64,
    pub d_f: f64,
}

pub fn degree_of_failure(scorers: &ScorerPair<f64>, s: &DeviceState) -> Result<Degree, FuzzyError> {
    let mrp = scorers.mrp_score(s.mobility_pct, s.response_pct, s.power_pct)?;
    let cpmnr = scorers.cpmnr_score(
        s.cpu_util_pct,
        s.power_pct,
        s.mobility_pct,
        s.network_pct,
        s.response_pct,
    )?;
    Ok(Degree {
        mrp,
        cpmnr,
        d_f: mrp.max(cpmnr),
    })
}

/// Per-application running statistics. `asd_f == sd_ft / a_c` once
/// `a_c > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub a_c: u64,
    pub sd_ft: f64,
    pub asd_f: f64,
    pub replica_active: bool,
}

impl LedgerEntry {
    pub fn record(&mut self, d_f: f64) -> f64 {
        self.a_c += 1;
        self.sd_ft += d_f;
        self.asd_f = self.sd_ft / self.a_c as f64;
        self.asd_f
    }

    pub fn replication_due(&self, params: &FlbfhParams) -> bool {
        !self.replica_active
            && self.asd_f >= params.replication_threshold
            && self.a_c > params.replication_min_evaluations
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AppFailureLedger {
    entries: BTreeMap<u32, LedgerEntry>,
}

impl AppFailureLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, app_id: u32) -> Option<&LedgerEntry> {
        self.entries.get(&app_id)
    }

    pub fn entry(&mut self, app_id: u32) -> &mut LedgerEntry {
        self.entries.entry(app_id).or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u32, &LedgerEntry)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlbfhParams {
    /// Minimum spacing of checkpoints a task receives while its host stays
    /// in the checkpoint band.
    pub checkpoint_interval_s: f64,
    pub replication_threshold: f64,
    /// Replication needs strictly more evaluations than this.
    pub replication_min_evaluations: u64,
}

impl Default for FlbfhParams {
    fn default() -> Self {
        Self {
            checkpoint_interval_s: 60.0,
            replication_threshold: 50.0,
            replication_min_evaluations: 10,
        }
    }
}

/// Band mapping, ledger update and replication gate for an already fused
/// score. `None` (undefined fuzzy output) yields no action and leaves the
/// ledger untouched.
pub fn flbfh_decide(
    view: &TaskView,
    d_f: Option<f64>,
    ledger: &mut LedgerEntry,
    params: &FlbfhParams,
) -> PolicyDecision {
    let mut out = PolicyDecision::none();
    let Some(d_f) = d_f.filter(|v| !v.is_nan()) else {
        log::warn!(
            "app {}: undefined degree of failure at t={}",
            view.app_id,
            view.now
        );
        return out;
    };
    ledger.record(d_f);
    match action_band(d_f) {
        Action::Checkpoint => {
            let recent = view
                .last_checkpoint_s
                .is_some_and(|t| view.now - t < params.checkpoint_interval_s);
            if !recent && !view.checkpointing {
                out.push(view, Action::Checkpoint, d_f);
            }
        }
        Action::None => {}
        band => out.push(view, band, d_f),
    }
    if ledger.replication_due(params) {
        ledger.replica_active = true;
        out.push(view, Action::Replicate, d_f);
    }
    out
}

pub fn flbfh_evaluate(
    view: &TaskView,
    snapshot: &DeviceState,
    ledger: &mut LedgerEntry,
    scorers: &ScorerPair<f64>,
    params: &FlbfhParams,
) -> PolicyDecision {
    let d_f = match degree_of_failure(scorers, snapshot) {
        Ok(d) => Some(d.d_f),
        Err(e) => {
            log::warn!("device {}: {e}", snapshot.device_id);
            None
        }
    };
    flbfh_decide(view, d_f, ledger, params)
}

pub struct FlbfhPolicy {
    params: FlbfhParams,
    scorers: ScorerPair<f64>,
    ledger: AppFailureLedger,
    // Degree per device, valid for the stamped time.
    cache: Vec<Option<(f64, Option<f64>)>>,
}

impl FlbfhPolicy {
    pub fn new(params: FlbfhParams, devices: usize) -> Self {
        Self {
            params,
            scorers: ScorerPair::default(),
            ledger: AppFailureLedger::new(),
            cache: vec![None; devices],
        }
    }

    pub fn ledger(&self) -> &AppFailureLedger {
        &self.ledger
    }

    fn degree(&mut self, now: f64, host: &DeviceState) -> Option<f64> {
        let idx = host.device_id as usize;
        if idx >= self.cache.len() {
            self.cache.resize(idx + 1, None);
        }
        if let Some((t, d)) = self.cache[idx] {
            if t == now {
                return d;
            }
        }
        let d = match degree_of_failure(&self.scorers, host) {
            Ok(d) => Some(d.d_f),
            Err(e) => {
                log::warn!("device {}: {e}", host.device_id);
                None
            }
        };
        self.cache[idx] = Some((now, d));
        d
    }
}

impl FailurePolicy for FlbfhPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Flbfh
    }

    fn uses_telemetry(&self) -> bool {
        true
    }

    fn evaluate(
        &mut self,
        view: &TaskView,
        host: &DeviceState,
        _: &FailureHistory,
    ) -> PolicyDecision {
        let d_f = self.degree(view.now, host);
        let entry = self.ledger.entry(view.app_id);
        flbfh_decide(view, d_f, entry, &self.params)
    }

    fn on_host_failure(&mut self, view: &TaskView) -> PolicyDecision {
        let entry = self.ledger.entry(view.app_id);
        flbfh_decide(view, Some(FAILURE_SENTINEL), entry, &self.params)
    }

    fn on_replica_released(&mut self, app_id: u32) {
        self.ledger.entry(app_id).replica_active = false;
    }
}
