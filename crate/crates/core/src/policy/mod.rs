//! Failure-handling policies consulted by the simulator.
//!
//! [`flbfh`] is the fuzzy-logic policy; [`hffr`] and [`ftsm`] are
//! adaptations of two published baselines to this simulator: a
//! threshold-on-failure-probability migrator and an MTBF-driven periodic
//! checkpointer.

pub mod flbfh;
pub mod ftsm;
pub mod hffr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::device::DeviceState;

pub use flbfh::{
    action_band, degree_of_failure, flbfh_decide, flbfh_evaluate, AppFailureLedger, Degree,
    FlbfhParams, FlbfhPolicy, LedgerEntry, FAILURE_SENTINEL,
};
pub use ftsm::{ftsm_evaluate, ftsm_interval, FtsmParams, FtsmPolicy};
pub use hffr::{hffr_evaluate, HffrParams, HffrPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    None,
    Checkpoint,
    Migrate,
    CheckpointRecover,
    Replicate,
}

impl Action {
    pub fn token(self) -> &'static str {
        match self {
            Action::None => "NONE",
            Action::Checkpoint => "CHECKPOINT",
            Action::Migrate => "MIGRATE",
            Action::CheckpointRecover => "CHECKPOINT_RECOVER",
            Action::Replicate => "REPLICATE",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One entry of the policy's output list.
///
/// `d_f` is the score that triggered the action: the fused fuzzy degree for
/// FLBFH, the downtime percentage for HFFR, zero for FTSM timer checkpoints
/// and 100 for recoveries after an actual failure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub app_id: u32,
    pub task_id: u32,
    pub action: Action,
    pub time_s: f64,
    pub d_f: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolicyDecision {
    pub actions: Vec<ActionRecord>,
}

impl PolicyDecision {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn kinds(&self) -> Vec<Action> {
        self.actions.iter().map(|a| a.action).collect()
    }

    pub(crate) fn push(&mut self, view: &TaskView, action: Action, d_f: f64) {
        self.actions.push(ActionRecord {
            app_id: view.app_id,
            task_id: view.task_id,
            action,
            time_s: view.now,
            d_f,
        });
    }
}

/// What a policy may see of the task under evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskView {
    pub app_id: u32,
    pub task_id: u32,
    pub now: f64,
    /// When the task was placed on its current host.
    pub host_since_s: f64,
    /// Time of the most recent checkpoint the task started, if any.
    pub last_checkpoint_s: Option<f64>,
    /// The task is paused writing a checkpoint.
    pub checkpointing: bool,
}

/// Failure intervals of one device that have begun by the current time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FailureHistory {
    intervals: Vec<(f64, f64)>,
}

impl FailureHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_intervals(mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { intervals }
    }

    pub fn record(&mut self, start: f64, end: f64) {
        self.intervals.push((start, end));
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Fraction of `[now - window, now]` (cut at zero) spent down. `None`
    /// when that window is empty.
    pub fn downtime_fraction(&self, now: f64, window: f64) -> Option<f64> {
        let from = (now - window).max(0.0);
        let span = now - from;
        if !(span > 0.0) {
            return None;
        }
        let down: f64 = self
            .intervals
            .iter()
            .map(|&(s, e)| (e.min(now) - s.max(from)).max(0.0))
            .sum();
        Some((down / span).min(1.0))
    }

    /// Mean gap between consecutive failure starts; needs two failures.
    pub fn mean_time_between_failures(&self) -> Option<f64> {
        if self.intervals.len() < 2 {
            return None;
        }
        let first = self.intervals.first().unwrap().0;
        let last = self.intervals.last().unwrap().0;
        Some((last - first) / (self.intervals.len() - 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    None,
    Flbfh,
    Hffr,
    Ftsm,
}

impl PolicyKind {
    pub fn token(self) -> &'static str {
        match self {
            PolicyKind::None => "none",
            PolicyKind::Flbfh => "flbfh",
            PolicyKind::Hffr => "hffr",
            PolicyKind::Ftsm => "ftsm",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(PolicyKind::None),
            "flbfh" => Ok(PolicyKind::Flbfh),
            "hffr" => Ok(PolicyKind::Hffr),
            "ftsm" => Ok(PolicyKind::Ftsm),
            other => Err(format!("unknown policy `{other}` (none|flbfh|hffr|ftsm)")),
        }
    }
}

/// Policy selection plus the parameters of every policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub flbfh: FlbfhParams,
    pub hffr: HffrParams,
    pub ftsm: FtsmParams,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            kind: PolicyKind::Flbfh,
            flbfh: FlbfhParams::default(),
            hffr: HffrParams::default(),
            ftsm: FtsmParams::default(),
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.flbfh.checkpoint_interval_s > 0.0) {
            errs.push("policy.flbfh.checkpoint_interval_s must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.hffr.threshold) {
            errs.push("policy.hffr.threshold must lie in [0, 1]".into());
        }
        if !(self.hffr.window_s > 0.0) {
            errs.push("policy.hffr.window_s must be positive".into());
        }
        if !(self.ftsm.divisor > 0.0) {
            errs.push("policy.ftsm.divisor must be positive".into());
        }
        if !(self.ftsm.min_interval_s > 0.0) {
            errs.push("policy.ftsm.min_interval_s must be positive".into());
        }
        if let Some(f) = self.ftsm.fallback_interval_s {
            if !(f > 0.0) {
                errs.push("policy.ftsm.fallback_interval_s must be positive".into());
            }
        }
        errs
    }
}

/// A failure-handling state machine owned by one simulation run.
pub trait FailurePolicy: Send {
    fn kind(&self) -> PolicyKind;

    /// Whether the policy reads device telemetry.
    fn uses_telemetry(&self) -> bool {
        false
    }

    /// Periodic evaluation of a task on a live host.
    fn evaluate(
        &mut self,
        view: &TaskView,
        host: &DeviceState,
        history: &FailureHistory,
    ) -> PolicyDecision;

    /// The task's host has just gone down.
    fn on_host_failure(&mut self, view: &TaskView) -> PolicyDecision {
        let mut d = PolicyDecision::none();
        d.push(view, Action::CheckpointRecover, FAILURE_SENTINEL);
        d
    }

    /// A replica of one of the app's tasks stopped existing (or could not
    /// be placed).
    fn on_replica_released(&mut self, _app_id: u32) {}
}

/// Recovery-only behaviour: restart or resume after failures, nothing else.
#[derive(Debug, Default)]
pub struct NoPolicy;

impl FailurePolicy for NoPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::None
    }

    fn evaluate(&mut self, _: &TaskView, _: &DeviceState, _: &FailureHistory) -> PolicyDecision {
        PolicyDecision::none()
    }
}

/// Instantiates the configured policy. `devices` sizes per-device caches;
/// `fallback_interval_s` is the FTSM interval used before any MTBF is
/// observable, unless the config pins one.
pub fn build_policy(
    cfg: &PolicyConfig,
    devices: usize,
    fallback_interval_s: f64,
) -> Box<dyn FailurePolicy> {
    match cfg.kind {
        PolicyKind::None => Box::new(NoPolicy),
        PolicyKind::Flbfh => Box::new(FlbfhPolicy::new(cfg.flbfh.clone(), devices)),
        PolicyKind::Hffr => Box::new(HffrPolicy::new(cfg.hffr.clone())),
        PolicyKind::Ftsm => {
            let mut p = cfg.ftsm.clone();
            p.fallback_interval_s.get_or_insert(fallback_interval_s);
            Box::new(FtsmPolicy::new(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn downtime_fraction_over_window() {
        let h = FailureHistory::from_intervals(vec![(100.0, 160.0)]);
        assert_eq!(h.downtime_fraction(200.0, 100.0), Some(0.6));
        assert_eq!(h.downtime_fraction(0.0, 100.0), None);
        assert_eq!(
            FailureHistory::new().downtime_fraction(50.0, 100.0),
            Some(0.0)
        );
        // Ongoing failure is counted up to now.
        let h = FailureHistory::from_intervals(vec![(150.0, 500.0)]);
        assert_eq!(h.downtime_fraction(200.0, 100.0), Some(0.5));
    }

    #[test]
    fn mtbf_from_starts() {
        let h = FailureHistory::from_intervals(vec![(300.0, 310.0), (100.0, 120.0)]);
        assert_eq!(h.mean_time_between_failures(), Some(200.0));
        assert_eq!(
            FailureHistory::from_intervals(vec![(1.0, 2.0)]).mean_time_between_failures(),
            None
        );
    }

    #[test]
    fn policy_tokens() {
        for k in [
            PolicyKind::None,
            PolicyKind::Flbfh,
            PolicyKind::Hffr,
            PolicyKind::Ftsm,
        ] {
            assert_eq!(k.token().parse::<PolicyKind>().unwrap(), k);
        }
        assert!("other".parse::<PolicyKind>().is_err());
    }
}
