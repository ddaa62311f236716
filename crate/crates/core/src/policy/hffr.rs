//! Threshold-on-failure-probability migration baseline, adapted to this
//! simulator: the probability is the host's downtime fraction over a
//! trailing window. It never checkpoints or replicates.

use serde::{Deserialize, Serialize};

use super::{Action, FailureHistory, FailurePolicy, PolicyDecision, PolicyKind, TaskView};
use crate::device::DeviceState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HffrParams {
    pub threshold: f64,
    pub window_s: f64,
}

impl Default for HffrParams {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            window_s: 3600.0,
        }
    }
}

/// `d_f` in the emitted record is the probability as a percentage.
pub fn hffr_evaluate(
    view: &TaskView,
    _snapshot: &DeviceState,
    history: &FailureHistory,
    params: &HffrParams,
) -> PolicyDecision {
    let mut out = PolicyDecision::none();
    if let Some(p) = history.downtime_fraction(view.now, params.window_s) {
        if p > params.threshold {
            out.push(view, Action::Migrate, p * 100.0);
        }
    }
    out
}

pub struct HffrPolicy {
    params: HffrParams,
}

impl HffrPolicy {
    pub fn new(params: HffrParams) -> Self {
        Self { params }
    }
}

impl FailurePolicy for HffrPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Hffr
    }

    fn evaluate(
        &mut self,
        view: &TaskView,
        host: &DeviceState,
        history: &FailureHistory,
    ) -> PolicyDecision {
        hffr_evaluate(view, host, history, &self.params)
    }
}
