//! MTBF-driven periodic checkpointing baseline, adapted to this simulator.
//! The interval is the observed mean time between failure starts of the
//! host divided by `divisor`, floored at `min_interval_s`.

use serde::{Deserialize, Serialize};

use super::{Action, FailureHistory, FailurePolicy, PolicyDecision, PolicyKind, TaskView};
use crate::device::DeviceState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FtsmParams {
    pub divisor: f64,
    pub min_interval_s: f64,
    /// Interval while fewer than two failures of the host have been seen.
    /// `None` lets the simulator use a tenth of the trace span.
    pub fallback_interval_s: Option<f64>,
}

impl Default for FtsmParams {
    fn default() -> Self {
        Self {
            divisor: 2.0,
            min_interval_s: 60.0,
            fallback_interval_s: None,
        }
    }
}

pub fn ftsm_interval(history: &FailureHistory, params: &FtsmParams) -> f64 {
    let raw = match history.mean_time_between_failures() {
        Some(mtbf) => mtbf / params.divisor,
        None => params.fallback_interval_s.unwrap_or(f64::INFINITY),
    };
    raw.max(params.min_interval_s)
}

/// Checkpoints once the interval has elapsed since the last checkpoint, or
/// since placement on the current host when there is none.
pub fn ftsm_evaluate(
    view: &TaskView,
    _snapshot: &DeviceState,
    history: &FailureHistory,
    params: &FtsmParams,
) -> PolicyDecision {
    let mut out = PolicyDecision::none();
    if view.checkpointing {
        return out;
    }
    let since = view
        .last_checkpoint_s
        .unwrap_or(view.host_since_s)
        .max(view.host_since_s);
    if view.now - since >= ftsm_interval(history, params) {
        out.push(view, Action::Checkpoint, 0.0);
    }
    out
}

pub struct FtsmPolicy {
    params: FtsmParams,
}

impl FtsmPolicy {
    pub fn new(params: FtsmParams) -> Self {
        Self { params }
    }
}

impl FailurePolicy for FtsmPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Ftsm
    }

    fn evaluate(
        &mut self,
        view: &TaskView,
        host: &DeviceState,
        history: &FailureHistory,
    ) -> PolicyDecision {
        ftsm_evaluate(view, host, history, &self.params)
    }
}
