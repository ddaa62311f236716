//! Per-task and aggregate metrics: delay, processing time and cost.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sim::{TaskRecord, TaskStatus};

/// Messaging and connectivity prices plus the messages-per-task model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostRates {
    /// Currency per million messages.
    pub message_rate: f64,
    /// Currency per million connection-minutes.
    pub connection_rate: f64,
    pub messages_per_task: f64,
    pub messages_per_checkpoint: f64,
    pub messages_per_migration: f64,
    pub messages_per_recovery: f64,
    pub messages_per_replication: f64,
}

impl Default for CostRates {
    fn default() -> Self {
        Self {
            message_rate: 1.65,
            connection_rate: 0.132,
            messages_per_task: 2.0,
            messages_per_checkpoint: 2.0,
            messages_per_migration: 4.0,
            messages_per_recovery: 2.0,
            messages_per_replication: 2.0,
        }
    }
}

impl CostRates {
    pub fn validate(&self) -> Vec<String> {
        let fields = [
            ("cost.message_rate", self.message_rate),
            ("cost.connection_rate", self.connection_rate),
            ("cost.messages_per_task", self.messages_per_task),
            ("cost.messages_per_checkpoint", self.messages_per_checkpoint),
            ("cost.messages_per_migration", self.messages_per_migration),
            ("cost.messages_per_recovery", self.messages_per_recovery),
            (
                "cost.messages_per_replication",
                self.messages_per_replication,
            ),
        ];
        fields
            .into_iter()
            .filter(|(_, v)| !(*v >= 0.0 && v.is_finite()))
            .map(|(n, v)| format!("{n} must be >= 0 (got {v})"))
            .collect()
    }
}

/// `exec_start_s - submit_s`; `None` for a task that never started.
pub fn delay(t: &TaskRecord) -> Option<f64> {
    t.exec_start_s.map(|s| s - t.submit_s)
}

/// `proc_end_s - proc_start_s` for a terminal task, rework and overheads
/// included.
pub fn processing_time(t: &TaskRecord) -> Option<f64> {
    if !t.status.is_terminal() {
        return None;
    }
    Some(t.proc_end_s? - t.proc_start_s?)
}

pub fn messages(t: &TaskRecord, r: &CostRates) -> f64 {
    r.messages_per_task
        + r.messages_per_checkpoint * f64::from(t.checkpoints)
        + r.messages_per_migration * f64::from(t.migrations)
        + r.messages_per_recovery * f64::from(t.recoveries)
        + r.messages_per_replication * f64::from(t.replications)
}

pub fn connection_minutes(t: &TaskRecord) -> f64 {
    t.connection_s / 60.0
}

pub fn task_cost(t: &TaskRecord, r: &CostRates) -> f64 {
    (messages(t, r) * r.message_rate + connection_minutes(t) * r.connection_rate) / 1e6
}

pub fn total_cost(tasks: &[TaskRecord], r: &CostRates) -> f64 {
    tasks.iter().map(|t| task_cost(t, r)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tasks: usize,
    pub avg_delay_s: Option<f64>,
    pub max_delay_s: Option<f64>,
    pub min_delay_s: Option<f64>,
    /// Tasks without a defined delay.
    pub delay_excluded: usize,
    pub avg_processing_s: Option<f64>,
    pub total_processing_s: f64,
    pub processing_excluded: usize,
    pub total_messages: f64,
    pub total_connection_minutes: f64,
    pub messaging_cost: f64,
    pub connectivity_cost: f64,
    pub total_cost: f64,
    pub status_counts: BTreeMap<TaskStatus, usize>,
    /// FAILED plus DONE_LATE.
    pub failed: usize,
    pub checkpoints: u64,
    pub migrations: u64,
    pub recoveries: u64,
    pub replications: u64,
    pub deferred_actions: u64,
}

impl MetricsReport {
    pub fn from_tasks(tasks: &[TaskRecord], rates: &CostRates) -> Self {
        let delays: Vec<f64> = tasks.iter().filter_map(delay).collect();
        let ptimes: Vec<f64> = tasks.iter().filter_map(processing_time).collect();
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let mut status_counts = BTreeMap::new();
        for t in tasks {
            *status_counts.entry(t.status).or_insert(0) += 1;
        }
        let total_messages: f64 = tasks.iter().map(|t| messages(t, rates)).sum();
        let total_connection_minutes: f64 = tasks.iter().map(connection_minutes).sum();
        let sum = |f: fn(&TaskRecord) -> u32| tasks.iter().map(|t| u64::from(f(t))).sum::<u64>();
        Self {
            tasks: tasks.len(),
            avg_delay_s: mean(&delays),
            max_delay_s: delays.iter().copied().reduce(f64::max),
            min_delay_s: delays.iter().copied().reduce(f64::min),
            delay_excluded: tasks.len() - delays.len(),
            avg_processing_s: mean(&ptimes),
            total_processing_s: ptimes.iter().sum(),
            processing_excluded: tasks.len() - ptimes.len(),
            total_messages,
            total_connection_minutes,
            messaging_cost: total_messages * rates.message_rate / 1e6,
            connectivity_cost: total_connection_minutes * rates.connection_rate / 1e6,
            total_cost: total_cost(tasks, rates),
            failed: tasks.iter().filter(|t| t.status.is_unsuccessful()).count(),
            status_counts,
            checkpoints: sum(|t| t.checkpoints),
            migrations: sum(|t| t.migrations),
            recoveries: sum(|t| t.recoveries),
            replications: sum(|t| t.replications),
            deferred_actions: sum(|t| t.deferred_actions),
        }
    }
}

/// `(baseline - flbfh) / baseline * 100`; `None` when the baseline is zero.
pub fn improvement_pct(baseline: f64, flbfh: f64) -> Option<f64> {
    (baseline != 0.0).then(|| (baseline - flbfh) / baseline * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task() -> TaskRecord {
        let mut t = TaskRecord::new(0, 0, 1000.0, 10.0, 0.5, 10.0);
        t.exec_start_s = Some(12.0);
        t.proc_start_s = Some(12.0);
        t.proc_end_s = Some(112.0);
        t.status = TaskStatus::Done;
        t
    }

    #[test]
    fn delay_examples() {
        assert_eq!(delay(&task()), Some(2.0));
        let mut t = task();
        t.exec_start_s = Some(10.0);
        assert_eq!(delay(&t), Some(0.0));
        t.exec_start_s = None;
        assert_eq!(delay(&t), None);
        let r = MetricsReport::from_tasks(&[t, task()], &CostRates::default());
        assert_eq!(r.delay_excluded, 1);
        assert_eq!(r.avg_delay_s, Some(2.0));
    }

    #[test]
    fn processing_examples() {
        let mut t = task();
        t.proc_start_s = Some(0.0);
        t.proc_end_s = Some(100.0);
        assert_eq!(processing_time(&t), Some(100.0));
        t.status = TaskStatus::DoneLate;
        assert_eq!(processing_time(&t), Some(100.0));
        t.status = TaskStatus::Running;
        assert_eq!(processing_time(&t), None);
    }

    #[test]
    fn cost_example() {
        let rates = CostRates {
            message_rate: 1.0,
            connection_rate: 0.08,
            ..Default::default()
        };
        let mut t = task();
        t.connection_s = 60.0;
        let c = total_cost(&[t], &rates);
        assert!((c - 2.08e-6).abs() < 1e-18, "{c}");
        assert_eq!(total_cost(&[], &rates), 0.0);
    }

    #[test]
    fn message_rate_linearity() {
        let mut t = task();
        t.checkpoints = 3;
        t.connection_s = 600.0;
        let r1 = CostRates::default();
        let r2 = CostRates {
            message_rate: 2.0 * r1.message_rate,
            ..r1.clone()
        };
        let m1 = MetricsReport::from_tasks(std::slice::from_ref(&t), &r1);
        let m2 = MetricsReport::from_tasks(&[t], &r2);
        assert_eq!(m2.messaging_cost, 2.0 * m1.messaging_cost);
        assert_eq!(m2.connectivity_cost, m1.connectivity_cost);
    }

    #[test]
    fn improvement_formula() {
        assert_eq!(improvement_pct(200.0, 100.0), Some(50.0));
        assert_eq!(improvement_pct(0.0, 1.0), None);
    }

    #[test]
    fn empty_report() {
        let r = MetricsReport::from_tasks(&[], &CostRates::default());
        assert_eq!(r.tasks, 0);
        assert_eq!(r.avg_delay_s, None);
        assert_eq!(r.total_cost, 0.0);
    }
}
