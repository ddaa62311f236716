use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::config::WorkloadConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaskStatus {
    Pending,
    Running,
    Checkpointed,
    Migrating,
    Failed,
    Done,
    DoneLate,
}

impl TaskStatus {
    pub const ALL: [TaskStatus; 7] = [
        TaskStatus::Pending,
        TaskStatus::Running,
        TaskStatus::Checkpointed,
        TaskStatus::Migrating,
        TaskStatus::Failed,
        TaskStatus::Done,
        TaskStatus::DoneLate,
    ];

    pub fn token(self) -> &'static str {
        match self {
            TaskStatus::Pending => "PENDING",
            TaskStatus::Running => "RUNNING",
            TaskStatus::Checkpointed => "CHECKPOINTED",
            TaskStatus::Migrating => "MIGRATING",
            TaskStatus::Failed => "FAILED",
            TaskStatus::Done => "DONE",
            TaskStatus::DoneLate => "DONE_LATE",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            TaskStatus::Failed | TaskStatus::Done | TaskStatus::DoneLate
        )
    }

    /// Terminal without meeting the deadline.
    pub fn is_unsuccessful(self) -> bool {
        matches!(self, TaskStatus::Failed | TaskStatus::DoneLate)
    }
}

impl fmt::Display for TaskStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for TaskStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskStatus::ALL
            .into_iter()
            .find(|t| t.token() == s)
            .ok_or_else(|| format!("unknown task status `{s}`"))
    }
}

/// A task and everything the metrics need to know about its life.
///
/// `deadline_s = submit_s + length_mi / mips_ref * (1 + slack)`.
/// `exec_start_s` is the start of the execution that produced the final
/// result: it moves forward when the task restarts from scratch and stays
/// put when it resumes from a checkpoint or a replica. `proc_start_s` is the
/// very first start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub app_id: u32,
    pub task_id: u32,
    pub length_mi: f64,
    pub submit_s: f64,
    pub deadline_s: f64,
    pub slack: f64,
    pub exec_start_s: Option<f64>,
    pub proc_start_s: Option<f64>,
    pub proc_end_s: Option<f64>,
    pub progress_mi: f64,
    pub last_checkpoint_mi: Option<f64>,
    pub host: Option<u32>,
    pub replica_host: Option<u32>,
    pub status: TaskStatus,
    pub checkpoints: u32,
    pub migrations: u32,
    pub recoveries: u32,
    pub replications: u32,
    pub deferred_actions: u32,
    /// Time spent occupying device slots, replicas and migration targets
    /// included.
    pub connection_s: f64,
}

impl TaskRecord {
    pub fn new(
        app_id: u32,
        task_id: u32,
        length_mi: f64,
        submit_s: f64,
        slack: f64,
        mips_ref: f64,
    ) -> Self {
        Self {
            app_id,
            task_id,
            length_mi,
            submit_s,
            deadline_s: submit_s + length_mi / mips_ref * (1.0 + slack),
            slack,
            exec_start_s: None,
            proc_start_s: None,
            proc_end_s: None,
            progress_mi: 0.0,
            last_checkpoint_mi: None,
            host: None,
            replica_host: None,
            status: TaskStatus::Pending,
            checkpoints: 0,
            migrations: 0,
            recoveries: 0,
            replications: 0,
            deferred_actions: 0,
            connection_s: 0.0,
        }
    }
}

const WORKLOAD_STREAM: u64 = 0;

/// Poisson arrivals with uniform lengths and slacks, from the run seed.
/// Consecutive tasks are grouped into applications of `tasks_per_app`.
pub fn generate_workload(cfg: &WorkloadConfig, seed: u64) -> Vec<TaskRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(WORKLOAD_STREAM);
    let gap = Exp::new(cfg.arrival_rate_per_s).expect("validated rate");
    let mut t = cfg.start_s;
    (0..cfg.tasks)
        .map(|id| {
            t += gap.sample(&mut rng);
            let length = uniform(&mut rng, cfg.length_min_mi, cfg.length_max_mi);
            let slack = uniform(&mut rng, cfg.slack_min, cfg.slack_max);
            TaskRecord::new(id / cfg.tasks_per_app, id, length, t, slack, cfg.mips_ref)
        })
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}
