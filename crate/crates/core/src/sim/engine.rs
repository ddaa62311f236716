use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{load_trace, DeviceFailure, LoadedTrace, RunConfig, RunError};
use super::queue::{EventKind, EventQueue};
use super::task::{generate_workload, TaskRecord, TaskStatus};
use crate::device::{
    apply_ramp_in_place, device_rng, evolve_in_place, initial_telemetry, ramp_channels,
    DeviceState, RampPlan,
};
use crate::metrics::MetricsReport;
use crate::policy::{
    build_policy, Action, ActionRecord, FailureHistory, FailurePolicy, PolicyKind, TaskView,
};

const MIPS_STREAM: u64 = 1 << 41;

/// Occupancy of one device as seen by the scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotView {
    pub device_id: u32,
    pub up: bool,
    pub load: u32,
    pub slots: u32,
}

/// Least-loaded up device with a free slot; ties go to the lowest id.
pub fn schedule(devices: &[SlotView], exclude: &[u32]) -> Option<u32> {
    devices
        .iter()
        .filter(|d| d.up && d.load < d.slots && !exclude.contains(&d.device_id))
        .min_by_key(|d| (d.load, d.device_id))
        .map(|d| d.device_id)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TelemetrySample {
    pub time_s: f64,
    pub device_id: u32,
    pub mobility: f64,
    pub cpu: f64,
    pub network: f64,
    pub response: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub policy: PolicyKind,
    pub seed: u64,
    pub metrics: MetricsReport,
    pub actions: BTreeMap<Action, usize>,
    pub device_failures: u64,
    pub unpredicted_failures: u64,
    pub events_processed: u64,
    pub sim_end_s: f64,
    pub invariant_violations: usize,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: RunReport,
    pub actions: Vec<ActionRecord>,
    pub tasks: Vec<TaskRecord>,
    pub telemetry: Vec<TelemetrySample>,
    /// Descriptions of invariant breaches observed during the run.
    pub violations: Vec<String>,
}

/// Validates the config, loads its trace and simulates until every task is
/// terminal (or the horizon passes).
pub fn run(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(RunError::Config(errs));
    }
    let trace = load_trace(&cfg.trace, cfg.seed, cfg.devices.count)?;
    Ok(run_with_trace(cfg, &trace))
}

/// Like [`run`] with an already loaded trace; the config is assumed valid.
pub fn run_with_trace(cfg: &RunConfig, trace: &LoadedTrace) -> RunOutput {
    let mut sim = Sim::new(cfg, trace);
    sim.run();
    sim.finish()
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    PreCopy,
    StopCopy,
}

#[derive(Debug, Clone, Copy)]
struct Migration {
    target: u32,
    since: f64,
    phase: Phase,
    /// `progress_at` before the stop-copy pause was imposed.
    resume_at: f64,
}

#[derive(Debug, Clone, Copy)]
struct Checkpoint {
    snapshot: f64,
    started_at: f64,
}

/// Simulator-side state of a task.
///
/// Progress accrues at `rate` from `progress_at` on; a `progress_at` in the
/// future models a pause (start-up, checkpoint, stop-copy).
#[derive(Debug, Clone, Default)]
struct Runtime {
    progress_at: f64,
    rate: f64,
    host_since: f64,
    replica_since: f64,
    migration: Option<Migration>,
    checkpoint: Option<Checkpoint>,
    last_checkpoint_s: Option<f64>,
    run_epoch: u64,
    op_epoch: u64,
    recovery_load: bool,
}

struct Device {
    state: DeviceState,
    slots: u32,
    load: u32,
    history: FailureHistory,
    failures: Vec<DeviceFailure>,
    next_failure: usize,
    ramp: Option<RampPlan>,
    rng: ChaCha8Rng,
}

struct Sim<'a> {
    cfg: &'a RunConfig,
    now: f64,
    queue: EventQueue,
    devices: Vec<Device>,
    tasks: Vec<TaskRecord>,
    rt: Vec<Runtime>,
    active: BTreeSet<u32>,
    pending: VecDeque<u32>,
    policy: Box<dyn FailurePolicy>,
    uses_telemetry: bool,
    actions: Vec<ActionRecord>,
    telemetry: Vec<TelemetrySample>,
    violations: Vec<String>,
    terminal: usize,
    events: u64,
    scratch: Vec<u32>,
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a RunConfig, trace: &LoadedTrace) -> Self {
        let dc = &cfg.devices;
        let telemetry_seed = cfg.telemetry.seed.unwrap_or(cfg.seed);
        let mut mips_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        mips_rng.set_stream(MIPS_STREAM);
        let devices: Vec<Device> = (0..dc.count)
            .map(|id| {
                let mips = if dc.mips_max > dc.mips_min {
                    rand::Rng::random_range(&mut mips_rng, dc.mips_min..=dc.mips_max)
                } else {
                    dc.mips_min
                };
                let mut state = DeviceState::new(id, mips);
                let mut rng = device_rng(telemetry_seed, id);
                initial_telemetry(&mut state, dc.initial_lo, dc.initial_hi, &mut rng);
                let failures = trace
                    .per_device
                    .get(id as usize)
                    .cloned()
                    .unwrap_or_default();
                Device {
                    state,
                    slots: dc.slots,
                    load: 0,
                    history: FailureHistory::new(),
                    failures,
                    next_failure: 0,
                    ramp: None,
                    rng,
                }
            })
            .collect();

        let fallback = if trace.span_s > 0.0 {
            trace.span_s / 10.0
        } else {
            86_400.0
        };
        let policy = build_policy(&cfg.policy, devices.len(), fallback);
        let uses_telemetry = policy.uses_telemetry() || cfg.telemetry_log_every > 0;

        let tasks = generate_workload(&cfg.workload, cfg.seed);
        let mut queue = EventQueue::new();
        let mut failures: Vec<(f64, u32, bool)> = Vec::new();
        for (id, d) in devices.iter().enumerate() {
            for f in &d.failures {
                failures.push((f.start_s, id as u32, true));
                failures.push((f.end_s, id as u32, false));
            }
        }
        failures.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (t, device, start) in failures {
            let kind = if start {
                EventKind::FailureStart { device }
            } else {
                EventKind::FailureEnd { device }
            };
            queue.push(t, kind);
        }
        for t in &tasks {
            queue.push(t.submit_s, EventKind::Arrival { task: t.task_id });
        }
        if !tasks.is_empty() {
            queue.push(cfg.monitor_interval_s, EventKind::MonitorTick { tick: 1 });
        }

        Self {
            cfg,
            now: 0.0,
            queue,
            devices,
            rt: vec![Runtime::default(); tasks.len()],
            tasks,
            active: BTreeSet::new(),
            pending: VecDeque::new(),
            policy,
            uses_telemetry,
            actions: Vec::new(),
            telemetry: Vec::new(),
            violations: Vec::new(),
            terminal: 0,
            events: 0,
            scratch: Vec::new(),
        }
    }

    fn run(&mut self) {
        while self.terminal < self.tasks.len() {
            let Some(ev) = self.queue.pop() else { break };
            if self.cfg.horizon_s.is_some_and(|h| ev.time_s > h) {
                break;
            }
            debug_assert!(ev.time_s >= self.now);
            self.now = ev.time_s;
            self.events += 1;
            match ev.kind {
                EventKind::Arrival { task } => self.on_arrival(task),
                EventKind::MonitorTick { tick } => self.on_tick(tick),
                EventKind::FailureStart { device } => self.on_failure_start(device),
                EventKind::FailureEnd { device } => self.on_failure_end(device),
                EventKind::TaskDone { task, epoch } => {
                    if self.rt[task as usize].run_epoch == epoch {
                        self.on_done(task);
                    }
                }
                EventKind::MigrationDone { task, epoch } => {
                    if self.rt[task as usize].op_epoch == epoch {
                        self.on_migration_step(task);
                    }
                }
                EventKind::CheckpointDone { task, epoch } => {
                    if self.rt[task as usize].op_epoch == epoch {
                        self.on_checkpoint_done(task);
                    }
                }
            }
        }
    }

    fn finish(mut self) -> RunOutput {
        // Occupancy still open when the run stops early.
        let open: Vec<u32> = self.active.iter().copied().collect();
        for id in open {
            let (t, rt) = (&mut self.tasks[id as usize], &self.rt[id as usize]);
            if t.host.is_some() {
                t.connection_s += self.now - rt.host_since;
            }
            if t.replica_host.is_some() {
                t.connection_s += self.now - rt.replica_since;
            }
            if let Some(m) = rt.migration {
                t.connection_s += self.now - m.since;
            }
        }
        let mut by_kind = BTreeMap::new();
        for a in &self.actions {
            *by_kind.entry(a.action).or_insert(0) += 1;
        }
        let report = RunReport {
            policy: self.cfg.policy.kind,
            seed: self.cfg.seed,
            metrics: MetricsReport::from_tasks(&self.tasks, &self.cfg.cost),
            actions: by_kind,
            device_failures: self
                .devices
                .iter()
                .map(|d| u64::from(d.state.failure_count))
                .sum(),
            unpredicted_failures: self
                .devices
                .iter()
                .map(|d| u64::from(d.state.unpredicted_failure_count))
                .sum(),
            events_processed: self.events,
            sim_end_s: self.now,
            invariant_violations: self.violations.len(),
            config: self.cfg.clone(),
        };
        RunOutput {
            report,
            actions: self.actions,
            tasks: self.tasks,
            telemetry: self.telemetry,
            violations: self.violations,
        }
    }

    fn violation(&mut self, msg: String) {
        log::error!("t={}: {msg}", self.now);
        self.violations.push(format!("t={}: {msg}", self.now));
    }

    // ---- progress bookkeeping ----

    fn advance(&mut self, id: u32) {
        let (t, rt) = (&mut self.tasks[id as usize], &mut self.rt[id as usize]);
        if t.host.is_some() && self.now > rt.progress_at {
            t.progress_mi =
                (t.progress_mi + rt.rate * (self.now - rt.progress_at)).min(t.length_mi);
            rt.progress_at = self.now;
        }
    }

    fn remaining_s(&self, id: u32) -> f64 {
        let (t, rt) = (&self.tasks[id as usize], &self.rt[id as usize]);
        (rt.progress_at - self.now).max(0.0) + (t.length_mi - t.progress_mi) / rt.rate
    }

    fn reschedule_done(&mut self, id: u32) {
        let rt = &mut self.rt[id as usize];
        rt.run_epoch += 1;
        if self.tasks[id as usize].host.is_some() {
            let at = self.now + self.remaining_s(id);
            let epoch = self.rt[id as usize].run_epoch;
            self.queue.push(at, EventKind::TaskDone { task: id, epoch });
        }
    }

    fn bump_op(&mut self, id: u32) -> u64 {
        let rt = &mut self.rt[id as usize];
        rt.op_epoch += 1;
        rt.op_epoch
    }

    // ---- slots ----

    fn pick_device(&self, exclude: [Option<u32>; 2]) -> Option<u32> {
        self.devices
            .iter()
            .enumerate()
            .filter(|(i, d)| {
                let i = *i as u32;
                d.state.up && d.load < d.slots && exclude[0] != Some(i) && exclude[1] != Some(i)
            })
            .min_by_key(|(i, d)| (d.load, *i))
            .map(|(i, _)| i as u32)
    }

    fn release_primary(&mut self, id: u32) {
        let t = &mut self.tasks[id as usize];
        if let Some(h) = t.host.take() {
            self.devices[h as usize].load -= 1;
            t.connection_s += self.now - self.rt[id as usize].host_since;
        }
    }

    fn release_replica(&mut self, id: u32) {
        let t = &mut self.tasks[id as usize];
        if let Some(h) = t.replica_host.take() {
            self.devices[h as usize].load -= 1;
            t.connection_s += self.now - self.rt[id as usize].replica_since;
            let app = t.app_id;
            self.policy.on_replica_released(app);
        }
    }

    fn release_target(&mut self, id: u32) {
        if let Some(m) = self.rt[id as usize].migration.take() {
            self.devices[m.target as usize].load -= 1;
            self.tasks[id as usize].connection_s += self.now - m.since;
        }
    }

    fn place(&mut self, id: u32, device: u32) {
        let o = &self.cfg.overheads;
        let d = &mut self.devices[device as usize];
        d.load += 1;
        let rate = d.state.mips;
        let rt = &mut self.rt[id as usize];
        let mut wait = o.scheduling_latency_s;
        if std::mem::take(&mut rt.recovery_load) {
            wait += o.recovery_load_s;
        }
        rt.rate = rate;
        rt.host_since = self.now;
        rt.progress_at = self.now + wait;
        let t = &mut self.tasks[id as usize];
        t.host = Some(device);
        t.status = TaskStatus::Running;
        t.exec_start_s.get_or_insert(rt.progress_at);
        t.proc_start_s.get_or_insert(rt.progress_at);
        self.active.insert(id);
        self.reschedule_done(id);
    }

    fn try_schedule(&mut self) {
        while let Some(&id) = self.pending.front() {
            let Some(dev) = self.pick_device([None, None]) else {
                break;
            };
            self.pending.pop_front();
            self.place(id, dev);
        }
    }

    // ---- events ----

    fn on_arrival(&mut self, id: u32) {
        self.pending.push_back(id);
        self.try_schedule();
    }

    fn on_tick(&mut self, tick: u64) {
        let dt = self.cfg.monitor_interval_s;
        if self.uses_telemetry {
            self.update_telemetry(dt);
        }
        if self.cfg.telemetry_log_every > 0
            && tick.is_multiple_of(u64::from(self.cfg.telemetry_log_every))
        {
            for d in &self.devices {
                let s = &d.state;
                self.telemetry.push(TelemetrySample {
                    time_s: self.now,
                    device_id: s.device_id,
                    mobility: s.mobility_pct,
                    cpu: s.cpu_util_pct,
                    network: s.network_pct,
                    response: s.response_pct,
                    power: s.power_pct,
                });
            }
        }
        self.evaluate_tasks();
        self.queue.push(
            (tick + 1) as f64 * dt,
            EventKind::MonitorTick { tick: tick + 1 },
        );
    }

    fn update_telemetry(&mut self, dt: f64) {
        let now = self.now;
        let mut bad = Vec::new();
        for d in &mut self.devices {
            if !d.state.up {
                continue;
            }
            evolve_in_place(&mut d.state, &self.cfg.telemetry, dt, &mut d.rng);
            if let Some(f) = d.failures.get(d.next_failure) {
                let w = self.cfg.ramp.window(f.category);
                let stale = d.ramp.as_ref().is_none_or(|p| p.onset_s != f.start_s);
                if stale {
                    d.ramp = RampPlan::begin(&d.state, f.category, f.start_s, w, now);
                }
            }
            if let Some(plan) = &d.ramp {
                apply_ramp_in_place(&mut d.state, plan, now);
            }
            if !d.state.telemetry_in_range() {
                bad.push(d.state.device_id);
            }
        }
        for id in bad {
            self.violation(format!("device {id} telemetry outside [0, 100]"));
        }
    }

    fn view(&self, id: u32) -> TaskView {
        let (t, rt) = (&self.tasks[id as usize], &self.rt[id as usize]);
        TaskView {
            app_id: t.app_id,
            task_id: t.task_id,
            now: self.now,
            host_since_s: rt.host_since,
            last_checkpoint_s: rt.last_checkpoint_s,
            checkpointing: t.status == TaskStatus::Checkpointed,
        }
    }

    fn evaluate_tasks(&mut self) {
        let mut ids = std::mem::take(&mut self.scratch);
        ids.clear();
        ids.extend(self.active.iter().copied());
        let mut acted_app: Option<u32> = None;
        for &id in &ids {
            let t = &self.tasks[id as usize];
            if !matches!(t.status, TaskStatus::Running | TaskStatus::Checkpointed) {
                continue;
            }
            let host = t.host.expect("active task has a host") as usize;
            if !self.devices[host].state.up {
                self.violation(format!("task {id} on down device {host}"));
                continue;
            }
            let view = self.view(id);
            let dev = &self.devices[host];
            let decision = self.policy.evaluate(&view, &dev.state, &dev.history);
            for rec in decision.actions {
                match rec.action {
                    Action::Replicate => {
                        self.actions.push(rec);
                        self.start_replica(id);
                    }
                    Action::Checkpoint | Action::Migrate => {
                        if acted_app == Some(rec.app_id) {
                            continue;
                        }
                        acted_app = Some(rec.app_id);
                        self.actions.push(rec);
                        if rec.action == Action::Checkpoint {
                            self.start_checkpoint(id);
                        } else {
                            self.start_migration(id);
                        }
                    }
                    Action::None | Action::CheckpointRecover => {}
                }
            }
        }
        self.scratch = ids;
    }

    fn start_checkpoint(&mut self, id: u32) {
        if self.tasks[id as usize].status != TaskStatus::Running {
            return;
        }
        self.advance(id);
        let o = &self.cfg.overheads;
        let remaining = self.remaining_s(id);
        let cost = (o.checkpoint_fraction * remaining).max(o.checkpoint_min_s);
        let rt = &mut self.rt[id as usize];
        let start = rt.progress_at.max(self.now);
        rt.checkpoint = Some(Checkpoint {
            snapshot: self.tasks[id as usize].progress_mi,
            started_at: start,
        });
        rt.progress_at = start + cost;
        rt.last_checkpoint_s = Some(self.now);
        let t = &mut self.tasks[id as usize];
        t.status = TaskStatus::Checkpointed;
        t.checkpoints += 1;
        let epoch = self.bump_op(id);
        self.queue
            .push(start + cost, EventKind::CheckpointDone { task: id, epoch });
        self.reschedule_done(id);
    }

    fn on_checkpoint_done(&mut self, id: u32) {
        if let Some(c) = self.rt[id as usize].checkpoint.take() {
            let t = &mut self.tasks[id as usize];
            t.last_checkpoint_mi = Some(c.snapshot);
            t.status = TaskStatus::Running;
        }
    }

    /// Drops an unfinished checkpoint; the pause it imposed ends now.
    fn cancel_checkpoint(&mut self, id: u32) {
        if let Some(c) = self.rt[id as usize].checkpoint.take() {
            let rt = &mut self.rt[id as usize];
            rt.progress_at = c.started_at.max(self.now);
            self.tasks[id as usize].status = TaskStatus::Running;
            self.bump_op(id);
        }
    }

    fn start_migration(&mut self, id: u32) {
        let t = &self.tasks[id as usize];
        if !matches!(t.status, TaskStatus::Running | TaskStatus::Checkpointed) {
            return;
        }
        let Some(target) = self.pick_device([t.host, t.replica_host]) else {
            self.tasks[id as usize].deferred_actions += 1;
            return;
        };
        self.advance(id);
        let transfer = self.cfg.overheads.transfer_s();
        if self.remaining_s(id) <= transfer {
            return;
        }
        self.cancel_checkpoint(id);
        self.devices[target as usize].load += 1;
        let resume_at = self.rt[id as usize].progress_at;
        self.rt[id as usize].migration = Some(Migration {
            target,
            since: self.now,
            phase: Phase::PreCopy,
            resume_at,
        });
        let t = &mut self.tasks[id as usize];
        t.status = TaskStatus::Migrating;
        t.migrations += 1;
        let epoch = self.bump_op(id);
        self.queue.push(
            self.now + transfer,
            EventKind::MigrationDone { task: id, epoch },
        );
        self.reschedule_done(id);
    }

    fn on_migration_step(&mut self, id: u32) {
        let Some(m) = self.rt[id as usize].migration else {
            return;
        };
        self.advance(id);
        match m.phase {
            Phase::PreCopy => {
                let stop = self.cfg.overheads.stop_copy_s;
                let rt = &mut self.rt[id as usize];
                let resume_at = rt.progress_at;
                rt.progress_at = rt.progress_at.max(self.now + stop);
                rt.migration = Some(Migration {
                    phase: Phase::StopCopy,
                    resume_at,
                    ..m
                });
                // The task finishes on the target, not here.
                rt.run_epoch += 1;
                let epoch = self.bump_op(id);
                self.queue.push(
                    self.now + stop,
                    EventKind::MigrationDone { task: id, epoch },
                );
            }
            Phase::StopCopy => {
                self.rt[id as usize].migration = None;
                self.release_primary(id);
                let rate = self.devices[m.target as usize].state.mips;
                let rt = &mut self.rt[id as usize];
                rt.host_since = m.since;
                rt.rate = rate;
                rt.progress_at = rt.progress_at.max(self.now);
                let t = &mut self.tasks[id as usize];
                t.host = Some(m.target);
                t.status = TaskStatus::Running;
                self.reschedule_done(id);
                self.try_schedule();
            }
        }
    }

    /// Abandons a migration; the task keeps running at the source.
    fn abort_migration(&mut self, id: u32) {
        let Some(m) = self.rt[id as usize].migration else {
            return;
        };
        self.release_target(id);
        if let Phase::StopCopy = m.phase {
            let rt = &mut self.rt[id as usize];
            rt.progress_at = m.resume_at.max(self.now);
        }
        self.tasks[id as usize].status = TaskStatus::Running;
        self.bump_op(id);
    }

    fn start_replica(&mut self, id: u32) {
        let t = &self.tasks[id as usize];
        let app = t.app_id;
        if t.replica_host.is_some() || t.host.is_none() {
            if t.host.is_none() {
                self.tasks[id as usize].deferred_actions += 1;
                self.policy.on_replica_released(app);
            }
            return;
        }
        let target_of_migration = self.rt[id as usize].migration.map(|m| m.target);
        let exclude = [t.host, target_of_migration];
        match self.pick_device(exclude) {
            Some(dev) => {
                self.devices[dev as usize].load += 1;
                self.rt[id as usize].replica_since = self.now;
                let t = &mut self.tasks[id as usize];
                t.replica_host = Some(dev);
                t.replications += 1;
            }
            None => {
                self.tasks[id as usize].deferred_actions += 1;
                self.policy.on_replica_released(app);
            }
        }
    }

    fn on_done(&mut self, id: u32) {
        self.advance(id);
        let t = &self.tasks[id as usize];
        let tol = 1e-6 * t.length_mi.max(1.0);
        if (t.progress_mi - t.length_mi).abs() > tol {
            let msg = format!(
                "task {id} finished with {} of {} MI",
                t.progress_mi, t.length_mi
            );
            self.violation(msg);
        }
        self.cancel_checkpoint(id);
        self.release_target(id);
        self.release_replica(id);
        self.release_primary(id);
        let now = self.now;
        let t = &mut self.tasks[id as usize];
        t.progress_mi = t.length_mi;
        t.proc_end_s = Some(now);
        t.status = if now > t.deadline_s {
            TaskStatus::DoneLate
        } else {
            TaskStatus::Done
        };
        self.active.remove(&id);
        self.terminal += 1;
        self.try_schedule();
    }

    fn on_failure_start(&mut self, device: u32) {
        let now = self.now;
        let d = &mut self.devices[device as usize];
        let f = d.failures[d.next_failure];
        d.next_failure += 1;
        d.state.up = false;
        d.state.failure_count += 1;
        if !(self.cfg.ramp.window(f.category) > 0.0) {
            d.state.unpredicted_failure_count += 1;
        }
        d.history.record(now, f.end_s);

        let mut ids = std::mem::take(&mut self.scratch);
        ids.clear();
        ids.extend(self.active.iter().copied());
        for &id in &ids {
            if self.rt[id as usize]
                .migration
                .is_some_and(|m| m.target == device)
            {
                self.advance(id);
                self.abort_migration(id);
                self.reschedule_done(id);
            }
            if self.tasks[id as usize].replica_host == Some(device) {
                self.release_replica(id);
            }
            if self.tasks[id as usize].host == Some(device) {
                self.recover(id);
            }
        }
        self.scratch = ids;
        self.try_schedule();
    }

    fn recover(&mut self, id: u32) {
        let view = self.view(id);
        let decision = self.policy.on_host_failure(&view);
        self.actions.extend(decision.actions.iter().copied());

        self.advance(id);
        self.abort_migration(id);
        // An unfinished snapshot dies with the host.
        if self.rt[id as usize].checkpoint.take().is_some() {
            self.bump_op(id);
        }
        self.release_primary(id);
        self.tasks[id as usize].recoveries += 1;

        if let Some(replica) = self.tasks[id as usize].replica_host.take() {
            // The replica becomes the primary with identical progress.
            let app = self.tasks[id as usize].app_id;
            self.policy.on_replica_released(app);
            let rate = self.devices[replica as usize].state.mips;
            let rt = &mut self.rt[id as usize];
            rt.host_since = rt.replica_since;
            rt.rate = rate;
            rt.progress_at = self.now;
            let t = &mut self.tasks[id as usize];
            t.host = Some(replica);
            t.status = TaskStatus::Running;
            self.reschedule_done(id);
        } else {
            let max = self.cfg.overheads.max_recoveries;
            let now = self.now;
            let t = &mut self.tasks[id as usize];
            self.active.remove(&id);
            self.rt[id as usize].run_epoch += 1;
            if t.recoveries > max {
                t.status = TaskStatus::Failed;
                t.proc_end_s = Some(now);
                self.terminal += 1;
            } else {
                match t.last_checkpoint_mi {
                    Some(p) => t.progress_mi = p,
                    None => {
                        t.progress_mi = 0.0;
                        t.exec_start_s = None;
                    }
                }
                t.status = TaskStatus::Pending;
                self.rt[id as usize].recovery_load = true;
                self.pending.push_back(id);
            }
        }

        if decision
            .actions
            .iter()
            .any(|a| a.action == Action::Replicate)
        {
            self.start_replica(id);
        }
    }

    fn on_failure_end(&mut self, device: u32) {
        let d = &mut self.devices[device as usize];
        d.state.up = true;
        if let Some(plan) = d.ramp.take() {
            for &ch in ramp_channels(plan.category) {
                d.state.set(ch, plan.start[ch.index()]);
            }
        }
        self.try_schedule();
    }
}
