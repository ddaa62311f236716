//! Run configuration (JSON) and trace loading.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::device::TelemetryProfile;
use crate::metrics::CostRates;
use crate::policy::PolicyConfig;
use crate::trace::{self, FailureCategory, TraceError, TraceSet};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<String>),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Configuration and input-file problems, as opposed to internal faults.
    pub fn is_input_error(&self) -> bool {
        matches!(self, RunError::Config(_) | RunError::Io { .. })
            || matches!(self, RunError::Trace(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub count: u32,
    /// Concurrent task copies (primaries, replicas, migration targets) a
    /// device hosts.
    pub slots: u32,
    /// Capacities are drawn uniformly from `[mips_min, mips_max]`.
    pub mips_min: f64,
    pub mips_max: f64,
    /// Initial telemetry is drawn uniformly from this range.
    pub initial_lo: f64,
    pub initial_hi: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            count: 10,
            slots: 2,
            mips_min: 1000.0,
            mips_max: 1000.0,
            initial_lo: 5.0,
            initial_hi: 35.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    pub tasks: u32,
    /// Poisson arrival rate (tasks per second).
    pub arrival_rate_per_s: f64,
    pub start_s: f64,
    /// Task lengths in million instructions, uniform over the range.
    pub length_min_mi: f64,
    pub length_max_mi: f64,
    /// Reference capacity for deadlines.
    pub mips_ref: f64,
    pub slack_min: f64,
    pub slack_max: f64,
    pub tasks_per_app: u32,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            tasks: 100,
            arrival_rate_per_s: 0.01,
            start_s: 0.0,
            length_min_mi: 600_000.0,
            length_max_mi: 3_600_000.0,
            mips_ref: 1000.0,
            slack_min: 0.10,
            slack_max: 0.80,
            tasks_per_app: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overheads {
    /// Checkpoint pause as a fraction of the remaining execution time.
    pub checkpoint_fraction: f64,
    pub checkpoint_min_s: f64,
    pub migration_state_bytes: f64,
    pub migration_bandwidth_bps: f64,
    pub stop_copy_s: f64,
    /// Extra start-up time when resuming from a checkpoint or from scratch.
    pub recovery_load_s: f64,
    pub scheduling_latency_s: f64,
    /// Recoveries beyond this mark the task FAILED.
    pub max_recoveries: u32,
}

impl Default for Overheads {
    fn default() -> Self {
        Self {
            checkpoint_fraction: 0.02,
            checkpoint_min_s: 0.5,
            migration_state_bytes: 64.0 * 1024.0 * 1024.0,
            migration_bandwidth_bps: 100e6,
            stop_copy_s: 0.5,
            recovery_load_s: 1.0,
            scheduling_latency_s: 0.5,
            max_recoveries: 100,
        }
    }
}

impl Overheads {
    pub fn transfer_s(&self) -> f64 {
        self.migration_state_bytes * 8.0 / self.migration_bandwidth_bps
    }
}

/// Pre-failure ramp window per failure category; zero makes failures of
/// that category unpredicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampWindows {
    pub cpu: f64,
    pub memory: f64,
    pub network: f64,
    pub power: f64,
    pub software: f64,
    pub unknown: f64,
}

impl Default for RampWindows {
    fn default() -> Self {
        Self {
            cpu: 300.0,
            memory: 0.0,
            network: 300.0,
            power: 300.0,
            software: 0.0,
            unknown: 0.0,
        }
    }
}

impl RampWindows {
    pub fn uniform(w: f64) -> Self {
        Self {
            cpu: w,
            memory: w,
            network: w,
            power: w,
            software: w,
            unknown: w,
        }
    }

    pub fn window(&self, c: FailureCategory) -> f64 {
        match c {
            FailureCategory::Cpu => self.cpu,
            FailureCategory::Memory => self.memory,
            FailureCategory::Network => self.network,
            FailureCategory::Power => self.power,
            FailureCategory::Software => self.software,
            FailureCategory::Unknown => self.unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TraceSource {
    /// No failures.
    #[default]
    None,
    Synthetic {
        /// Defaults to the device count.
        #[serde(default)]
        nodes: Option<u32>,
        span_s: i64,
        mtbf_s: f64,
        mttr_s: f64,
        /// Defaults to the run seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    Normalized {
        path: PathBuf,
    },
    Lanl {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    pub source: TraceSource,
    /// Window start relative to the trace origin (first failure for file
    /// traces, zero for synthetic ones).
    pub offset_s: i64,
    pub duration_s: Option<i64>,
    /// Trace seconds per simulated second.
    pub compression: f64,
    pub top_n_failing: Option<usize>,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            source: TraceSource::None,
            offset_s: 0,
            duration_s: None,
            compression: 1.0,
            top_n_failing: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub devices: DeviceConfig,
    pub telemetry: TelemetryProfile,
    pub workload: WorkloadConfig,
    pub monitor_interval_s: f64,
    pub overheads: Overheads,
    pub policy: PolicyConfig,
    pub ramp: RampWindows,
    pub trace: TraceConfig,
    pub cost: CostRates,
    /// Stop at this simulated time even if tasks remain.
    pub horizon_s: Option<f64>,
    /// Sample device telemetry every this many monitor ticks (0 = off).
    pub telemetry_log_every: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            devices: DeviceConfig::default(),
            telemetry: TelemetryProfile::default(),
            workload: WorkloadConfig::default(),
            monitor_interval_s: 1.0,
            overheads: Overheads::default(),
            policy: PolicyConfig::default(),
            ramp: RampWindows::default(),
            trace: TraceConfig::default(),
            cost: CostRates::default(),
            horizon_s: None,
            telemetry_log_every: 0,
        }
    }
}

fn positive(errs: &mut Vec<String>, name: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(format!("{name} must be positive (got {v})"));
    }
}

fn non_negative(errs: &mut Vec<String>, name: &str, v: f64) {
    if !(v >= 0.0 && v.is_finite()) {
        errs.push(format!("{name} must be >= 0 (got {v})"));
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(vec![e.to_string()]))
    }

    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_json_str(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    /// Makes relative trace paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        match &mut self.trace.source {
            TraceSource::Normalized { path } | TraceSource::Lanl { path } if path.is_relative() => {
                *path = base.join(&*path);
            }
            _ => {}
        }
    }

    /// Every problem found, in a stable order.
    pub fn validate(&self) -> Vec<String> {
        let mut e = Vec::new();
        let d = &self.devices;
        if d.count == 0 {
            e.push("devices.count must be at least 1".into());
        }
        if d.slots == 0 {
            e.push("devices.slots must be at least 1".into());
        }
        positive(&mut e, "devices.mips_min", d.mips_min);
        if !(d.mips_max >= d.mips_min) {
            e.push("devices.mips_max must be >= devices.mips_min".into());
        }
        if !(0.0 <= d.initial_lo && d.initial_lo <= d.initial_hi && d.initial_hi <= 100.0) {
            e.push("devices.initial_lo/initial_hi must satisfy 0 <= lo <= hi <= 100".into());
        }
        e.extend(self.telemetry.validate());

        let w = &self.workload;
        positive(&mut e, "workload.arrival_rate_per_s", w.arrival_rate_per_s);
        non_negative(&mut e, "workload.start_s", w.start_s);
        positive(&mut e, "workload.length_min_mi", w.length_min_mi);
        if !(w.length_max_mi >= w.length_min_mi) {
            e.push("workload.length_max_mi must be >= workload.length_min_mi".into());
        }
        positive(&mut e, "workload.mips_ref", w.mips_ref);
        if !(0.0 <= w.slack_min && w.slack_min <= w.slack_max && w.slack_max.is_finite()) {
            e.push("workload.slack_min/slack_max must satisfy 0 <= min <= max".into());
        }
        if w.tasks_per_app == 0 {
            e.push("workload.tasks_per_app must be at least 1".into());
        }

        positive(&mut e, "monitor_interval_s", self.monitor_interval_s);

        let o = &self.overheads;
        non_negative(
            &mut e,
            "overheads.checkpoint_fraction",
            o.checkpoint_fraction,
        );
        non_negative(&mut e, "overheads.checkpoint_min_s", o.checkpoint_min_s);
        non_negative(
            &mut e,
            "overheads.migration_state_bytes",
            o.migration_state_bytes,
        );
        positive(
            &mut e,
            "overheads.migration_bandwidth_bps",
            o.migration_bandwidth_bps,
        );
        non_negative(&mut e, "overheads.stop_copy_s", o.stop_copy_s);
        non_negative(&mut e, "overheads.recovery_load_s", o.recovery_load_s);
        non_negative(
            &mut e,
            "overheads.scheduling_latency_s",
            o.scheduling_latency_s,
        );

        e.extend(self.policy.validate());

        for c in FailureCategory::ALL {
            non_negative(
                &mut e,
                &format!("ramp.{}", c.token().to_lowercase()),
                self.ramp.window(c),
            );
        }

        let t = &self.trace;
        positive(&mut e, "trace.compression", t.compression);
        if t.offset_s < 0 {
            e.push("trace.offset_s must be >= 0".into());
        }
        if let Some(dur) = t.duration_s {
            if dur <= 0 {
                e.push("trace.duration_s must be positive".into());
            }
        }
        if t.top_n_failing == Some(0) {
            e.push("trace.top_n_failing must be at least 1".into());
        }
        match &t.source {
            TraceSource::Synthetic {
                nodes,
                span_s,
                mtbf_s,
                mttr_s,
                ..
            } => {
                if *span_s <= 0 {
                    e.push("trace.source.span_s must be positive".into());
                }
                positive(&mut e, "trace.source.mtbf_s", *mtbf_s);
                positive(&mut e, "trace.source.mttr_s", *mttr_s);
                if let Some(n) = nodes {
                    if *n < d.count {
                        e.push(format!(
                            "trace.source.nodes ({n}) must be >= devices.count ({})",
                            d.count
                        ));
                    }
                }
            }
            TraceSource::Normalized { path } | TraceSource::Lanl { path } => {
                if path.as_os_str().is_empty() {
                    e.push("trace.source.path must not be empty".into());
                }
            }
            TraceSource::None => {}
        }

        e.extend(self.cost.validate());
        if let Some(h) = self.horizon_s {
            positive(&mut e, "horizon_s", h);
        }
        e
    }
}

/// One failure of one device in simulated seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceFailure {
    pub start_s: f64,
    pub end_s: f64,
    pub category: FailureCategory,
}

/// Failures per device after windowing, compression and node mapping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadedTrace {
    pub per_device: Vec<Vec<DeviceFailure>>,
    /// Trace node backing each device.
    pub nodes: Vec<u32>,
    /// Simulated length of the trace window.
    pub span_s: f64,
}

/// Reads or generates the configured trace and maps its nodes onto
/// `devices` devices: device `i` takes the `i`-th node of the sorted roster.
pub fn load_trace(cfg: &TraceConfig, run_seed: u64, devices: u32) -> Result<LoadedTrace, RunError> {
    let (set, origin) = match &cfg.source {
        TraceSource::None => {
            return Ok(LoadedTrace {
                per_device: vec![Vec::new(); devices as usize],
                nodes: (0..devices).collect(),
                span_s: cfg.duration_s.map_or(0.0, |d| d as f64 / cfg.compression),
            })
        }
        TraceSource::Synthetic {
            nodes,
            span_s,
            mtbf_s,
            mttr_s,
            seed,
        } => {
            let set = trace::synthesize(
                nodes.unwrap_or(devices),
                *span_s,
                *mtbf_s,
                *mttr_s,
                seed.unwrap_or(run_seed),
            )?;
            (set, 0)
        }
        TraceSource::Normalized { path } => {
            let set = trace::parse_normalized_csv(path)?;
            let origin = set.origin().unwrap_or(0);
            (set, origin)
        }
        TraceSource::Lanl { path } => {
            let parsed = trace::parse_lanl(path)?;
            let origin = parsed.traces.origin().unwrap_or(0);
            (parsed.traces, origin)
        }
    };
    window_trace(&set, origin, cfg, devices)
}

/// Windowing and node mapping for an already loaded trace.
pub fn window_trace(
    set: &TraceSet,
    origin: i64,
    cfg: &TraceConfig,
    devices: u32,
) -> Result<LoadedTrace, RunError> {
    let set = match cfg.top_n_failing {
        Some(n) => set.top_n_failing(n),
        None => set.clone(),
    };
    let roster: Vec<u32> = set.roster().iter().copied().collect();
    if roster.len() < devices as usize {
        return Err(RunError::Config(vec![format!(
            "trace has {} nodes but {} devices are configured",
            roster.len(),
            devices
        )]));
    }
    let nodes: Vec<u32> = roster[..devices as usize].to_vec();
    let from = origin + cfg.offset_s;
    let to = match cfg.duration_s {
        Some(d) => from + d,
        None => set
            .events()
            .iter()
            .map(|e| e.end_s)
            .max()
            .unwrap_or(from)
            .max(from),
    };
    let scale = 1.0 / cfg.compression;
    let mut per_device = vec![Vec::new(); devices as usize];
    for (i, &node) in nodes.iter().enumerate() {
        for e in set.node_events(node) {
            let s = e.start_s.max(from);
            let t = e.end_s.min(to);
            if t > s {
                per_device[i].push(DeviceFailure {
                    start_s: (s - from) as f64 * scale,
                    end_s: (t - from) as f64 * scale,
                    category: e.category,
                });
            }
        }
    }
    Ok(LoadedTrace {
        per_device,
        nodes,
        span_s: (to - from) as f64 * scale,
    })
}
