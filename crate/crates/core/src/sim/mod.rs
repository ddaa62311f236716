//! Discrete-event simulation of tasks on failing fog devices.
//!
//! Events are processed in `(time, insertion sequence)` order. Trace
//! failures are queued before anything else, so a failure and another event
//! at the same instant resolve with the failure first.

pub mod config;
pub mod engine;
pub mod output;
pub mod queue;
pub mod task;

pub use config::{
    load_trace, window_trace, DeviceConfig, DeviceFailure, LoadedTrace, Overheads, RampWindows,
    RunConfig, RunError, TraceConfig, TraceSource, WorkloadConfig,
};
pub use engine::{run, run_with_trace, schedule, RunOutput, RunReport, SlotView, TelemetrySample};
pub use output::{
    actions_csv, metrics_json, tasks_csv, telemetry_csv, write_run_outputs, ACTIONS_HEADER,
    TASKS_HEADER, TELEMETRY_HEADER,
};
pub use queue::{EventKind, EventQueue, SimEvent};
pub use task::{generate_workload, TaskRecord, TaskStatus};
