//! Run outputs: `metrics.json`, `actions.csv`, `tasks.csv` and the optional
//! `telemetry.csv`. All writers are deterministic byte-for-byte.

use std::path::Path;

use serde::Serialize;

use super::config::RunError;
use super::engine::{RunOutput, RunReport, TelemetrySample};
use super::task::TaskRecord;
use crate::policy::{Action, ActionRecord};

pub const ACTIONS_HEADER: &str = "time_s,app_id,action,d_f";
pub const TASKS_HEADER: &str = "app_id,task_id,length_mi,submit_s,deadline_s,slack,exec_start_s,\
proc_start_s,proc_end_s,progress_mi,last_checkpoint_mi,host,replica_host,status,checkpoints,\
migrations,recoveries,replications,deferred_actions,connection_s";
pub const TELEMETRY_HEADER: &str = "time_s,device_id,mobility,cpu,network,response,power";

#[derive(Serialize)]
struct ActionRow {
    time_s: f64,
    app_id: u32,
    action: Action,
    d_f: f64,
}

fn to_csv<T: Serialize>(header: &str, rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8");
    format!("{header}\n{body}")
}

pub fn actions_csv(actions: &[ActionRecord]) -> String {
    to_csv(
        ACTIONS_HEADER,
        actions.iter().map(|a| ActionRow {
            time_s: a.time_s,
            app_id: a.app_id,
            action: a.action,
            d_f: a.d_f,
        }),
    )
}

pub fn tasks_csv(tasks: &[TaskRecord]) -> String {
    to_csv(TASKS_HEADER, tasks)
}

pub fn telemetry_csv(samples: &[TelemetrySample]) -> String {
    to_csv(TELEMETRY_HEADER, samples)
}

pub fn metrics_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Writes the run's files into `dir`, creating it if needed.
pub fn write_run_outputs(dir: &Path, out: &RunOutput) -> Result<(), RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = vec![
        ("metrics.json", metrics_json(&out.report)),
        ("actions.csv", actions_csv(&out.actions)),
        ("tasks.csv", tasks_csv(&out.tasks)),
    ];
    if !out.telemetry.is_empty() {
        files.push(("telemetry.csv", telemetry_csv(&out.telemetry)));
    }
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(io(&p))?;
    }
    Ok(())
}
