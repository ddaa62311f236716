//! Policy × trace × seed grids and their comparison reports.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::improvement_pct;
use crate::policy::PolicyKind;
use crate::sim::{self, RunConfig, RunError, RunReport, TraceConfig};

pub const COMPARISON_HEADER: &str =
    "policy,trace,avg_delay,max_delay,min_delay,total_ptime,total_cost,failed";
pub const LONG_HEADER: &str = "policy,trace,seed,metric,value";
pub const IMPROVEMENTS_HEADER: &str =
    "trace,baseline,metric,baseline_value,flbfh_value,improvement_pct";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedTrace {
    pub name: String,
    pub trace: TraceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub base: RunConfig,
    pub policies: Vec<PolicyKind>,
    pub traces: Vec<NamedTrace>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Also write each cell's metrics/actions/tasks files.
    #[serde(default)]
    pub write_cell_outputs: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub policy: PolicyKind,
    pub trace: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub outcome: Result<RunReport, String>,
}

impl ExperimentPlan {
    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut plan: Self =
            serde_json::from_str(&text).map_err(|e| RunError::Config(vec![e.to_string()]))?;
        if let Some(dir) = path.parent() {
            plan.base.resolve_paths(dir);
            for t in &mut plan.traces {
                let mut c = RunConfig {
                    trace: t.trace.clone(),
                    ..RunConfig::default()
                };
                c.resolve_paths(dir);
                t.trace = c.trace;
            }
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut e = Vec::new();
        if self.policies.is_empty() || self.traces.is_empty() || self.seeds.is_empty() {
            e.push("plan needs at least one policy, one trace and one seed".to_string());
        }
        let dup = |n: usize, u: usize, what: &str, e: &mut Vec<String>| {
            if n != u {
                e.push(format!("duplicate {what} in plan"));
            }
        };
        dup(
            self.policies.len(),
            self.policies.iter().collect::<BTreeSet<_>>().len(),
            "policies",
            &mut e,
        );
        dup(
            self.traces.len(),
            self.traces
                .iter()
                .map(|t| &t.name)
                .collect::<BTreeSet<_>>()
                .len(),
            "trace names",
            &mut e,
        );
        dup(
            self.seeds.len(),
            self.seeds.iter().collect::<BTreeSet<_>>().len(),
            "seeds",
            &mut e,
        );
        for t in &self.traces {
            let cfg = self.cell_config(&Cell {
                policy: self.policies.first().copied().unwrap_or(PolicyKind::None),
                trace: t.name.clone(),
                seed: 0,
            });
            e.extend(
                cfg.validate()
                    .into_iter()
                    .map(|m| format!("trace `{}`: {m}", t.name)),
            );
        }
        e
    }

    /// Cells in `(policy, trace, seed)` order as listed in the plan.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &policy in &self.policies {
            for t in &self.traces {
                for &seed in &self.seeds {
                    out.push(Cell {
                        policy,
                        trace: t.name.clone(),
                        seed,
                    });
                }
            }
        }
        out
    }

    pub fn cell_config(&self, cell: &Cell) -> RunConfig {
        let mut cfg = self.base.clone();
        cfg.seed = cell.seed;
        cfg.policy.kind = cell.policy;
        if let Some(t) = self.traces.iter().find(|t| t.name == cell.trace) {
            cfg.trace = t.trace.clone();
        }
        cfg
    }

    /// Runs every cell concurrently. A failing cell is recorded and does not
    /// stop the others; results come back in [`ExperimentPlan::cells`] order.
    pub fn run(&self) -> Vec<CellResult> {
        let out_dir = self.output_dir.clone().filter(|_| self.write_cell_outputs);
        self.cells()
            .into_par_iter()
            .map(|cell| {
                let cfg = self.cell_config(&cell);
                let outcome = sim::run(&cfg).and_then(|out| {
                    if let Some(dir) = &out_dir {
                        let name = format!("{}_{}_{}", cell.policy, cell.trace, cell.seed);
                        sim::write_run_outputs(&dir.join("cells").join(name), &out)?;
                    }
                    Ok(out.report)
                });
                CellResult {
                    cell,
                    outcome: outcome.map_err(|e| e.to_string()),
                }
            })
            .collect()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per successful cell.
pub fn comparison_csv(results: &[CellResult]) -> String {
    let mut s = format!("{COMPARISON_HEADER}\n");
    for r in results {
        let Ok(rep) = &r.outcome else { continue };
        let m = &rep.metrics;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.cell.policy,
            r.cell.trace,
            fmt_opt(m.avg_delay_s),
            fmt_opt(m.max_delay_s),
            fmt_opt(m.min_delay_s),
            m.total_processing_s,
            m.total_cost,
            m.failed
        ));
    }
    s
}

fn long_metrics(rep: &RunReport) -> Vec<(&'static str, Option<f64>)> {
    let m = &rep.metrics;
    vec![
        ("avg_delay", m.avg_delay_s),
        ("max_delay", m.max_delay_s),
        ("min_delay", m.min_delay_s),
        ("avg_ptime", m.avg_processing_s),
        ("total_ptime", Some(m.total_processing_s)),
        ("total_cost", Some(m.total_cost)),
        ("messaging_cost", Some(m.messaging_cost)),
        ("connectivity_cost", Some(m.connectivity_cost)),
        ("failed", Some(m.failed as f64)),
        ("checkpoints", Some(m.checkpoints as f64)),
        ("migrations", Some(m.migrations as f64)),
        ("recoveries", Some(m.recoveries as f64)),
        ("replications", Some(m.replications as f64)),
    ]
}

/// Plot-ready `policy,trace,seed,metric,value` rows.
pub fn long_csv(results: &[CellResult]) -> String {
    let mut s = format!("{LONG_HEADER}\n");
    for r in results {
        let Ok(rep) = &r.outcome else { continue };
        for (metric, v) in long_metrics(rep) {
            s.push_str(&format!(
                "{},{},{},{metric},{}\n",
                r.cell.policy,
                r.cell.trace,
                r.cell.seed,
                fmt_opt(v)
            ));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Improvement {
    pub trace: String,
    pub baseline: PolicyKind,
    pub metric: &'static str,
    pub baseline_value: f64,
    pub flbfh_value: f64,
    pub improvement_pct: Option<f64>,
}

fn mean_metric(
    results: &[CellResult],
    policy: PolicyKind,
    trace: &str,
    metric: &str,
) -> Option<f64> {
    let vals: Vec<f64> = results
        .iter()
        .filter(|r| r.cell.policy == policy && r.cell.trace == trace)
        .filter_map(|r| r.outcome.as_ref().ok())
        .filter_map(|rep| long_metrics(rep).into_iter().find(|(m, _)| *m == metric)?.1)
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// FLBFH against every other policy, per trace, on seed-averaged metrics:
/// `(baseline - flbfh) / baseline * 100`.
pub fn improvements(results: &[CellResult]) -> Vec<Improvement> {
    let mut traces: Vec<&str> = Vec::new();
    let mut baselines: Vec<PolicyKind> = Vec::new();
    for r in results {
        if !traces.contains(&r.cell.trace.as_str()) {
            traces.push(&r.cell.trace);
        }
        if r.cell.policy != PolicyKind::Flbfh && !baselines.contains(&r.cell.policy) {
            baselines.push(r.cell.policy);
        }
    }
    let mut out = Vec::new();
    for trace in traces {
        for &baseline in &baselines {
            for metric in ["avg_delay", "total_ptime", "total_cost", "failed"] {
                let (Some(b), Some(f)) = (
                    mean_metric(results, baseline, trace, metric),
                    mean_metric(results, PolicyKind::Flbfh, trace, metric),
                ) else {
                    continue;
                };
                out.push(Improvement {
                    trace: trace.to_string(),
                    baseline,
                    metric,
                    baseline_value: b,
                    flbfh_value: f,
                    improvement_pct: improvement_pct(b, f),
                });
            }
        }
    }
    out
}

pub fn improvements_csv(rows: &[Improvement]) -> String {
    let mut s = format!("{IMPROVEMENTS_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.trace,
            r.baseline,
            r.metric,
            r.baseline_value,
            r.flbfh_value,
            fmt_opt(r.improvement_pct)
        ));
    }
    s
}

/// Writes `comparison.csv`, `long.csv`, `improvements.csv` and, when any
/// cell failed, `errors.txt`.
pub fn write_reports(dir: &Path, results: &[CellResult]) -> Result<(), RunError> {
    let io = |p: &Path| {
        let path = p.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = vec![
        ("comparison.csv", comparison_csv(results)),
        ("long.csv", long_csv(results)),
        ("improvements.csv", improvements_csv(&improvements(results))),
    ];
    let errors: String = results
        .iter()
        .filter_map(|r| {
            let e = r.outcome.as_ref().err()?;
            Some(format!(
                "{} {} {}: {e}\n",
                r.cell.policy, r.cell.trace, r.cell.seed
            ))
        })
        .collect();
    if !errors.is_empty() {
        files.push(("errors.txt", errors));
    }
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(io(&p))?;
    }
    Ok(())
}
