use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use fogft_core::experiment::{self, ExperimentPlan};
use fogft_core::fuzzy::ScorerPair;
use fogft_core::policy::{action_band, PolicyKind, FAILURE_SENTINEL};
use fogft_core::sim::{self, RunConfig, RunError};
use fogft_core::trace::{self, TraceError, TraceSet};

// Like `println!` but returns the write error, so a closed pipe ends the
// command instead of panicking.
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(io::stdout().lock(), $($arg)*)?
    };
}

#[derive(Parser)]
#[command(name = "fogft", version, about = "Fog failure-handling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a JSON config.
    Run(RunArgs),
    /// Run a policy × trace × seed grid and write comparison reports.
    Compare(CompareArgs),
    /// Score one telemetry reading and print the resulting action.
    Score(ScoreArgs),
    /// Trace tooling.
    #[command(subcommand)]
    Trace(TraceCommand),
    /// Print both scorers (variables and rule bases) as JSON.
    DumpRules,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    policy: Option<PolicyKind>,
    #[arg(long)]
    tasks: Option<u32>,
    /// Output directory.
    #[arg(long, env = "FOGFT_OUT_DIR", default_value = "fogft-out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    plan: PathBuf,
    /// Output directory; overrides the plan's.
    #[arg(long, env = "FOGFT_OUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long, value_parser = percent)]
    mobility: f64,
    #[arg(long, value_parser = percent)]
    response: f64,
    #[arg(long, value_parser = percent)]
    power: f64,
    #[arg(long, value_parser = percent)]
    cpu: f64,
    #[arg(long, value_parser = percent)]
    network: f64,
    /// The hosting device has failed.
    #[arg(long)]
    fail: bool,
}

fn percent(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=100.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 100]"))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Lanl,
    Normalized,
}

#[derive(Subcommand)]
enum TraceCommand {
    /// Convert a trace to the normalized CSV format.
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value = "lanl")]
        format: TraceFormat,
        /// Keep only the nodes with the most failures.
        #[arg(long)]
        top_n_failing: Option<usize>,
    },
    /// Generate a synthetic trace in the normalized CSV format.
    Synth {
        output: PathBuf,
        #[arg(long)]
        nodes: u32,
        #[arg(long)]
        span_s: i64,
        #[arg(long)]
        mtbf_s: f64,
        #[arg(long)]
        mttr_s: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print summary statistics of a trace as JSON.
    Stats {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "normalized")]
        format: TraceFormat,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_input_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn is_input_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<RunError>()
            .is_some_and(RunError::is_input_error)
            || c.downcast_ref::<TraceError>().is_some()
    })
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Score(a) => cmd_score(a),
        Command::Trace(t) => cmd_trace(t),
        Command::DumpRules => {
            out!(
                "{}",
                serde_json::to_string_pretty(&ScorerPair::<f64>::default())?
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    let mut cfg = RunConfig::from_path(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(p) = a.policy {
        cfg.policy.kind = p;
    }
    if let Some(n) = a.tasks {
        cfg.workload.tasks = n;
    }
    let out = sim::run(&cfg)?;
    sim::write_run_outputs(&a.out, &out)?;
    let m = &out.report.metrics;
    out!(
        "policy={} seed={} tasks={} avg_delay_s={} total_processing_s={} total_cost={} failed={} actions={} out={}",
        cfg.policy.kind,
        cfg.seed,
        m.tasks,
        m.avg_delay_s.map_or("-".to_string(), |v| format!("{v:.3}")),
        format_args!("{:.3}", m.total_processing_s),
        format_args!("{:.9}", m.total_cost),
        m.failed,
        out.actions.len(),
        a.out.display()
    );
    if out.violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &out.violations {
            eprintln!("invariant violation: {v}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_compare(a: CompareArgs) -> Result<ExitCode> {
    let mut plan = ExperimentPlan::from_path(&a.plan)?;
    if let Some(o) = a.out {
        plan.output_dir = Some(o);
    }
    let errs = plan.validate();
    if !errs.is_empty() {
        return Err(RunError::Config(errs).into());
    }
    let dir = plan
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("fogft-out"));
    plan.output_dir = Some(dir.clone());
    let results = plan.run();
    experiment::write_reports(&dir, &results)?;
    for imp in experiment::improvements(&results) {
        out!(
            "{} vs {} {}: {}",
            imp.trace,
            imp.baseline,
            imp.metric,
            imp.improvement_pct
                .map_or("n/a".to_string(), |p| format!("{p:.1}%"))
        );
    }
    let failed: Vec<_> = results.iter().filter(|r| r.outcome.is_err()).collect();
    out!(
        "{} cells, {} failed, reports in {}",
        results.len(),
        failed.len(),
        dir.display()
    );
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for r in failed {
            eprintln!(
                "cell {} {} {} failed: {}",
                r.cell.policy,
                r.cell.trace,
                r.cell.seed,
                r.outcome.as_ref().unwrap_err()
            );
        }
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_score(a: ScoreArgs) -> Result<ExitCode> {
    let scorers = ScorerPair::<f64>::default();
    let mrp = scorers.mrp_score(a.mobility, a.response, a.power)?;
    let cpmnr = scorers.cpmnr_score(a.cpu, a.power, a.mobility, a.network, a.response)?;
    let d_f = if a.fail {
        FAILURE_SENTINEL
    } else {
        mrp.max(cpmnr)
    };
    out!(
        "mrp={mrp} cpmnr={cpmnr} d_f={d_f} action={}",
        action_band(d_f)
    );
    Ok(ExitCode::SUCCESS)
}

fn read_trace(path: &Path, format: TraceFormat) -> Result<TraceSet> {
    Ok(match format {
        TraceFormat::Normalized => trace::parse_normalized_csv(path)?,
        TraceFormat::Lanl => {
            let parsed = trace::parse_lanl(path)?;
            if parsed.dropped > 0 {
                eprintln!("dropped {} rows with end <= start", parsed.dropped);
            }
            parsed.traces
        }
    })
}

fn cmd_trace(cmd: TraceCommand) -> Result<ExitCode> {
    match cmd {
        TraceCommand::Convert {
            input,
            output,
            format,
            top_n_failing,
        } => {
            let mut set = read_trace(&input, format)?;
            if let Some(n) = top_n_failing {
                set = set.top_n_failing(n);
            }
            trace::to_normalized_csv(&set, &output)?;
            out!(
                "{} events, {} nodes -> {}",
                set.len(),
                set.roster().len(),
                output.display()
            );
        }
        TraceCommand::Synth {
            output,
            nodes,
            span_s,
            mtbf_s,
            mttr_s,
            seed,
        } => {
            let set = trace::synthesize(nodes, span_s, mtbf_s, mttr_s, seed)?;
            trace::to_normalized_csv(&set, &output)?;
            out!(
                "{} events, {} nodes -> {}",
                set.len(),
                nodes,
                output.display()
            );
        }
        TraceCommand::Stats { input, format } => {
            let set = read_trace(&input, format)?;
            out!("{}", serde_json::to_string_pretty(&set.stats())?);
        }
    }
    Ok(ExitCode::SUCCESS)
}
