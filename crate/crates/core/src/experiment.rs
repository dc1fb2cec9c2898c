//! Monte Carlo orchestration and the CSV/JSON artifacts it emits.
//!
//! Run `i` of an experiment rooted at seed `s` always uses
//! [`run_seed`]`(s, i)`, and results are collected by run index, so the output
//! does not depend on the degree of parallelism.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{self, Anchor, BasinKind, BasinLabel, MonteCarloSummary, RunOutcome};
use crate::config::{ExperimentConfig, FlowMethod, FlowSpec};
use crate::engine::{run, FlowTrajectory, SimConfig, Trajectory};
use crate::error::{Error, Result};
use crate::noise::{run_seed, STREAM_VERSION};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Classification rule text embedded in every report.
pub fn classification_rule(radius: f64) -> String {
    format!("mean agent state labeled by the nearest anchor within distance {radius}; otherwise unresolved")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub outcomes: Vec<RunOutcome>,
    pub summary: MonteCarloSummary,
}

fn run_one(sim: &SimConfig, root_seed: u64, index: usize, anchors: &[Anchor], radius: f64) -> Result<RunOutcome> {
    let t = run(sim, run_seed(root_seed, index as u64))?;
    analysis::outcome(index, &t, anchors, radius)
}

/// Executes `runs` seeded runs on up to `jobs` threads.
pub fn run_experiment(
    sim: &SimConfig,
    root_seed: u64,
    runs: usize,
    jobs: usize,
    anchors: &[Anchor],
    radius: f64,
) -> Result<ExperimentResult> {
    if runs == 0 {
        return Err(Error::config("runs must be >= 1"));
    }
    sim.check()?;
    let outcomes = collect_outcomes(sim, root_seed, runs, jobs, anchors, radius)?;
    let summary = analysis::summarize(&outcomes)?;
    Ok(ExperimentResult { outcomes, summary })
}

#[cfg(feature = "parallel")]
fn collect_outcomes(
    sim: &SimConfig,
    root_seed: u64,
    runs: usize,
    jobs: usize,
    anchors: &[Anchor],
    radius: f64,
) -> Result<Vec<RunOutcome>> {
    use rayon::prelude::*;
    if jobs <= 1 {
        return (0..runs).map(|i| run_one(sim, root_seed, i, anchors, radius)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| (0..runs).into_par_iter().map(|i| run_one(sim, root_seed, i, anchors, radius)).collect())
}

#[cfg(not(feature = "parallel"))]
fn collect_outcomes(
    sim: &SimConfig,
    root_seed: u64,
    runs: usize,
    _jobs: usize,
    anchors: &[Anchor],
    radius: f64,
) -> Result<Vec<RunOutcome>> {
    (0..runs).map(|i| run_one(sim, root_seed, i, anchors, radius)).collect()
}

/// Anchors and radius from the config, or an empty set (every run is then
/// unresolved unless it diverged).
pub fn classification(cfg: &ExperimentConfig) -> (Vec<Anchor>, f64) {
    match &cfg.classify {
        Some(c) => (c.anchors.clone(), c.radius),
        None => (Vec::new(), f64::INFINITY),
    }
}

pub fn label_run(t: &Trajectory, anchors: &[Anchor], radius: f64) -> Result<BasinLabel> {
    if anchors.is_empty() {
        if t.diverged {
            return Ok(BasinLabel { label: BasinKind::Diverged, anchor: None, distance: f64::INFINITY });
        }
        return Ok(BasinLabel { label: BasinKind::Unresolved, anchor: None, distance: f64::INFINITY });
    }
    analysis::classify_basin(&t.final_state, t.diverged, anchors, radius)
}

/// Trajectory CSV: `k`, then `a{n}_x{j}` for every agent and coordinate, then
/// `consensus_error`.
pub fn write_trajectory_csv<W: Write>(mut w: W, t: &Trajectory) -> Result<()> {
    let n = t.final_state.n_agents();
    let mut header = vec!["k".to_string()];
    for a in 0..n {
        for j in 0..t.dim {
            header.push(format!("a{a}_x{j}"));
        }
    }
    header.push("consensus_error".into());
    writeln!(w, "{}", header.join(","))?;
    for s in &t.samples {
        let mut row = vec![s.k.to_string()];
        row.extend(s.states.iter().map(|v| v.to_string()));
        row.push(s.consensus_error.to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub schema_version: u32,
    pub kind: &'static str,
    pub seed: u64,
    pub config_fingerprint: String,
    pub stream_version: &'static str,
    pub csv_schema_version: u32,
    pub steps_completed: u64,
    pub diverged: bool,
    pub basin: &'a BasinLabel,
    pub classification_rule: String,
    pub final_mean: Vec<f64>,
    pub final_states: Vec<Vec<f64>>,
    pub final_consensus_error: f64,
    pub warnings: &'a [String],
}

pub fn run_report<'a>(cfg: &ExperimentConfig, t: &'a Trajectory, basin: &'a BasinLabel) -> RunReport<'a> {
    let (_, radius) = classification(cfg);
    RunReport {
        schema_version: SUMMARY_SCHEMA_VERSION,
        kind: "run",
        seed: t.seed,
        config_fingerprint: cfg.fingerprint(),
        stream_version: STREAM_VERSION,
        csv_schema_version: CSV_SCHEMA_VERSION,
        steps_completed: t.final_state.k(),
        diverged: t.diverged,
        basin,
        classification_rule: classification_rule(radius),
        final_mean: t.final_state.mean(),
        final_states: t.final_state.agents().map(<[f64]>::to_vec).collect(),
        final_consensus_error: t.final_consensus_error(),
        warnings: &t.warnings,
    }
}

/// Flow CSV: `t`, then `a{n}_x{j}` per agent block.
pub fn write_flow_csv<W: Write>(mut w: W, n_agents: usize, flow: &FlowTrajectory) -> Result<()> {
    let dim = flow.states[0].len() / n_agents.max(1);
    let mut header = vec!["t".to_string()];
    for a in 0..n_agents {
        header.extend((0..dim).map(|j| format!("a{a}_x{j}")));
    }
    writeln!(w, "{}", header.join(","))?;
    for (t, x) in flow.times.iter().zip(&flow.states) {
        let mut row = vec![t.to_string()];
        row.extend(x.iter().map(|v| v.to_string()));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct FlowReport {
    pub schema_version: u32,
    pub kind: &'static str,
    pub method: FlowMethod,
    pub config_fingerprint: String,
    pub csv_schema_version: u32,
    pub t_end: f64,
    pub h: f64,
    pub halted: bool,
    pub final_states: Vec<Vec<f64>>,
}

pub fn flow_report(cfg: &ExperimentConfig, spec: &FlowSpec, n_agents: usize, flow: &FlowTrajectory) -> FlowReport {
    let last = flow.last();
    let dim = last.len() / n_agents.max(1);
    FlowReport {
        schema_version: SUMMARY_SCHEMA_VERSION,
        kind: "flow",
        method: spec.method,
        config_fingerprint: cfg.fingerprint(),
        csv_schema_version: CSV_SCHEMA_VERSION,
        t_end: *flow.times.last().expect("non-empty"),
        h: spec.h,
        halted: flow.halted,
        final_states: last.chunks(dim.max(1)).map(<[f64]>::to_vec).collect(),
    }
}

#[derive(Debug, Serialize)]
pub struct ExperimentReport<'a> {
    pub schema_version: u32,
    pub kind: &'static str,
    pub root_seed: u64,
    pub config_fingerprint: String,
    pub stream_version: &'static str,
    pub csv_schema_version: u32,
    pub classification_rule: String,
    pub anchors: Vec<Anchor>,
    pub summary: &'a MonteCarloSummary,
}

pub fn experiment_report<'a>(cfg: &ExperimentConfig, summary: &'a MonteCarloSummary) -> ExperimentReport<'a> {
    let (anchors, radius) = classification(cfg);
    ExperimentReport {
        schema_version: SUMMARY_SCHEMA_VERSION,
        kind: "experiment",
        root_seed: cfg.run.seed,
        config_fingerprint: cfg.fingerprint(),
        stream_version: STREAM_VERSION,
        csv_schema_version: CSV_SCHEMA_VERSION,
        classification_rule: classification_rule(radius),
        anchors,
        summary,
    }
}

/// Per-run CSV: run index, seed, final mean coordinates, basin, final
/// consensus error.
pub fn write_runs_csv<W: Write>(mut w: W, outcomes: &[RunOutcome]) -> Result<()> {
    let dim = outcomes.first().map_or(0, |o| o.final_mean.len());
    let mut header = vec!["run".to_string(), "seed".to_string()];
    header.extend((0..dim).map(|j| format!("mean_x{j}")));
    header.push("basin".into());
    header.push("final_consensus_error".into());
    writeln!(w, "{}", header.join(","))?;
    for o in outcomes {
        let mut row = vec![o.index.to_string(), o.seed.to_string()];
        row.extend(o.final_mean.iter().map(|v| v.to_string()));
        row.push(o.basin.label.as_str().to_string());
        row.push(o.final_consensus_error.to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: String,
    pub global_rate: f64,
    pub local_rate: f64,
    pub diverged_rate: f64,
    pub mean_consensus_error: f64,
    pub summary: MonteCarloSummary,
}

/// Runs one experiment per value of the dotted config `parameter`. The path
/// must exist in `doc`.
pub fn sweep(
    doc: &toml::Table,
    base_overrides: &[(String, String)],
    parameter: &str,
    values: &[String],
    base_dir: &Path,
    seed_override: Option<u64>,
    jobs_override: Option<usize>,
) -> Result<Vec<SweepRow>> {
    let mut probe = doc.clone();
    crate::config::set_path(&mut probe, parameter, "0", false)?;
    let mut rows = Vec::with_capacity(values.len());
    for value in values {
        let mut overrides = base_overrides.to_vec();
        overrides.push((parameter.to_string(), value.clone()));
        let mut cfg = ExperimentConfig::from_document(doc.clone(), &overrides)?;
        if let Some(seed) = seed_override {
            cfg.run.seed = seed;
        }
        let sim = cfg.build_sim(base_dir)?;
        let (anchors, radius) = classification(&cfg);
        let jobs = jobs_override.unwrap_or(cfg.run.jobs as usize);
        if anchors.is_empty() {
            return Err(Error::config("a sweep needs a [classify] section"));
        }
        let result = run_experiment(&sim, cfg.run.seed, cfg.run.runs as usize, jobs, &anchors, radius)?;
        let s = result.summary;
        rows.push(SweepRow {
            value: value.clone(),
            global_rate: s.rate(BasinKind::Global),
            local_rate: s.rate(BasinKind::Local),
            diverged_rate: s.rate(BasinKind::Diverged),
            mean_consensus_error: s.mean_final_consensus_error,
            summary: s,
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(mut w: W, parameter: &str, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "{parameter},global_rate,local_rate,diverged_rate,mean_consensus_error")?;
    for r in rows {
        let value =
            if r.value.contains(',') { format!("\"{}\"", r.value.replace('"', "\"\"")) } else { r.value.clone() };
        writeln!(w, "{value},{},{},{},{}", r.global_rate, r.local_rate, r.diverged_rate, r.mean_consensus_error)?;
    }
    Ok(())
}
