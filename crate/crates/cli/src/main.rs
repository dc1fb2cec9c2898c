use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netgrad::config::{parse_override, ExperimentConfig};
use netgrad::engine::run;
use netgrad::experiment::{self, classification};
use netgrad::schedule::{Severity, ValidationMode};
use netgrad::Error;

#[derive(Parser)]
#[command(name = "netgrad", version, about = "Distributed gradient descent over communication graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One seeded run: trajectory CSV plus JSON summary.
    Run(Common),
    /// Independent seeded runs: per-run CSV plus JSON summary.
    Experiment(Common),
    /// One experiment per value of a config parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted config path, e.g. `weights.gamma.c` or `graph`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Parse and check a config without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Root seed, overriding `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// `path=value` override; may be repeated.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
    /// Worker threads, overriding `run.jobs`.
    #[arg(long)]
    jobs: Option<usize>,
    /// Report violated step-size conditions as warnings instead of errors.
    #[arg(long)]
    allow_offschedule: bool,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

struct Loaded {
    doc: toml::Table,
    overrides: Vec<(String, String)>,
    cfg: ExperimentConfig,
    base_dir: PathBuf,
    out_dir: PathBuf,
}

fn load(c: &Common) -> Result<Loaded, Failure> {
    let text =
        fs::read_to_string(&c.config).map_err(|e| Failure::Io(format!("cannot read {}: {e}", c.config.display())))?;
    let doc = ExperimentConfig::document(&text).map_err(|e| Failure::Config(format!("{}: {e}", c.config.display())))?;
    let mut overrides = Vec::new();
    for s in &c.set {
        let (k, v) = parse_override(s)?;
        overrides.push((k.to_string(), v.to_string()));
    }
    if let Some(jobs) = c.jobs {
        overrides.push(("run.jobs".into(), jobs.to_string()));
    }
    let mut cfg = ExperimentConfig::from_document(doc.clone(), &overrides)?;
    // Set after parsing: derived run seeds do not fit a TOML integer.
    if let Some(seed) = c.seed {
        cfg.run.seed = seed;
    }
    let base_dir = c.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let out_dir = c.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let mode = if c.allow_offschedule { ValidationMode::Permissive } else { cfg.run.validation };
    check(&cfg, &base_dir, mode)?;
    Ok(Loaded { doc, overrides, cfg, base_dir, out_dir })
}

fn check(cfg: &ExperimentConfig, base_dir: &Path, mode: ValidationMode) -> Result<(), Failure> {
    let report = cfg.validate(base_dir, mode)?;
    for f in &report.findings {
        let tag = match f.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        eprintln!("{tag}: {}", f.message);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Config("configuration failed validation (use --allow-offschedule to downgrade)".into()))
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_flow(l: &Loaded) -> Result<(), Failure> {
    let spec = l.cfg.flow.expect("caller checked");
    let (n_agents, flow) = l.cfg.integrate_flow(&l.base_dir)?;
    let mut w = create(&l.out_dir, "trajectory.csv")?;
    experiment::write_flow_csv(&mut w, n_agents, &flow)?;
    w.flush()?;
    let report = experiment::flow_report(&l.cfg, &spec, n_agents, &flow);
    write_json(&l.out_dir, "summary.json", &report)?;
    println!(
        "flow to t={}{}: final {:?}",
        report.t_end,
        if flow.halted { " (halted)" } else { "" },
        report.final_states[0]
    );
    Ok(())
}

fn cmd_run(c: &Common) -> Result<(), Failure> {
    let l = load(c)?;
    if l.cfg.flow.is_some() {
        return cmd_flow(&l);
    }
    let sim = l.cfg.build_sim(&l.base_dir)?;
    let t = run(&sim, l.cfg.run.seed)?;
    let (anchors, radius) = classification(&l.cfg);
    let basin = experiment::label_run(&t, &anchors, radius)?;

    let mut w = create(&l.out_dir, "trajectory.csv")?;
    experiment::write_trajectory_csv(&mut w, &t)?;
    w.flush()?;
    write_json(&l.out_dir, "summary.json", &experiment::run_report(&l.cfg, &t, &basin))?;

    println!(
        "seed {}: {} after {} steps{}, consensus error {:.3e}",
        t.seed,
        basin.label.as_str(),
        t.final_state.k(),
        if t.diverged { " (diverged)" } else { "" },
        t.final_consensus_error()
    );
    Ok(())
}

fn cmd_experiment(c: &Common) -> Result<(), Failure> {
    let l = load(c)?;
    let sim = l.cfg.build_sim(&l.base_dir)?;
    let (anchors, radius) = classification(&l.cfg);
    if anchors.is_empty() {
        return Err(Failure::Config("an experiment needs a [classify] section".into()));
    }
    let result = experiment::run_experiment(
        &sim,
        l.cfg.run.seed,
        l.cfg.run.runs as usize,
        l.cfg.run.jobs as usize,
        &anchors,
        radius,
    )?;
    let mut w = create(&l.out_dir, "runs.csv")?;
    experiment::write_runs_csv(&mut w, &result.outcomes)?;
    w.flush()?;
    write_json(&l.out_dir, "summary.json", &experiment::experiment_report(&l.cfg, &result.summary))?;

    let counts: Vec<String> = result.summary.counts.iter().map(|(k, v)| format!("{}={v}", k.as_str())).collect();
    println!("{} runs: {}", result.summary.runs, counts.join(" "));
    Ok(())
}

fn cmd_sweep(c: &Common, param: &str, values: &[String]) -> Result<(), Failure> {
    let l = load(c)?;
    let rows = experiment::sweep(&l.doc, &l.overrides, param, values, &l.base_dir, c.seed, c.jobs)?;
    let mut w = create(&l.out_dir, "sweep.csv")?;
    experiment::write_sweep_csv(&mut w, param, &rows)?;
    w.flush()?;
    for r in &rows {
        println!(
            "{param}={}: global {:.2} local {:.2} diverged {:.2}",
            r.value, r.global_rate, r.local_rate, r.diverged_rate
        );
    }
    Ok(())
}

fn cmd_validate(c: &Common) -> Result<(), Failure> {
    let l = load(c)?;
    println!("{}: ok (fingerprint {})", c.config.display(), l.cfg.fingerprint());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Experiment(c) => cmd_experiment(c),
        Command::Sweep { common, param, values } => cmd_sweep(common, param, values),
        Command::Validate(c) => cmd_validate(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
