//! Experiment configuration: a TOML document plus `path=value` overrides.
//!
//! ```toml
//! graph = "cycle4"                      # or "petersen", "pathN", "completeN",
//!                                       # { n = 3, edges = [[0, 1]] }, { edge_file = "g.txt" }
//! [problem]
//! objective = "robust_regression"       # registry name, e.g. "quadratic_saddle:d=2,q=1"
//! noise = { kind = "gaussian", sigma = 0.1 }
//! split = "even"                        # f_n = F/N; "replicate" gives f_n = F
//!
//! [weights]
//! coupling = "step-scaled"              # or "direct"
//! alpha = { law = "exponential", c = 0.01, r = 0.998 }
//! beta = { law = "constant", c = 4.0 }
//! gamma = { law = "exp-sqrt", c = 20.0, r = 0.9 }
//!
//! [init]
//! kind = "uniform"
//! low = -1.0
//! high = 2.0
//!
//! [run]
//! steps = 5000
//! seed = 7
//! runs = 100
//!
//! [classify]                            # optional; needed by experiment and sweep
//! radius = 0.25
//! anchors = [{ point = [0.7], label = "global" }, { point = [0.1], label = "local" }]
//!
//! [flow]                                # optional; `run` then integrates with RK4
//! method = "dgf"                        # or "gf" (centralized, on F)
//! t_end = 3.0
//! h = 1e-3
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::Anchor;
use crate::engine::{
    dgf_integrate, gf_integrate, FlowTrajectory, GradientSource, InitialCondition, SimConfig, DEFAULT_DIVERGENCE_RADIUS,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::noise::{GradientNoiseModel, RegressionData, RngStream};
use crate::objective::{self, AgentObjectives};
use crate::schedule::{
    check_constant_beta, validate_annealing, validate_dsgd, ValidationMode, ValidationReport, WeightTriple,
};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Named(String),
    Edges { n: usize, edges: Vec<(usize, usize)> },
    File { edge_file: PathBuf },
}

impl GraphSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Graph> {
        match self {
            GraphSpec::Named(name) => named_graph(name),
            GraphSpec::Edges { n, edges } => Graph::from_edges(*n, edges).map_err(|e| Error::config(e.to_string())),
            GraphSpec::File { edge_file } => {
                let path = base_dir.join(edge_file);
                let text = std::fs::read_to_string(&path)?;
                Graph::parse_edge_list(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
            }
        }
    }
}

/// Builds `cycleN`, `pathN`, `completeN` or `petersen`.
pub fn named_graph(name: &str) -> Result<Graph> {
    let sized = |prefix: &str| -> Option<Result<usize>> {
        name.strip_prefix(prefix).map(|rest| {
            rest.parse::<usize>()
                .map_err(|_| Error::config(format!("graph `{name}`: expected a size after `{prefix}`")))
        })
    };
    let g = if name == "petersen" {
        Ok(Graph::petersen())
    } else if let Some(n) = sized("cycle") {
        Graph::cycle(n?)
    } else if let Some(n) = sized("path") {
        Graph::path(n?)
    } else if let Some(n) = sized("complete") {
        Graph::complete(n?)
    } else {
        return Err(Error::config(format!("unknown graph `{name}`")));
    };
    g.map_err(|e| Error::config(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub objective: String,
    #[serde(default)]
    pub noise: GradientNoiseModel,
    /// Data law for `robust_regression`; defaults to the standard mixture.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<RegressionData>,
    #[serde(default)]
    pub split: Split,
}

/// How the registry objective `F` is shared among the agents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    /// `f_n = F / N`.
    #[default]
    Even,
    /// `f_n = F`.
    Replicate,
}

fn default_one() -> u64 {
    1
}

fn default_radius() -> f64 {
    DEFAULT_DIVERGENCE_RADIUS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// D-SGD iterations; unused by flows.
    #[serde(default)]
    pub steps: u64,
    #[serde(default = "default_one")]
    pub record_every: u64,
    #[serde(default = "default_radius")]
    pub divergence_radius: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_one")]
    pub runs: u64,
    #[serde(default = "default_one")]
    pub jobs: u64,
    #[serde(default)]
    pub validation: ValidationMode,
    #[serde(default)]
    pub ratio_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    pub radius: f64,
    pub anchors: Vec<Anchor>,
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_output_dir")]
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_output_dir() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub problem: ProblemSpec,
    pub weights: WeightTriple,
    pub init: InitialCondition,
    pub run: RunSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySpec>,
    #[serde(default)]
    pub output: OutputSpec,
    /// When present, `run` integrates the continuous-time flow instead of
    /// iterating D-SGD.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMethod {
    /// Centralized gradient flow on `F`.
    Gf,
    /// Distributed gradient flow over the graph.
    Dgf,
}

fn default_flow_step() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub method: FlowMethod,
    pub t_end: f64,
    #[serde(default = "default_flow_step")]
    pub h: f64,
    #[serde(default)]
    pub t0: f64,
}

/// Parses `raw` as a TOML value; bare words fall back to strings.
fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Sets the dotted `path` in `doc` to `raw`. Every segment must already exist
/// unless `create` is set, in which case only the parent must.
pub fn set_path(doc: &mut toml::Table, path: &str, raw: &str, create: bool) -> Result<()> {
    let segments: Vec<&str> = path.split('.').map(str::trim).collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::config(format!("malformed parameter path `{path}`")));
    }
    let (last, parents) = segments.split_last().expect("split yields at least one segment");
    let mut table = doc;
    for seg in parents {
        table = match table.get_mut(*seg) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(Error::config(format!("unknown parameter path `{path}` (no table `{seg}`)"))),
        };
    }
    if !create && !table.contains_key(*last) {
        return Err(Error::config(format!("unknown parameter path `{path}`")));
    }
    table.insert(last.to_string(), parse_value(raw));
    Ok(())
}

/// Splits a `path=value` override.
pub fn parse_override(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::config(format!("override `{s}` is not path=value")))
}

impl ExperimentConfig {
    /// Parses TOML text, then applies overrides in order. Errors in the text
    /// itself carry line and column.
    pub fn from_toml_with(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let doc = Self::document(text)?;
        Self::from_document(doc, overrides)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &[])
    }

    /// The raw document, checked against the schema.
    pub fn document(text: &str) -> Result<toml::Table> {
        toml::from_str::<ExperimentConfig>(text).map_err(|e| Error::config(e.to_string()))?;
        text.parse::<toml::Table>().map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_document(mut doc: toml::Table, overrides: &[(String, String)]) -> Result<Self> {
        for (path, value) in overrides {
            set_path(&mut doc, path, value, true)?;
        }
        let cfg: ExperimentConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(format!("after overrides: {e}")))?;
        cfg.weights.validated().map_err(|e| Error::config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    /// Short hex digest of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn build_graph(&self, base_dir: &Path) -> Result<Graph> {
        self.graph.build(base_dir)
    }

    pub fn build_source(&self, n_agents: usize) -> Result<GradientSource> {
        if self.problem.objective.trim() == "robust_regression" {
            if self.problem.split != Split::Even {
                return Err(Error::config("robust_regression always uses the 1/N per-agent share"));
            }
            if !self.problem.noise.is_none() {
                return Err(Error::config("robust_regression draws its own sampling noise; set problem.noise to none"));
            }
            let data = self.problem.data.unwrap_or_default();
            return Ok(GradientSource::Regression { data, n_agents });
        }
        if self.problem.data.is_some() {
            return Err(Error::config("problem.data only applies to robust_regression"));
        }
        let total = objective::from_registry(&self.problem.objective)?;
        let agents = match self.problem.split {
            Split::Even => AgentObjectives::split_evenly(total, n_agents)?,
            Split::Replicate => AgentObjectives::replicate(total, n_agents)?,
        };
        Ok(GradientSource::Objectives { agents, noise: self.problem.noise })
    }

    pub fn build_sim(&self, base_dir: &Path) -> Result<SimConfig> {
        let graph = self.build_graph(base_dir)?;
        let source = self.build_source(graph.n_vertices())?;
        Ok(SimConfig {
            graph: Arc::new(graph),
            source,
            weights: self.weights,
            steps: self.run.steps,
            init: self.init.clone(),
            divergence_radius: self.run.divergence_radius,
            record_every: self.run.record_every,
        })
    }

    /// Agent objectives without noise, for the flows.
    fn flow_agents(&self, n_agents: usize) -> Result<AgentObjectives> {
        let total: objective::SharedObjective = if self.problem.objective.trim() == "robust_regression" {
            Arc::new(objective::RegressionRisk::new(&self.problem.data.unwrap_or_default(), 1.0))
        } else {
            objective::from_registry(&self.problem.objective)?
        };
        match self.problem.split {
            Split::Even => AgentObjectives::split_evenly(total, n_agents),
            Split::Replicate => AgentObjectives::replicate(total, n_agents),
        }
    }

    /// Integrates the configured flow. Gradient flow runs on `F` from the
    /// first agent's initial state; states come back as one block per agent.
    pub fn integrate_flow(&self, base_dir: &Path) -> Result<(usize, FlowTrajectory)> {
        let spec = self.flow.ok_or_else(|| Error::config("config has no [flow] section"))?;
        let stream = RngStream::new(self.run.seed);
        match spec.method {
            FlowMethod::Gf => {
                let agents = self.flow_agents(1)?;
                let x0 = self.init.resolve(1, agents.dim(), &stream)?;
                Ok((1, gf_integrate(agents.agent(0), x0.agent(0), spec.t_end, spec.h)?))
            }
            FlowMethod::Dgf => {
                let graph = self.build_graph(base_dir)?;
                let n = graph.n_vertices();
                let agents = self.flow_agents(n)?;
                let x0 = self.init.resolve(n, agents.dim(), &stream)?;
                Ok((n, dgf_integrate(&graph, &agents, &self.weights, &x0, spec.t0, spec.t_end, spec.h)?))
            }
        }
    }

    /// Theory-side checks. In strict mode every violated assumption is an
    /// error; permissive mode reports them as warnings.
    pub fn validate(&self, base_dir: &Path, mode: ValidationMode) -> Result<ValidationReport> {
        let sim = self.build_sim(base_dir)?;
        let mut report = ValidationReport::default();
        match &self.flow {
            None => {
                sim.check()?;
            }
            Some(f) => {
                if !(f.h > 0.0 && f.t0 >= 0.0 && f.t_end > f.t0) {
                    return Err(Error::config("flow needs h > 0 and 0 <= t0 < t_end"));
                }
            }
        }
        if !sim.graph.is_connected() {
            let msg = "communication graph must be undirected and connected; this one is disconnected";
            match mode {
                ValidationMode::Strict => report
                    .findings
                    .push(crate::schedule::Finding { severity: crate::schedule::Severity::Error, message: msg.into() }),
                ValidationMode::Permissive => report.warn(msg),
            }
        }
        if self.weights.gamma.is_zero() {
            report.merge(validate_dsgd(&self.weights, mode));
        } else {
            report.merge(validate_annealing(&self.weights, self.run.ratio_floor, mode));
        }
        report.merge(check_constant_beta(&self.weights, &sim.graph));
        if self.run.runs == 0 {
            return Err(Error::config("run.runs must be >= 1"));
        }
        if self.run.jobs == 0 {
            return Err(Error::config("run.jobs must be >= 1"));
        }
        if let Some(c) = &self.classify {
            if !(c.radius > 0.0) || c.anchors.is_empty() {
                return Err(Error::config("classify needs a positive radius and at least one anchor"));
            }
            if c.anchors.iter().any(|a| a.point.len() != sim.source.dim()) {
                return Err(Error::config("classify anchors must match the problem dimension"));
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{Coupling, Schedule};

    const REGRESSION: &str = r#"
graph = "cycle4"

[problem]
objective = "robust_regression"

[weights]
coupling = "step-scaled"
alpha = { law = "exponential", c = 0.01, r = 0.998 }
beta = { law = "constant", c = 4.0 }
gamma = { law = "exp-sqrt", c = 20.0, r = 0.9 }

[init]
kind = "uniform"
low = -1.0
high = 2.0

[run]
steps = 5000
seed = 7
runs = 100
validation = "permissive"

[classify]
radius = 0.25
anchors = [{ point = [0.7], label = "global" }, { point = [0.1], label = "local" }]
"#;

    #[test]
    fn parses_regression_config() {
        let cfg = ExperimentConfig::from_toml(REGRESSION).unwrap();
        assert_eq!(cfg.graph, GraphSpec::Named("cycle4".into()));
        assert_eq!(cfg.weights.coupling, Coupling::StepScaled);
        assert_eq!(cfg.run.record_every, 1);
        let sim = cfg.build_sim(Path::new(".")).unwrap();
        assert_eq!(sim.graph.n_vertices(), 4);
        assert!(matches!(sim.source, GradientSource::Regression { n_agents: 4, .. }));
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml(REGRESSION).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.fingerprint(), again.fingerprint());
    }

    #[test]
    fn overrides_win() {
        let ov = vec![("weights.gamma.c".to_string(), "0".to_string()), ("graph".to_string(), "petersen".to_string())];
        let cfg = ExperimentConfig::from_toml_with(REGRESSION, &ov).unwrap();
        assert!(cfg.weights.gamma.is_zero());
        assert_eq!(cfg.graph, GraphSpec::Named("petersen".into()));
        let base = ExperimentConfig::from_toml(REGRESSION).unwrap();
        assert_ne!(cfg.fingerprint(), base.fingerprint());
    }

    #[test]
    fn unknown_paths_are_rejected() {
        let mut doc = ExperimentConfig::document(REGRESSION).unwrap();
        assert!(set_path(&mut doc, "weights.delta.c", "1", false).is_err());
        assert!(set_path(&mut doc, "weights.gamma.c", "1", false).is_ok());
        assert!(set_path(&mut doc, "weights..c", "1", false).is_err());
        assert!(set_path(&mut doc, "run.stepz", "1", false).is_err());
    }

    #[test]
    fn bad_config_reports_line() {
        let broken = REGRESSION.replace("steps = 5000", "steps = \"many\"");
        let err = ExperimentConfig::from_toml(&broken).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn strict_validation() {
        let cfg = ExperimentConfig::from_toml(REGRESSION).unwrap();
        assert!(!cfg.validate(Path::new("."), ValidationMode::Strict).unwrap().passed());
        assert!(cfg.validate(Path::new("."), ValidationMode::Permissive).unwrap().passed());

        let disconnected = vec![("graph".to_string(), "{ n = 4, edges = [[0, 1], [2, 3]] }".to_string())];
        let mut cfg = ExperimentConfig::from_toml_with(REGRESSION, &disconnected).unwrap();
        cfg.weights = WeightTriple::new(
            Schedule::power(0.1, 0.75).unwrap(),
            Schedule::power(0.1, 0.25).unwrap(),
            Schedule::zero(),
        );
        let report = cfg.validate(Path::new("."), ValidationMode::Strict).unwrap();
        assert!(!report.passed());
        assert!(report.errors().any(|f| f.message.contains("undirected and connected")));
    }

    #[test]
    fn named_graphs() {
        assert_eq!(named_graph("cycle5").unwrap().n_vertices(), 5);
        assert_eq!(named_graph("complete4").unwrap().edge_count(), 6);
        assert_eq!(named_graph("path3").unwrap().edge_count(), 2);
        assert!(named_graph("cycle").is_err());
        assert!(named_graph("torus").is_err());
    }
}
