//! Discrete recursions (SGD, D-SGD, annealed variants) and continuous flows
//! (gradient flow, distributed gradient flow).
//!
//! Every discrete update is synchronous: agent `n` reads only the snapshot of
//! the network at iteration `k`, so the order in which agents are updated
//! cannot change the result.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::consensus_error;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::noise::{
    draw_annealing_noise, draw_gradient_noise, sample_regression, stochastic_regression_gradient, Channel,
    GradientNoiseModel, RegressionData, RngStream,
};
use crate::objective::{AgentObjectives, Objective};
use crate::schedule::{StepWeights, ValidationReport, WeightTriple};

pub const DEFAULT_DIVERGENCE_RADIUS: f64 = 1e8;

/// Stacked agent estimates `(x_1, …, x_N)`, each in `R^dim`, plus the
/// iteration counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    dim: usize,
    states: Vec<f64>,
    k: u64,
}

impl NetworkState {
    pub fn zeros(n_agents: usize, dim: usize) -> Self {
        NetworkState { dim, states: vec![0.0; n_agents * dim], k: 0 }
    }

    /// Every agent starts at `point`.
    pub fn consensus(n_agents: usize, point: &[f64]) -> Self {
        NetworkState { dim: point.len(), states: point.repeat(n_agents), k: 0 }
    }

    pub fn from_agents(agents: &[Vec<f64>]) -> Result<Self> {
        let dim = agents.first().map(Vec::len).ok_or_else(|| Error::invalid("no agents"))?;
        if dim == 0 || agents.iter().any(|a| a.len() != dim) {
            return Err(Error::invalid("agent states must share a positive dimension"));
        }
        Ok(NetworkState { dim, states: agents.concat(), k: 0 })
    }

    pub fn from_flat(dim: usize, states: Vec<f64>, k: u64) -> Result<Self> {
        if dim == 0 || states.is_empty() || !states.len().is_multiple_of(dim) {
            return Err(Error::invalid("flat state length must be a positive multiple of dim"));
        }
        Ok(NetworkState { dim, states, k })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_agents(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn agent(&self, n: usize) -> &[f64] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    pub fn agents(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.states
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for a in self.agents() {
            m.iter_mut().zip(a).for_each(|(m, v)| *m += v);
        }
        let n = self.n_agents() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    pub fn is_finite(&self) -> bool {
        self.states.iter().all(|v| v.is_finite())
    }

    pub fn max_agent_norm(&self) -> f64 {
        self.agents().map(|a| a.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }
}

/// Where agent gradients come from.
#[derive(Debug, Clone)]
pub enum GradientSource {
    /// Analytic `∇f_n` plus additive noise `ξ_n(k)`.
    Objectives { agents: AgentObjectives, noise: GradientNoiseModel },
    /// Online regression: agent `n` draws one sample per iteration and uses
    /// `(1/N) ∇L` of it. The sampling noise is the only gradient noise.
    Regression { data: RegressionData, n_agents: usize },
}

impl GradientSource {
    pub fn n_agents(&self) -> usize {
        match self {
            GradientSource::Objectives { agents, .. } => agents.len(),
            GradientSource::Regression { n_agents, .. } => *n_agents,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GradientSource::Objectives { agents, .. } => agents.dim(),
            GradientSource::Regression { .. } => 1,
        }
    }

    /// Writes `∇f_n(x) + ξ_n(k)` into `out`.
    pub fn noisy_gradient(&self, agent: usize, x: &[f64], k: u64, stream: &RngStream, out: &mut [f64]) {
        match self {
            GradientSource::Objectives { agents, noise } => {
                agents.agent(agent).gradient(x, out);
                if !noise.is_none() {
                    let mut xi = vec![0.0; out.len()];
                    draw_gradient_noise(noise, stream, agent as u64, k, &mut xi);
                    out.iter_mut().zip(&xi).for_each(|(g, e)| *g += e);
                }
            }
            GradientSource::Regression { data, n_agents } => {
                let sample = sample_regression(data, stream, agent as u64, k);
                out[0] = stochastic_regression_gradient(x[0], &sample, *n_agents);
            }
        }
    }
}

/// How the network is initialized at the start of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Every agent at `point`.
    Point { point: Vec<f64> },
    /// Explicit per-agent states.
    Agents { states: Vec<Vec<f64>> },
    /// Coordinates drawn uniformly from `[low, high)`, per agent or, with
    /// `shared`, once for the whole network. Drawn from the run's init channel.
    Uniform {
        low: f64,
        high: f64,
        #[serde(default)]
        shared: bool,
    },
}

impl InitialCondition {
    pub fn resolve(&self, n_agents: usize, dim: usize, stream: &RngStream) -> Result<NetworkState> {
        let state = match self {
            InitialCondition::Point { point } => NetworkState::consensus(n_agents, point),
            InitialCondition::Agents { states } => {
                if states.len() != n_agents {
                    return Err(Error::config(format!(
                        "init lists {} agent states but the graph has {n_agents} vertices",
                        states.len()
                    )));
                }
                NetworkState::from_agents(states)?
            }
            InitialCondition::Uniform { low, high, shared } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::config(format!("uniform init needs low < high, got [{low}, {high})")));
                }
                let mut flat = Vec::with_capacity(n_agents * dim);
                for n in 0..n_agents {
                    let agent = if *shared { 0 } else { n as u64 };
                    let mut s = stream.substream(agent, 0, Channel::Init);
                    flat.extend((0..dim).map(|_| low + (high - low) * s.uniform()));
                }
                NetworkState::from_flat(dim, flat, 0)?
            }
        };
        if state.dim() != dim {
            return Err(Error::config(format!("initial state has dimension {}, objectives have {dim}", state.dim())));
        }
        Ok(state)
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: Arc<Graph>,
    pub source: GradientSource,
    pub weights: WeightTriple,
    pub steps: u64,
    pub init: InitialCondition,
    pub divergence_radius: f64,
    pub record_every: u64,
}

impl SimConfig {
    /// Structural checks; hard mismatches are errors, a disconnected graph is
    /// reported as a warning.
    pub fn check(&self) -> Result<ValidationReport> {
        if self.graph.n_vertices() != self.source.n_agents() {
            return Err(Error::config(format!(
                "graph has {} vertices but there are {} agent objectives",
                self.graph.n_vertices(),
                self.source.n_agents()
            )));
        }
        if self.steps == 0 {
            return Err(Error::config("steps must be >= 1"));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every must be >= 1"));
        }
        if !(self.divergence_radius > 0.0) {
            return Err(Error::config("divergence_radius must be positive"));
        }
        self.weights.validated().map_err(|e| Error::config(e.to_string()))?;
        let mut report = ValidationReport::default();
        if !self.graph.is_connected() {
            report.warn("communication graph must be undirected and connected; this one is disconnected");
        }
        Ok(report)
    }
}

/// Computes agent `n`'s next state from the snapshot `state` into `out`.
pub fn agent_update(
    n: usize,
    state: &NetworkState,
    graph: &Graph,
    source: &GradientSource,
    w: StepWeights,
    stream: &RngStream,
    out: &mut [f64],
) {
    let dim = state.dim();
    let x = state.agent(n);
    out.copy_from_slice(x);

    let neighbors = graph.neighbors(n);
    if !neighbors.is_empty() && w.beta != 0.0 {
        for j in 0..dim {
            let c: f64 = neighbors.iter().map(|&l| state.agent(l)[j] - x[j]).sum();
            out[j] += w.beta * c;
        }
    }

    let mut g = vec![0.0; dim];
    source.noisy_gradient(n, x, state.k(), stream, &mut g);
    out.iter_mut().zip(&g).for_each(|(o, g)| *o -= w.alpha * g);

    if w.gamma != 0.0 {
        let mut noise = vec![0.0; dim];
        draw_annealing_noise(stream, n as u64, state.k(), &mut noise);
        out.iter_mut().zip(&noise).for_each(|(o, z)| *o += w.gamma * z);
    }
}

/// One synchronous D-SGD (+ annealing, when `gamma_k > 0`) iteration.
/// Returns the next state and whether it diverged.
pub fn dsgd_step(state: &NetworkState, cfg: &SimConfig, stream: &RngStream) -> (NetworkState, bool) {
    let dim = state.dim();
    let w = cfg.weights.at_step(state.k());
    let mut next = vec![0.0; state.as_slice().len()];
    for (n, out) in next.chunks_exact_mut(dim).enumerate() {
        agent_update(n, state, &cfg.graph, &cfg.source, w, stream, out);
    }
    let next = NetworkState { dim, states: next, k: state.k() + 1 };
    let diverged = !next.is_finite() || next.max_agent_norm() > cfg.divergence_radius;
    (next, diverged)
}

/// Centralized SGD (+ annealing): `x ← x − α_k(∇f(x) + ξ(k)) + γ_k w(k)`,
/// drawing noise as agent 0. Uses `alpha` and `gamma` directly, with the
/// coupling of `weights` applied to `gamma`.
pub fn sgd_step(
    x: &[f64],
    k: u64,
    objective: &dyn Objective,
    noise: &GradientNoiseModel,
    weights: &WeightTriple,
    stream: &RngStream,
) -> Vec<f64> {
    let w = weights.at_step(k);
    let mut g = vec![0.0; x.len()];
    objective.gradient(x, &mut g);
    let mut xi = vec![0.0; x.len()];
    if !noise.is_none() {
        draw_gradient_noise(noise, stream, 0, k, &mut xi);
    }
    let mut next: Vec<f64> = x
        .iter()
        .zip(g.iter().zip(&xi))
        .map(|(x, (g, e))| x - w.alpha * if noise.is_none() { *g } else { g + e })
        .collect();
    if w.gamma != 0.0 {
        let mut z = vec![0.0; x.len()];
        draw_annealing_noise(stream, 0, k, &mut z);
        next.iter_mut().zip(&z).for_each(|(v, z)| *v += w.gamma * z);
    }
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub k: u64,
    pub states: Vec<f64>,
    pub consensus_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub dim: usize,
    pub samples: Vec<TrajectorySample>,
    pub final_state: NetworkState,
    pub diverged: bool,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_consensus_error(&self) -> f64 {
        consensus_error(&self.final_state)
    }

    /// Stable digest of every recorded number, for determinism checks.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.seed);
        eat(self.diverged as u64);
        for s in &self.samples {
            eat(s.k);
            s.states.iter().for_each(|v| eat(v.to_bits()));
            eat(s.consensus_error.to_bits());
        }
        self.final_state.as_slice().iter().for_each(|v| eat(v.to_bits()));
        h
    }
}

/// Runs `cfg.steps` iterations from the seeded initial condition. Divergence
/// stops the run early and is recorded, not raised.
pub fn run(cfg: &SimConfig, seed: u64) -> Result<Trajectory> {
    let report = cfg.check()?;
    let stream = RngStream::new(seed);
    let mut state = cfg.init.resolve(cfg.source.n_agents(), cfg.source.dim(), &stream)?;
    let record = |s: &NetworkState| TrajectorySample {
        k: s.k(),
        states: s.as_slice().to_vec(),
        consensus_error: consensus_error(s),
    };
    let mut samples = vec![record(&state)];
    let mut diverged = !state.is_finite() || state.max_agent_norm() > cfg.divergence_radius;
    while !diverged && state.k() < cfg.steps {
        let (next, div) = dsgd_step(&state, cfg, &stream);
        state = next;
        diverged = div;
        if !diverged && state.k() % cfg.record_every == 0 {
            samples.push(record(&state));
        }
    }
    Ok(Trajectory {
        seed,
        dim: state.dim(),
        samples,
        final_state: state,
        diverged,
        warnings: report.findings.into_iter().map(|f| f.message).collect(),
    })
}

/// Output of a fixed-step ODE integration.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Set when a non-finite state stopped the integration.
    pub halted: bool,
}

impl FlowTrajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

/// Classical RK4 with fixed step `h` from `t0` to `t_end`; the last step is
/// shortened to land on `t_end` exactly.
pub fn rk4<F>(mut field: F, x0: &[f64], t0: f64, t_end: f64, h: f64) -> Result<FlowTrajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(h > 0.0) || !(t_end > t0) {
        return Err(Error::invalid(format!("need h > 0 and t_end > t0, got h={h}, [{t0}, {t_end}]")));
    }
    let span = t_end - t0;
    let n = ((span / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let d = x0.len();
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(t0);
    states.push(x.clone());
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let dt = if i + 1 == n { t_end - t } else { h };
        field(t, &x, &mut k1);
        for j in 0..d {
            tmp[j] = x[j] + 0.5 * dt * k1[j];
        }
        field(t + 0.5 * dt, &tmp, &mut k2);
        for j in 0..d {
            tmp[j] = x[j] + 0.5 * dt * k2[j];
        }
        field(t + 0.5 * dt, &tmp, &mut k3);
        for j in 0..d {
            tmp[j] = x[j] + dt * k3[j];
        }
        field(t + dt, &tmp, &mut k4);
        for j in 0..d {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        times.push(if i + 1 == n { t_end } else { t + dt });
        let finite = x.iter().all(|v| v.is_finite());
        states.push(x.clone());
        if !finite {
            return Ok(FlowTrajectory { times, states, halted: true });
        }
    }
    Ok(FlowTrajectory { times, states, halted: false })
}

/// Gradient flow `ẋ = −∇f(x)` from `x0` over `[0, t_end]`.
pub fn gf_integrate(o: &dyn Objective, x0: &[f64], t_end: f64, h: f64) -> Result<FlowTrajectory> {
    if x0.len() != o.dim() {
        return Err(Error::invalid(format!("x0 has dimension {}, objective has {}", x0.len(), o.dim())));
    }
    rk4(
        |_, x, dx| {
            o.gradient(x, dx);
            dx.iter_mut().for_each(|v| *v = -*v);
        },
        x0,
        0.0,
        t_end,
        h,
    )
}

/// Distributed gradient flow `ẋ_n = β_t Σ_{ℓ∈Ω_n}(x_ℓ − x_n) − α_t ∇f_n(x_n)`
/// over `[t0, t_end]`. States in the result are flattened agent blocks.
pub fn dgf_integrate(
    graph: &Graph,
    agents: &AgentObjectives,
    weights: &WeightTriple,
    init: &NetworkState,
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<FlowTrajectory> {
    if graph.n_vertices() != agents.len() || init.n_agents() != agents.len() {
        return Err(Error::invalid("graph, objectives and initial state disagree on the number of agents"));
    }
    if init.dim() != agents.dim() {
        return Err(Error::invalid("initial state dimension does not match the objectives"));
    }
    if !(t0 >= 0.0) {
        return Err(Error::invalid(format!("t0 must be >= 0, got {t0}")));
    }
    let dim = init.dim();
    let mut grad = vec![0.0; dim];
    rk4(
        |t, x, dx| {
            let w = weights.at_time(t);
            graph.consensus_sum(x, dim, dx);
            for (n, (xn, dn)) in x.chunks_exact(dim).zip(dx.chunks_exact_mut(dim)).enumerate() {
                agents.agent(n).gradient(xn, &mut grad);
                for j in 0..dim {
                    dn[j] = w.beta * dn[j] - w.alpha * grad[j];
                }
            }
        },
        init.as_slice(),
        t0,
        t_end,
        h,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{CubicSaddle, QuadraticSaddle, Zero};
    use crate::schedule::Schedule;

    fn zero_source(n: usize, d: usize) -> GradientSource {
        GradientSource::Objectives {
            agents: AgentObjectives::split_evenly(Arc::new(Zero { d }), n).unwrap(),
            noise: GradientNoiseModel::None,
        }
    }

    fn constant_weights(alpha: f64, beta: f64) -> WeightTriple {
        WeightTriple::new(Schedule::constant(alpha).unwrap(), Schedule::constant(beta).unwrap(), Schedule::zero())
    }

    fn config(graph: Graph, source: GradientSource, weights: WeightTriple, init: InitialCondition) -> SimConfig {
        SimConfig {
            graph: Arc::new(graph),
            source,
            weights,
            steps: 10,
            init,
            divergence_radius: DEFAULT_DIVERGENCE_RADIUS,
            record_every: 1,
        }
    }

    #[test]
    fn two_agent_consensus_step() {
        let cfg = config(
            Graph::path(2).unwrap(),
            zero_source(2, 1),
            constant_weights(0.1, 0.5),
            InitialCondition::Agents { states: vec![vec![0.0], vec![2.0]] },
        );
        let s0 = cfg.init.resolve(2, 1, &RngStream::new(0)).unwrap();
        let (s1, div) = dsgd_step(&s0, &cfg, &RngStream::new(0));
        assert!(!div);
        assert_eq!(s1.as_slice(), &[1.0, 1.0]);
        assert_eq!(s1.k(), 1);
    }

    #[test]
    fn saddle_step_at_consensus() {
        let agents = AgentObjectives::split_evenly(Arc::new(QuadraticSaddle::new(2, 1).unwrap()), 2).unwrap();
        let cfg = config(
            Graph::path(2).unwrap(),
            GradientSource::Objectives { agents, noise: GradientNoiseModel::None },
            constant_weights(0.1, 3.7),
            InitialCondition::Point { point: vec![1.0, 1.0] },
        );
        let s0 = cfg.init.resolve(2, 2, &RngStream::new(0)).unwrap();
        let (s1, _) = dsgd_step(&s0, &cfg, &RngStream::new(0));
        for a in s1.agents() {
            assert!((a[0] - 0.95).abs() < 1e-15 && (a[1] - 1.05).abs() < 1e-15);
        }
    }

    #[test]
    fn single_agent_matches_sgd() {
        let noise = GradientNoiseModel::Gaussian { sigma: 0.3 };
        let f: Arc<dyn Objective> = Arc::new(CubicSaddle);
        let weights =
            WeightTriple::new(Schedule::power(0.05, 0.75).unwrap(), Schedule::constant(0.2).unwrap(), Schedule::zero());
        let cfg = SimConfig {
            steps: 50,
            ..config(
                Graph::from_edges(1, &[]).unwrap(),
                GradientSource::Objectives { agents: AgentObjectives::new(vec![f.clone()]).unwrap(), noise },
                weights,
                InitialCondition::Point { point: vec![0.2, -0.1] },
            )
        };
        let stream = RngStream::new(42);
        let mut s = cfg.init.resolve(1, 2, &stream).unwrap();
        let mut x = vec![0.2, -0.1];
        for k in 0..50 {
            s = dsgd_step(&s, &cfg, &stream).0;
            x = sgd_step(&x, k, f.as_ref(), &noise, &weights, &stream);
            assert_eq!(s.agent(0), x.as_slice());
        }
    }

    #[test]
    fn divergence_is_recorded() {
        let agents = AgentObjectives::split_evenly(Arc::new(QuadraticSaddle::new(2, 1).unwrap()), 4).unwrap();
        let cfg = SimConfig {
            steps: 10_000,
            ..config(
                Graph::cycle(4).unwrap(),
                GradientSource::Objectives { agents, noise: GradientNoiseModel::None },
                constant_weights(10.0, 0.1),
                InitialCondition::Point { point: vec![1.0, 0.0] },
            )
        };
        let t = run(&cfg, 1).unwrap();
        assert!(t.diverged);
        assert!(t.final_state.k() < 10_000);
    }

    #[test]
    fn sample_count() {
        let cfg = SimConfig {
            steps: 103,
            record_every: 10,
            ..config(
                Graph::cycle(3).unwrap(),
                zero_source(3, 1),
                constant_weights(0.1, 0.1),
                InitialCondition::Point { point: vec![1.0] },
            )
        };
        let t = run(&cfg, 0).unwrap();
        assert_eq!(t.samples.len(), 103 / 10 + 1);
        assert_eq!(t.final_state.k(), 103);
    }

    #[test]
    fn disconnected_graph_warns() {
        let cfg = config(
            Graph::from_edges(3, &[(0, 1)]).unwrap(),
            zero_source(3, 1),
            constant_weights(0.1, 0.1),
            InitialCondition::Point { point: vec![0.0] },
        );
        let t = run(&cfg, 0).unwrap();
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn mismatched_config_errors() {
        let cfg = config(
            Graph::cycle(4).unwrap(),
            zero_source(3, 1),
            constant_weights(0.1, 0.1),
            InitialCondition::Point { point: vec![0.0] },
        );
        assert!(matches!(run(&cfg, 0), Err(Error::Config(_))));
        let cfg = config(
            Graph::cycle(3).unwrap(),
            zero_source(3, 1),
            constant_weights(0.1, 0.1),
            InitialCondition::Point { point: vec![0.0, 1.0] },
        );
        assert!(matches!(run(&cfg, 0), Err(Error::Config(_))));
    }

    #[test]
    fn gradient_flow_from_equilibrium() {
        let t = gf_integrate(&CubicSaddle, &[0.0, 0.0], 5.0, 1e-2).unwrap();
        assert!(t.states.iter().all(|s| s == &[0.0, 0.0]));
        assert_eq!(*t.times.last().unwrap(), 5.0);
    }

    #[test]
    fn rk4_lands_on_end_time() {
        let t = rk4(|_, x, dx| dx[0] = x[0], &[1.0], 0.0, 1.05, 0.1).unwrap();
        assert_eq!(t.times.len(), 12);
        assert_eq!(*t.times.last().unwrap(), 1.05);
        assert!((t.last()[0] - 1.05f64.exp()).abs() < 1e-5);
        assert!(rk4(|_, _, _| {}, &[1.0], 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rk4_halts_on_blowup() {
        let t = rk4(|_, x, dx| dx[0] = x[0] * x[0], &[1.0], 0.0, 2.0, 0.01).unwrap();
        assert!(t.halted);
    }

    #[test]
    fn uniform_init_is_seeded() {
        let init = InitialCondition::Uniform { low: -1.0, high: 2.0, shared: false };
        let a = init.resolve(4, 1, &RngStream::new(3)).unwrap();
        let b = init.resolve(4, 1, &RngStream::new(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.as_slice().iter().all(|v| (-1.0..2.0).contains(v)));
        let shared =
            InitialCondition::Uniform { low: -1.0, high: 2.0, shared: true }.resolve(4, 1, &RngStream::new(3)).unwrap();
        assert!(shared.agents().all(|s| s == shared.agent(0)));
    }
}
