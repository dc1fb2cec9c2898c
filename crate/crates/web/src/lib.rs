//! Browser bindings for the `www/` demo page.
//!
//! Each export is a thin wrapper over a plain function of the same name with a
//! `_impl` suffix, which native tests exercise directly.

use std::sync::Arc;

use netgrad::analysis::{gibbs_measure_1d, Anchor, BasinKind};
use netgrad::config::named_graph;
use netgrad::engine::{gf_integrate, GradientSource, InitialCondition, SimConfig};
use netgrad::experiment::run_experiment;
use netgrad::noise::RegressionData;
use netgrad::objective::{from_registry, DoubleWell};
use netgrad::schedule::{Coupling, Schedule, WeightTriple};
use wasm_bindgen::prelude::*;

const FLOW_OBJECTIVES: [&str; 3] = ["quadratic_saddle:d=2,q=1", "cubic_saddle", "quartic_saddle"];

/// Gradient flow of a bundled 2-D objective from `(x0, y0)`. Returns
/// interleaved `x, y` pairs sampled every `stride` RK4 steps.
pub fn gradient_flow_impl(objective: &str, x0: f64, y0: f64, t_end: f64, stride: usize) -> Result<Vec<f64>, String> {
    if !FLOW_OBJECTIVES.contains(&objective) {
        return Err(format!("objective must be one of {FLOW_OBJECTIVES:?}"));
    }
    let o = from_registry(objective).map_err(|e| e.to_string())?;
    let flow = gf_integrate(o.as_ref(), &[x0, y0], t_end, 1e-3).map_err(|e| e.to_string())?;
    let stride = stride.max(1);
    let mut out = Vec::with_capacity(2 * flow.states.len() / stride + 2);
    for (i, x) in flow.states.iter().enumerate() {
        if i % stride == 0 || i + 1 == flow.states.len() {
            if !(x[0].is_finite() && x[1].is_finite()) || x[0].hypot(x[1]) > 1e3 {
                break;
            }
            out.extend_from_slice(x);
        }
    }
    Ok(out)
}

/// Normalized density `∝ exp(−2f/ε²)` of the tilted double well on
/// `[-2, 2]`, as interleaved `w, density` pairs.
pub fn gibbs_density_impl(epsilon: f64) -> Result<Vec<f64>, String> {
    let g = gibbs_measure_1d(&DoubleWell, epsilon, -2.0, 2.0, 4e-3).map_err(|e| e.to_string())?;
    Ok(g.grid.iter().zip(&g.density).flat_map(|(w, p)| [*w, *p]).collect())
}

/// The regression experiment: `runs` seeded runs of 5000 steps. Returns
/// `[global, local, unresolved, diverged]` counts followed by each run's final
/// mean weight.
pub fn regression_experiment_impl(graph: &str, gamma_c: f64, runs: u32, seed: u32) -> Result<Vec<f64>, String> {
    let graph = named_graph(graph).map_err(|e| e.to_string())?;
    let n = graph.n_vertices();
    let gamma =
        if gamma_c > 0.0 { Schedule::exp_sqrt(gamma_c, 0.9).map_err(|e| e.to_string())? } else { Schedule::zero() };
    let sim = SimConfig {
        graph: Arc::new(graph),
        source: GradientSource::Regression { data: RegressionData::default(), n_agents: n },
        weights: WeightTriple::new(
            Schedule::exponential(0.01, 0.998).map_err(|e| e.to_string())?,
            Schedule::constant(4.0).map_err(|e| e.to_string())?,
            gamma,
        )
        .with_coupling(Coupling::StepScaled),
        steps: 5000,
        init: InitialCondition::Uniform { low: -1.0, high: 2.0, shared: false },
        divergence_radius: 1e8,
        record_every: 5000,
    };
    let anchors =
        [Anchor { point: vec![0.7], label: BasinKind::Global }, Anchor { point: vec![0.1], label: BasinKind::Local }];
    let r = run_experiment(&sim, seed as u64, runs.max(1) as usize, 1, &anchors, 0.25).map_err(|e| e.to_string())?;
    let s = &r.summary;
    let mut out: Vec<f64> = [BasinKind::Global, BasinKind::Local, BasinKind::Unresolved, BasinKind::Diverged]
        .iter()
        .map(|k| s.count(*k) as f64)
        .collect();
    out.extend(r.outcomes.iter().map(|o| o.final_mean[0]));
    Ok(out)
}

#[wasm_bindgen]
pub fn gradient_flow(objective: &str, x0: f64, y0: f64, t_end: f64, stride: usize) -> Result<Vec<f64>, JsValue> {
    gradient_flow_impl(objective, x0, y0, t_end, stride).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn gibbs_density(epsilon: f64) -> Result<Vec<f64>, JsValue> {
    gibbs_density_impl(epsilon).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn regression_experiment(graph: &str, gamma_c: f64, runs: u32, seed: u32) -> Result<Vec<f64>, JsValue> {
    regression_experiment_impl(graph, gamma_c, runs, seed).map_err(|e| JsValue::from_str(&e))
}
