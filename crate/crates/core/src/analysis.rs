//! Diagnostics: consensus error, basin labels, stable subspaces of quadratic
//! models, Gibbs-density quadrature and Monte Carlo tallies.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::engine::{NetworkState, Trajectory};
use crate::error::{Error, Result};
use crate::objective::Objective;

/// Largest pairwise distance `max_{n,ℓ} ‖x_n − x_ℓ‖`.
pub fn consensus_error(state: &NetworkState) -> f64 {
    let agents: Vec<&[f64]> = state.agents().collect();
    let mut worst = 0.0f64;
    for (i, a) in agents.iter().enumerate() {
        for b in &agents[i + 1..] {
            let d2: f64 = a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum();
            worst = worst.max(d2);
        }
    }
    worst.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasinKind {
    Global,
    Local,
    SaddleRegion,
    Diverged,
    Unresolved,
}

impl BasinKind {
    pub const ALL: [BasinKind; 5] =
        [BasinKind::Global, BasinKind::Local, BasinKind::SaddleRegion, BasinKind::Diverged, BasinKind::Unresolved];

    pub fn as_str(&self) -> &'static str {
        match self {
            BasinKind::Global => "global",
            BasinKind::Local => "local",
            BasinKind::SaddleRegion => "saddle-region",
            BasinKind::Diverged => "diverged",
            BasinKind::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    pub point: Vec<f64>,
    pub label: BasinKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinLabel {
    pub label: BasinKind,
    /// Index of the matched anchor, if any.
    pub anchor: Option<usize>,
    /// Distance from the mean state to the nearest anchor.
    pub distance: f64,
}

/// Labels a point by its nearest anchor within `radius`.
pub fn classify_point(point: &[f64], anchors: &[Anchor], radius: f64) -> Result<BasinLabel> {
    if anchors.is_empty() {
        return Err(Error::invalid("basin classification needs at least one anchor"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("classification radius must be positive, got {radius}")));
    }
    let (idx, distance) = anchors
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let d2: f64 = a.point.iter().zip(point).map(|(u, v)| (u - v) * (u - v)).sum();
            (i, d2.sqrt())
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("anchors is non-empty");
    if distance <= radius {
        Ok(BasinLabel { label: anchors[idx].label, anchor: Some(idx), distance })
    } else {
        Ok(BasinLabel { label: BasinKind::Unresolved, anchor: None, distance })
    }
}

/// Labels a finished run by the mean of its agent states.
pub fn classify_basin(
    final_state: &NetworkState,
    diverged: bool,
    anchors: &[Anchor],
    radius: f64,
) -> Result<BasinLabel> {
    if diverged {
        return Ok(BasinLabel { label: BasinKind::Diverged, anchor: None, distance: f64::INFINITY });
    }
    classify_point(&final_state.mean(), anchors, radius)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StableSubspace {
    /// `d × (d − q)` orthonormal basis.
    pub basis: DMatrix<f64>,
    /// The eigenvalues belonging to the basis columns, in the same order.
    pub eigenvalues: Vec<f64>,
    /// Number of eigenvalues below `−eig_tol`.
    pub q: usize,
}

impl StableSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Span of the eigenvectors of symmetric `a` with eigenvalue `≥ −eig_tol`:
/// the stable subspace of the linear flow `ẋ = −Ax`.
pub fn stable_subspace(a: &DMatrix<f64>, eig_tol: Option<f64>) -> Result<StableSubspace> {
    if !a.is_square() {
        return Err(Error::invalid("matrix must be square"));
    }
    let asym = (a - a.transpose()).abs().max();
    if asym > 1e-12 * (1.0 + a.abs().max()) {
        return Err(Error::invalid("matrix must be symmetric"));
    }
    let eig = SymmetricEigen::new(a.clone());
    let radius = eig.eigenvalues.abs().max();
    let tol = eig_tol.unwrap_or(1e-8 * (1.0 + radius));
    let keep: Vec<usize> = (0..a.nrows()).filter(|&i| eig.eigenvalues[i] >= -tol).collect();
    let q = a.nrows() - keep.len();
    let basis = DMatrix::from_fn(a.nrows(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
    let eigenvalues = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok(StableSubspace { basis, eigenvalues, q })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsDensity {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub step: f64,
}

impl GibbsDensity {
    /// Trapezoidal mass of the density on `[center − radius, center + radius]`.
    pub fn mass_near(&self, center: f64, radius: f64) -> f64 {
        let inside = |x: f64| (x - center).abs() <= radius + 1e-12;
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .filter(|(g, _)| inside(g[0]) && inside(g[1]))
            .map(|(_, p)| 0.5 * (p[0] + p[1]) * self.step)
            .sum()
    }

    /// Trapezoidal total mass (1 up to rounding).
    pub fn total_mass(&self) -> f64 {
        self.density.windows(2).map(|p| 0.5 * (p[0] + p[1]) * self.step).sum()
    }
}

/// Normalized density `∝ exp(−2f(x)/ε²)` on the grid `low, low + step, …, high`.
/// `f` is shifted by its grid minimum before exponentiating.
pub fn gibbs_measure_1d(o: &dyn Objective, epsilon: f64, low: f64, high: f64, step: f64) -> Result<GibbsDensity> {
    if o.dim() != 1 {
        return Err(Error::invalid("Gibbs quadrature needs a one-dimensional objective"));
    }
    if !(epsilon > 0.0) || !(step > 0.0) || !(high > low) {
        return Err(Error::invalid("need epsilon > 0, step > 0 and high > low"));
    }
    let n = ((high - low) / step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| low + i as f64 * step).collect();
    let values: Vec<f64> = grid.iter().map(|&x| o.value(&[x])).collect();
    let fmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !fmin.is_finite() {
        return Err(Error::DegenerateDensity);
    }
    let scale = 2.0 / (epsilon * epsilon);
    let mut density: Vec<f64> = values.iter().map(|v| (-(v - fmin) * scale).exp()).collect();
    let z: f64 = density.windows(2).map(|p| 0.5 * (p[0] + p[1]) * step).sum();
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::DegenerateDensity);
    }
    density.iter_mut().for_each(|p| *p /= z);
    Ok(GibbsDensity { grid, density, step })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub index: usize,
    pub seed: u64,
    pub final_mean: Vec<f64>,
    pub basin: BasinLabel,
    pub final_consensus_error: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub runs: usize,
    pub counts: BTreeMap<BasinKind, usize>,
    pub seeds: Vec<u64>,
    pub mean_final_consensus_error: f64,
    pub max_final_consensus_error: f64,
}

impl MonteCarloSummary {
    pub fn count(&self, kind: BasinKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn rate(&self, kind: BasinKind) -> f64 {
        self.count(kind) as f64 / self.runs as f64
    }
}

pub fn outcome(index: usize, t: &Trajectory, anchors: &[Anchor], radius: f64) -> Result<RunOutcome> {
    Ok(RunOutcome {
        index,
        seed: t.seed,
        final_mean: t.final_state.mean(),
        basin: classify_basin(&t.final_state, t.diverged, anchors, radius)?,
        final_consensus_error: t.final_consensus_error(),
        diverged: t.diverged,
    })
}

/// Tallies per-run outcomes (in the given order).
pub fn summarize(outcomes: &[RunOutcome]) -> Result<MonteCarloSummary> {
    if outcomes.is_empty() {
        return Err(Error::invalid("aggregation needs at least one run"));
    }
    let mut counts: BTreeMap<BasinKind, usize> = BasinKind::ALL.iter().map(|&k| (k, 0)).collect();
    for o in outcomes {
        *counts.entry(o.basin.label).or_default() += 1;
    }
    let errors: Vec<f64> = outcomes.iter().filter(|o| !o.diverged).map(|o| o.final_consensus_error).collect();
    let (mean, max) = if errors.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (errors.iter().sum::<f64>() / errors.len() as f64, errors.iter().copied().fold(0.0, f64::max))
    };
    Ok(MonteCarloSummary {
        runs: outcomes.len(),
        counts,
        seeds: outcomes.iter().map(|o| o.seed).collect(),
        mean_final_consensus_error: mean,
        max_final_consensus_error: max,
    })
}

pub fn aggregate(runs: &[Trajectory], anchors: &[Anchor], radius: f64) -> Result<MonteCarloSummary> {
    let outcomes = runs.iter().enumerate().map(|(i, t)| outcome(i, t, anchors, radius)).collect::<Result<Vec<_>>>()?;
    summarize(&outcomes)
}
