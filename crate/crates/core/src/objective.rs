//! Objective functions, their sums over agents, and critical-point tools.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::RegressionData;

/// A smooth map `R^d -> R` with an analytic gradient and, optionally, Hessian.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes `∇f(x)` into `out` (length `dim`).
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    fn name(&self) -> String;
}

pub type SharedObjective = Arc<dyn Objective>;

pub fn gradient_vec(o: &dyn Objective, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; o.dim()];
    o.gradient(x, &mut g);
    g
}

/// `½ xᵀAx` with `A = diag(+1 × (d−q), −1 × q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadraticSaddle {
    d: usize,
    q: usize,
}

impl QuadraticSaddle {
    pub fn new(d: usize, q: usize) -> Result<Self> {
        if d == 0 || q == 0 || q > d {
            return Err(Error::invalid(format!("quadratic saddle needs 1 <= q <= d, got d={d}, q={q}")));
        }
        Ok(QuadraticSaddle { d, q })
    }

    fn sign(&self, i: usize) -> f64 {
        if i < self.d - self.q {
            1.0
        } else {
            -1.0
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_fn(self.d, |i, _| self.sign(i)))
    }
}

impl Objective for QuadraticSaddle {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().enumerate().map(|(i, v)| self.sign(i) * v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (i, (o, v)) in out.iter_mut().zip(x).enumerate() {
            *o = self.sign(i) * v;
        }
    }

    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(self.matrix())
    }

    fn name(&self) -> String {
        format!("quadratic_saddle:d={},q={}", self.d, self.q)
    }
}

/// `x₁² − x₂² + x₁²x₂ + x₁x₂²`, a regular saddle at the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct CubicSaddle;

impl Objective for CubicSaddle {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        a * a - b * b + a * a * b + a * b * b
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let (a, b) = (x[0], x[1]);
        out[0] = 2.0 * a + 2.0 * a * b + b * b;
        out[1] = -2.0 * b + a * a + 2.0 * a * b;
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let (a, b) = (x[0], x[1]);
        let off = 2.0 * a + 2.0 * b;
        Some(DMatrix::from_row_slice(2, 2, &[2.0 + 2.0 * b, off, off, -2.0 + 2.0 * a]))
    }

    fn name(&self) -> String {
        "cubic_saddle".into()
    }
}

/// `w⁴ − w² + 0.3w`: two wells of different depth, the deeper one at `w ≈ −0.7727`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleWell;

impl Objective for DoubleWell {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        let w = x[0];
        w.powi(4) - w * w + 0.3 * w
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let w = x[0];
        out[0] = 4.0 * w.powi(3) - 2.0 * w + 0.3;
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, 12.0 * x[0] * x[0] - 2.0))
    }

    fn name(&self) -> String {
        "double_well_1d".into()
    }
}

/// `¼x₁⁴ − ½x₁² + ½x₂²`: a saddle at the origin confined by a quartic, with
/// minima at `(±1, 0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuarticSaddle;

impl Objective for QuarticSaddle {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.25 * x[0].powi(4) - 0.5 * x[0] * x[0] + 0.5 * x[1] * x[1]
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[0].powi(3) - x[0];
        out[1] = x[1];
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_row_slice(2, 2, &[3.0 * x[0] * x[0] - 1.0, 0.0, 0.0, 1.0]))
    }

    fn name(&self) -> String {
        "quartic_saddle".into()
    }
}

/// The identically-zero function on `R^d`.
#[derive(Debug, Clone, Copy)]
pub struct Zero {
    pub d: usize,
}

impl Objective for Zero {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn gradient(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::zeros(self.d, self.d))
    }

    fn name(&self) -> String {
        format!("zero:d={}", self.d)
    }
}

/// `factor · f`.
#[derive(Debug, Clone)]
pub struct Scaled {
    inner: SharedObjective,
    factor: f64,
}

impl Scaled {
    pub fn new(inner: SharedObjective, factor: f64) -> Self {
        Scaled { inner, factor }
    }
}

impl Objective for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.value(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.inner.gradient(x, out);
        out.iter_mut().for_each(|g| *g *= self.factor);
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.inner.hessian(x).map(|h| h * self.factor)
    }

    fn name(&self) -> String {
        format!("{}*{}", self.factor, self.inner.name())
    }
}

/// Robust regression loss `log(8(y − ŷ)² + 1)`.
pub fn robust_loss(y: f64, y_hat: f64) -> f64 {
    let r = y - y_hat;
    (8.0 * r * r + 1.0).ln()
}

/// Population risk `scale · E[log(8(wx − y)² + 1)]` of the scalar model
/// `ŷ = wx`, approximated by composite Simpson quadrature over `x` and the
/// Gaussian residual. Deterministic, so value, gradient and Hessian are the
/// exact derivatives of one another.
#[derive(Debug, Clone)]
pub struct RegressionRisk {
    scale: f64,
    /// (weight, x, y) triples of the product rule.
    nodes: Vec<(f64, f64, f64)>,
}

impl RegressionRisk {
    const X_INTERVALS: usize = 120;
    const NOISE_INTERVALS: usize = 140;
    const NOISE_HALF_WIDTH: f64 = 7.0;

    pub fn new(data: &RegressionData, scale: f64) -> Self {
        let xs = simpson(data.x_low, data.x_high, Self::X_INTERVALS);
        let half = Self::NOISE_HALF_WIDTH * data.noise_std;
        let eps = simpson(-half, half, Self::NOISE_INTERVALS);
        let norm = 1.0 / (data.noise_std * (2.0 * std::f64::consts::PI).sqrt());
        let x_density = 1.0 / (data.x_high - data.x_low);
        let mut nodes = Vec::with_capacity(xs.len() * eps.len() * 2);
        for &(wx, x) in &xs {
            for &(we, e) in &eps {
                let pe = norm * (-0.5 * (e / data.noise_std).powi(2)).exp();
                let base = wx * x_density * we * pe;
                nodes.push((base * data.mix_p, x, data.slopes.0 * x + e));
                nodes.push((base * (1.0 - data.mix_p), x, data.slopes.1 * x + e));
            }
        }
        RegressionRisk { scale, nodes }
    }
}

fn simpson(a: f64, b: f64, intervals: usize) -> Vec<(f64, f64)> {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (w * h / 3.0, a + i as f64 * h)
        })
        .collect()
}

impl Objective for RegressionRisk {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        let w = x[0];
        self.scale * self.nodes.iter().map(|&(c, xi, yi)| c * robust_loss(yi, w * xi)).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let w = x[0];
        out[0] = self.scale
            * self
                .nodes
                .iter()
                .map(|&(c, xi, yi)| {
                    let r = w * xi - yi;
                    c * 16.0 * xi * r / (8.0 * r * r + 1.0)
                })
                .sum::<f64>();
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let w = x[0];
        let h = self
            .nodes
            .iter()
            .map(|&(c, xi, yi)| {
                let r = w * xi - yi;
                let q = 8.0 * r * r + 1.0;
                c * 16.0 * xi * xi * (1.0 - 8.0 * r * r) / (q * q)
            })
            .sum::<f64>();
        Some(DMatrix::from_element(1, 1, self.scale * h))
    }

    fn name(&self) -> String {
        "robust_regression".into()
    }
}

/// Per-agent objectives `f_1..f_N` of a common dimension; their sum is `F`.
#[derive(Debug, Clone)]
pub struct AgentObjectives {
    agents: Vec<SharedObjective>,
}

impl AgentObjectives {
    pub fn new(agents: Vec<SharedObjective>) -> Result<Self> {
        let first = agents.first().ok_or_else(|| Error::invalid("need at least one agent objective"))?;
        let d = first.dim();
        if agents.iter().any(|a| a.dim() != d) {
            return Err(Error::invalid("agent objectives differ in dimension"));
        }
        Ok(AgentObjectives { agents })
    }

    /// `f_n = F / N` for every agent.
    pub fn split_evenly(total: SharedObjective, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("need at least one agent"));
        }
        let share: SharedObjective = Arc::new(Scaled::new(total, 1.0 / n as f64));
        Self::new(vec![share; n])
    }

    /// `f_n = F` for every agent, so the network objective is `N·F`.
    pub fn replicate(total: SharedObjective, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("need at least one agent"));
        }
        Self::new(vec![total; n])
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.agents[0].dim()
    }

    pub fn agent(&self, n: usize) -> &dyn Objective {
        self.agents[n].as_ref()
    }

    pub fn sum_value(&self, x: &[f64]) -> f64 {
        self.agents.iter().map(|a| a.value(x)).sum()
    }

    pub fn sum_gradient(&self, x: &[f64], out: &mut [f64]) {
        let mut buf = vec![0.0; out.len()];
        out.fill(0.0);
        for a in &self.agents {
            a.gradient(x, &mut buf);
            out.iter_mut().zip(&buf).for_each(|(o, g)| *o += g);
        }
    }
}

/// Parses a registry name such as `quadratic_saddle:d=2,q=1` or `cubic_saddle`.
pub fn from_registry(spec: &str) -> Result<SharedObjective> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), a.trim()),
        None => (spec.trim(), ""),
    };
    let mut params = Vec::new();
    for kv in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| Error::config(format!("objective parameter `{kv}` is not key=value")))?;
        params.push((k.trim(), v.trim()));
    }
    let int = |key: &str| -> Result<usize> {
        params
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| Error::config(format!("objective `{name}` needs parameter `{key}`")))?
            .1
            .parse()
            .map_err(|_| Error::config(format!("objective parameter `{key}` must be an integer")))
    };
    let known = |allowed: &[&str]| -> Result<()> {
        match params.iter().find(|(k, _)| !allowed.contains(k)) {
            Some((k, _)) => Err(Error::config(format!("objective `{name}` has no parameter `{k}`"))),
            None => Ok(()),
        }
    };
    let o: SharedObjective = match name {
        "quadratic_saddle" => {
            known(&["d", "q"])?;
            Arc::new(QuadraticSaddle::new(int("d")?, int("q")?).map_err(|e| Error::config(e.to_string()))?)
        }
        "cubic_saddle" => {
            known(&[])?;
            Arc::new(CubicSaddle)
        }
        "double_well_1d" => {
            known(&[])?;
            Arc::new(DoubleWell)
        }
        "quartic_saddle" => {
            known(&[])?;
            Arc::new(QuarticSaddle)
        }
        "zero" => {
            known(&["d"])?;
            Arc::new(Zero { d: int("d")? })
        }
        "robust_regression" => {
            known(&[])?;
            Arc::new(RegressionRisk::new(&RegressionData::default(), 1.0))
        }
        other => return Err(Error::config(format!("unknown objective `{other}`"))),
    };
    Ok(o)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKind {
    LocalMin,
    LocalMax,
    RegularSaddle,
    Degenerate,
    NotCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointClass {
    pub kind: CriticalKind,
    /// Number of negative Hessian eigenvalues.
    pub q: usize,
    pub min_abs_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub grad_tol: f64,
    /// `None` selects `1e-8 · (1 + spectral radius)`.
    pub eig_tol: Option<f64>,
    pub finite_difference_fallback: bool,
    pub fd_step: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { grad_tol: 1e-6, eig_tol: None, finite_difference_fallback: true, fd_step: 1e-5 }
    }
}

/// Central-difference Hessian from the analytic gradient, symmetrized.
pub fn finite_difference_hessian(o: &dyn Objective, x: &[f64], h: f64) -> DMatrix<f64> {
    let d = o.dim();
    let mut hess = DMatrix::zeros(d, d);
    let mut xp = x.to_vec();
    let mut gp = vec![0.0; d];
    let mut gm = vec![0.0; d];
    for j in 0..d {
        xp[j] = x[j] + h;
        o.gradient(&xp, &mut gp);
        xp[j] = x[j] - h;
        o.gradient(&xp, &mut gm);
        xp[j] = x[j];
        for i in 0..d {
            hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    (&hess + hess.transpose()) * 0.5
}

pub fn classify(o: &dyn Objective, x: &[f64], opts: &ClassifyOptions) -> Result<CriticalPointClass> {
    let grad = gradient_vec(o, x);
    let hess = match o.hessian(x) {
        Some(h) => h,
        None if opts.finite_difference_fallback => finite_difference_hessian(o, x, opts.fd_step),
        None => return Err(Error::Unsupported(format!("{} has no Hessian", o.name()))),
    };
    let eig = SymmetricEigen::new(hess).eigenvalues;
    let min_abs = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let radius = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eig_tol = opts.eig_tol.unwrap_or(1e-8 * (1.0 + radius));
    let q = eig.iter().filter(|&&v| v < -eig_tol).count();
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let d = o.dim();
    let kind = if norm > opts.grad_tol {
        CriticalKind::NotCritical
    } else if min_abs <= eig_tol {
        CriticalKind::Degenerate
    } else if q == 0 {
        CriticalKind::LocalMin
    } else if q == d {
        CriticalKind::LocalMax
    } else {
        CriticalKind::RegularSaddle
    };
    Ok(CriticalPointClass { kind, q, min_abs_eigenvalue: min_abs })
}

/// Max over coordinates of `|analytic − central difference| / max(1, |analytic|)`.
pub fn check_gradient(o: &dyn Objective, x: &[f64], h: f64) -> f64 {
    let g = gradient_vec(o, x);
    let mut xp = x.to_vec();
    let mut worst = 0.0f64;
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = o.value(&xp);
        xp[j] = x[j] - h;
        let fm = o.value(&xp);
        xp[j] = x[j];
        let numeric = (fp - fm) / (2.0 * h);
        worst = worst.max((g[j] - numeric).abs() / g[j].abs().max(1.0));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> ClassifyOptions {
        ClassifyOptions::default()
    }

    #[test]
    fn quadratic_saddle_examples() {
        let f = QuadraticSaddle::new(2, 1).unwrap();
        assert_eq!(gradient_vec(&f, &[1.0, 1.0]), vec![1.0, -1.0]);
        let c = classify(&f, &[0.0, 0.0], &opts()).unwrap();
        assert_eq!((c.kind, c.q), (CriticalKind::RegularSaddle, 1));
        let h = QuadraticSaddle::new(4, 2).unwrap().hessian(&[3.0; 4]).unwrap();
        assert_eq!(h, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0])));
        assert!(QuadraticSaddle::new(2, 3).is_err());
        assert!(QuadraticSaddle::new(2, 0).is_err());
        let c = classify(&QuadraticSaddle::new(3, 2).unwrap(), &[0.0; 3], &opts()).unwrap();
        assert_eq!((c.kind, c.q), (CriticalKind::RegularSaddle, 2));
        let c = classify(&f, &[1.0, 1.0], &opts()).unwrap();
        assert_eq!(c.kind, CriticalKind::NotCritical);
        let c = classify(&QuadraticSaddle::new(2, 2).unwrap(), &[0.0; 2], &opts()).unwrap();
        assert_eq!((c.kind, c.q), (CriticalKind::LocalMax, 2));
    }

    #[test]
    fn cubic_saddle_examples() {
        assert_eq!(gradient_vec(&CubicSaddle, &[0.0, 0.0]), vec![0.0, 0.0]);
        let c = classify(&CubicSaddle, &[0.0, 0.0], &opts()).unwrap();
        assert_eq!((c.kind, c.q), (CriticalKind::RegularSaddle, 1));
        assert_eq!(CubicSaddle.value(&[1.0, 1.0]), 2.0);
        assert!(check_gradient(&CubicSaddle, &[1.0, 2.0], 1e-5) < 1e-6);
    }

    fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(|i| lo + i as f64 * step).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap()
    }

    #[test]
    fn double_well_examples() {
        assert_eq!(gradient_vec(&DoubleWell, &[0.0]), vec![0.3]);
        let f = |w: f64| DoubleWell.value(&[w]);
        let global = grid_argmin(f, -2.0, 2.0, 1e-6);
        // Root of 4w³ − 2w + 0.3 in the left well.
        assert!((global + 0.772_699).abs() < 1e-4, "{global}");
        let other = grid_argmin(f, 0.2, 2.0, 1e-6);
        assert!(f(global) < f(other));
        let c = classify(&DoubleWell, &[global], &ClassifyOptions { grad_tol: 1e-4, ..opts() }).unwrap();
        assert_eq!((c.kind, c.q), (CriticalKind::LocalMin, 0));

        // Local max: bisect the gradient on the bracket between the wells.
        let g = |w: f64| 4.0 * w.powi(3) - 2.0 * w + 0.3;
        let (mut a, mut b) = (0.0, 0.5);
        assert!(g(a) > 0.0 && g(b) < 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        let c = classify(&DoubleWell, &[a], &opts()).unwrap();
        assert_eq!((c.kind, c.q), (CriticalKind::LocalMax, 1));
    }

    #[test]
    fn regression_loss_values() {
        assert_eq!(robust_loss(1.0, 1.0), 0.0);
        assert!((robust_loss(1.0, 0.0) - 9f64.ln()).abs() < 1e-15);
        assert!((robust_loss(1.0, 0.0) - 2.19722).abs() < 1e-5);
    }

    #[test]
    fn regression_risk_minimizers() {
        let risk = RegressionRisk::new(&RegressionData::default(), 1.0);
        let f = |w: f64| risk.value(&[w]);
        let local = grid_argmin(f, -0.2, 0.4, 1e-3);
        let global = grid_argmin(f, 0.4, 1.2, 1e-3);
        assert!((local - 0.1).abs() < 0.1, "local minimizer {local}");
        assert!((global - 0.7).abs() < 0.1, "global minimizer {global}");
        assert!(f(global) < f(local));
        assert_eq!(
            classify(&risk, &[local], &ClassifyOptions { grad_tol: 1e-2, ..opts() }).unwrap().kind,
            CriticalKind::LocalMin
        );
    }

    #[test]
    fn fd_fallback_and_unsupported() {
        #[derive(Debug)]
        struct NoHess;
        impl Objective for NoHess {
            fn dim(&self) -> usize {
                2
            }
            fn value(&self, x: &[f64]) -> f64 {
                QuadraticSaddle::new(2, 1).unwrap().value(x)
            }
            fn gradient(&self, x: &[f64], out: &mut [f64]) {
                QuadraticSaddle::new(2, 1).unwrap().gradient(x, out)
            }
            fn name(&self) -> String {
                "no-hessian".into()
            }
        }
        let c = classify(&NoHess, &[0.0, 0.0], &opts()).unwrap();
        assert_eq!((c.kind, c.q), (CriticalKind::RegularSaddle, 1));
        let strict = ClassifyOptions { finite_difference_fallback: false, ..opts() };
        assert!(matches!(classify(&NoHess, &[0.0, 0.0], &strict), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_objective_gradient_check() {
        assert_eq!(check_gradient(&Zero { d: 3 }, &[1.0, 2.0, 3.0], 1e-5), 0.0);
        assert!(check_gradient(&QuadraticSaddle::new(2, 1).unwrap(), &[0.3, -0.7], 1e-5) < 1e-8);
    }

    #[test]
    fn registry_names() {
        assert_eq!(from_registry("quadratic_saddle:d=2,q=1").unwrap().name(), "quadratic_saddle:d=2,q=1");
        assert_eq!(from_registry("cubic_saddle").unwrap().dim(), 2);
        assert_eq!(from_registry("double_well_1d").unwrap().dim(), 1);
        assert_eq!(from_registry("robust_regression").unwrap().dim(), 1);
        assert!(from_registry("quadratic_saddle:d=2").is_err());
        assert!(from_registry("cubic_saddle:d=2").is_err());
        assert!(from_registry("rosenbrock").is_err());
    }

    #[test]
    fn split_sums_to_total() {
        let agents = AgentObjectives::split_evenly(Arc::new(CubicSaddle), 4).unwrap();
        for x in [[0.3, -1.2], [4.0, 2.5], [-3.0, 0.1]] {
            let total = CubicSaddle.value(&x);
            assert!((agents.sum_value(&x) - total).abs() <= 1e-12 * (1.0 + total.abs()));
        }
    }
}
