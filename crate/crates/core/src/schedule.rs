//! Weight sequences for the gradient, consensus and annealing terms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Smallest index offset for the annealing law; `log log (k + k0)` must be
/// positive, which needs `k + k0 > e^e ≈ 15.15`.
pub const ANNEALING_MIN_OFFSET: u64 = 16;

fn default_power_offset() -> u64 {
    1
}

fn default_annealing_offset() -> u64 {
    ANNEALING_MIN_OFFSET
}

/// A deterministic step-size law evaluated at a shifted index `k + k0`.
///
/// `c = 0` is accepted for every law and disables the term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Schedule {
    /// `c (k + k0)^(-tau)`
    Power {
        c: f64,
        tau: f64,
        #[serde(default = "default_power_offset")]
        k0: u64,
    },
    /// `c r^(k + k0)`
    Exponential {
        c: f64,
        r: f64,
        #[serde(default)]
        k0: u64,
    },
    /// `c r^sqrt(k + k0)`
    ExpSqrt {
        c: f64,
        r: f64,
        #[serde(default)]
        k0: u64,
    },
    /// `c ((k + k0) log log (k + k0))^(-1/2)`, with `k0` raised to at least 16.
    Annealing {
        c: f64,
        #[serde(default = "default_annealing_offset")]
        k0: u64,
    },
    Constant {
        c: f64,
    },
}

impl Schedule {
    pub fn power(c: f64, tau: f64) -> Result<Self> {
        Schedule::Power { c, tau, k0: 1 }.validated()
    }

    pub fn exponential(c: f64, r: f64) -> Result<Self> {
        Schedule::Exponential { c, r, k0: 0 }.validated()
    }

    pub fn exp_sqrt(c: f64, r: f64) -> Result<Self> {
        Schedule::ExpSqrt { c, r, k0: 0 }.validated()
    }

    pub fn annealing(c: f64) -> Result<Self> {
        Schedule::Annealing { c, k0: ANNEALING_MIN_OFFSET }.validated()
    }

    pub fn constant(c: f64) -> Result<Self> {
        Schedule::Constant { c }.validated()
    }

    pub fn zero() -> Self {
        Schedule::Constant { c: 0.0 }
    }

    pub fn with_offset(self, offset: u64) -> Result<Self> {
        let s = match self {
            Schedule::Power { c, tau, .. } => Schedule::Power { c, tau, k0: offset },
            Schedule::Exponential { c, r, .. } => Schedule::Exponential { c, r, k0: offset },
            Schedule::ExpSqrt { c, r, .. } => Schedule::ExpSqrt { c, r, k0: offset },
            Schedule::Annealing { c, .. } => Schedule::Annealing { c, k0: offset },
            Schedule::Constant { c } => Schedule::Constant { c },
        };
        s.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let c = self.scale();
        if !c.is_finite() || c < 0.0 {
            return Err(Error::invalid(format!("schedule scale c must be finite and >= 0, got {c}")));
        }
        match self {
            Schedule::Power { tau, k0, .. } => {
                if !tau.is_finite() || tau < 0.0 {
                    return Err(Error::invalid(format!("power exponent tau must be >= 0, got {tau}")));
                }
                if k0 == 0 && tau > 0.0 {
                    return Err(Error::invalid("power law with tau > 0 needs k0 >= 1"));
                }
            }
            Schedule::Exponential { r, .. } | Schedule::ExpSqrt { r, .. } => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::invalid(format!("decay ratio r must lie in (0, 1], got {r}")));
                }
            }
            Schedule::Annealing { .. } | Schedule::Constant { .. } => {}
        }
        Ok(self)
    }

    pub fn scale(&self) -> f64 {
        match *self {
            Schedule::Power { c, .. }
            | Schedule::Exponential { c, .. }
            | Schedule::ExpSqrt { c, .. }
            | Schedule::Annealing { c, .. }
            | Schedule::Constant { c } => c,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scale() == 0.0
    }

    pub fn offset(&self) -> u64 {
        match *self {
            Schedule::Power { k0, .. } | Schedule::Exponential { k0, .. } | Schedule::ExpSqrt { k0, .. } => k0,
            Schedule::Annealing { k0, .. } => k0.max(ANNEALING_MIN_OFFSET),
            Schedule::Constant { .. } => 0,
        }
    }

    /// Value at iteration `k` (discrete recursions).
    pub fn eval(&self, k: u64) -> f64 {
        self.eval_shifted((k + self.offset()) as f64)
    }

    /// Value at physical time `t` (continuous flows). The same offset applies,
    /// so `at_time(k as f64) == eval(k)`.
    pub fn at_time(&self, t: f64) -> f64 {
        self.eval_shifted(t + self.offset() as f64)
    }

    fn eval_shifted(&self, s: f64) -> f64 {
        match *self {
            Schedule::Power { c, tau, .. } => c * s.powf(-tau),
            Schedule::Exponential { c, r, .. } => c * r.powf(s),
            Schedule::ExpSqrt { c, r, .. } => c * r.powf(s.sqrt()),
            Schedule::Annealing { c, .. } => c / (s * s.ln().ln()).sqrt(),
            Schedule::Constant { c } => c,
        }
    }

    /// Exponent `tau` when the law is a power law or a constant (tau = 0).
    fn power_exponent(&self) -> Option<f64> {
        match *self {
            Schedule::Power { tau, .. } => Some(tau),
            Schedule::Constant { .. } => Some(0.0),
            _ => None,
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Schedule::Power { c, tau, k0 } => write!(f, "power(c={c}, tau={tau}, k0={k0})"),
            Schedule::Exponential { c, r, k0 } => write!(f, "exponential(c={c}, r={r}, k0={k0})"),
            Schedule::ExpSqrt { c, r, k0 } => write!(f, "exp-sqrt(c={c}, r={r}, k0={k0})"),
            Schedule::Annealing { c, k0 } => write!(f, "annealing(c={c}, k0={k0})"),
            Schedule::Constant { c } => write!(f, "constant({c})"),
        }
    }
}

/// How the consensus and annealing weights enter the update.
///
/// `Direct` applies `beta_k` and `gamma_k` as written in the recursion.
/// `StepScaled` multiplies both by `alpha_k`, which is what an optimizer that
/// folds every term into a single learning-rate step does: the update becomes
/// `x_n -= alpha_k (beta_k Σ(x_n - x_l) + grad + xi - gamma_k w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    #[default]
    Direct,
    StepScaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTriple {
    pub alpha: Schedule,
    pub beta: Schedule,
    #[serde(default = "Schedule::zero")]
    pub gamma: Schedule,
    #[serde(default)]
    pub coupling: Coupling,
}

/// Weights actually applied at one iteration, after coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl WeightTriple {
    pub fn new(alpha: Schedule, beta: Schedule, gamma: Schedule) -> Self {
        WeightTriple { alpha, beta, gamma, coupling: Coupling::Direct }
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validated(self) -> Result<Self> {
        self.alpha.validated()?;
        self.beta.validated()?;
        self.gamma.validated()?;
        Ok(self)
    }

    pub fn at_step(&self, k: u64) -> StepWeights {
        let alpha = self.alpha.eval(k);
        let beta = self.beta.eval(k);
        let gamma = if self.gamma.is_zero() { 0.0 } else { self.gamma.eval(k) };
        match self.coupling {
            Coupling::Direct => StepWeights { alpha, beta, gamma },
            Coupling::StepScaled => StepWeights { alpha, beta: alpha * beta, gamma: alpha * gamma },
        }
    }

    pub fn at_time(&self, t: f64) -> StepWeights {
        let alpha = self.alpha.at_time(t);
        let beta = self.beta.at_time(t);
        match self.coupling {
            Coupling::Direct => StepWeights { alpha, beta, gamma: 0.0 },
            Coupling::StepScaled => StepWeights { alpha, beta: alpha * beta, gamma: 0.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidationMode {
    #[default]
    Strict,
    Permissive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.findings.iter().all(|f| f.severity != Severity::Error)
    }

    pub fn has_warnings(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Warning)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.findings.push(Finding { severity: Severity::Warning, message: message.into() });
    }

    fn fail(&mut self, mode: ValidationMode, message: impl Into<String>) {
        let severity = match mode {
            ValidationMode::Strict => Severity::Error,
            ValidationMode::Permissive => Severity::Warning,
        };
        self.findings.push(Finding { severity, message: message.into() });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.findings.extend(other.findings);
    }
}

/// Checks the step-size conditions for D-SGD convergence: alpha a power law
/// with exponent in (1/2, 1], beta a power law (or constant) with a strictly
/// smaller exponent, and no annealing.
pub fn validate_dsgd(w: &WeightTriple, mode: ValidationMode) -> ValidationReport {
    let mut report = ValidationReport::default();
    let tau_alpha = match w.alpha {
        Schedule::Power { tau, .. } => {
            if !(tau > 0.5 && tau <= 1.0) {
                report.fail(mode, format!("alpha exponent tau={tau} is outside (1/2, 1]"));
            }
            Some(tau)
        }
        other => {
            report.fail(mode, format!("alpha must be a power law, got {other}"));
            None
        }
    };
    match w.beta.power_exponent() {
        Some(tau_beta) => {
            if let Some(tau_alpha) = tau_alpha {
                if tau_beta >= tau_alpha {
                    report.fail(
                        mode,
                        format!("beta exponent {tau_beta} must be strictly below alpha exponent {tau_alpha}"),
                    );
                }
            }
        }
        None => report.fail(mode, format!("beta must be a power law or constant, got {}", w.beta)),
    }
    if !w.gamma.is_zero() {
        report.fail(mode, format!("plain D-SGD expects gamma = 0, got {}", w.gamma));
    }
    report
}

/// Checks the annealing conditions: `alpha = c_a / k`, `gamma` the annealing
/// law, and `c_g^2 / c_a > ratio_floor`. The floor is user supplied; no
/// universal value exists.
pub fn validate_annealing(w: &WeightTriple, ratio_floor: f64, mode: ValidationMode) -> ValidationReport {
    let mut report = ValidationReport::default();
    let c_alpha = match w.alpha {
        Schedule::Power { c, tau: 1.0, .. } => Some(c),
        other => {
            report.fail(mode, format!("annealing needs alpha = power(c, tau=1), got {other}"));
            None
        }
    };
    let c_gamma = match w.gamma {
        Schedule::Annealing { c, .. } if c > 0.0 => Some(c),
        other => {
            report.fail(mode, format!("annealing needs gamma = annealing(c > 0), got {other}"));
            None
        }
    };
    if let (Some(ca), Some(cg)) = (c_alpha, c_gamma) {
        let ratio = cg * cg / ca;
        if !(ratio > ratio_floor) {
            report.fail(mode, format!("c_gamma^2 / c_alpha = {ratio} does not exceed the floor {ratio_floor}"));
        }
    }
    match w.beta.power_exponent() {
        Some(tau) if tau < 0.5 => {}
        _ => report.warn(format!("annealed consensus expects beta ~ k^-tau with tau in [0, 1/2), got {}", w.beta)),
    }
    report
}

/// Flags a constant consensus weight large enough to make the direct
/// consensus map non-contractive on `graph`.
pub fn check_constant_beta(w: &WeightTriple, graph: &Graph) -> ValidationReport {
    let mut report = ValidationReport::default();
    if let (Schedule::Constant { c }, Coupling::Direct) = (w.beta, w.coupling) {
        let limit = 1.0 / (2.0 * graph.max_degree().max(1) as f64);
        if c >= limit {
            report.warn(format!(
                "constant beta = {c} is not below 1/(2 max degree) = {limit}; consensus may oscillate or diverge"
            ));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(Schedule::power(1.0, 1.0).unwrap().eval(0), 1.0);
        assert_eq!(Schedule::exponential(0.01, 0.998).unwrap().eval(0), 0.01);
        let expected = 1.0 / (16.0 * 16f64.ln().ln()).sqrt();
        let got = Schedule::annealing(1.0).unwrap().eval(0);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.247_563).abs() < 1e-4);
        assert!((Schedule::exp_sqrt(20.0, 0.9).unwrap().eval(100) - 20.0 * 0.9f64.powi(10)).abs() < 1e-12);
    }

    #[test]
    fn annealing_offset_is_raised() {
        let s = Schedule::Annealing { c: 1.0, k0: 2 };
        assert_eq!(s.eval(0), Schedule::annealing(1.0).unwrap().eval(0));
        assert!(s.eval(0).is_finite());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Schedule::power(-1.0, 0.5).is_err());
        assert!(Schedule::power(1.0, -0.5).is_err());
        assert!(Schedule::exponential(1.0, 1.5).is_err());
        assert!(Schedule::exp_sqrt(1.0, 0.0).is_err());
        assert!(Schedule::Power { c: 1.0, tau: 1.0, k0: 0 }.validated().is_err());
        assert!(Schedule::constant(f64::NAN).is_err());
    }

    #[test]
    fn dsgd_validation() {
        let ok = WeightTriple::new(
            Schedule::power(1.0, 0.75).unwrap(),
            Schedule::power(1.0, 0.25).unwrap(),
            Schedule::zero(),
        );
        assert!(validate_dsgd(&ok, ValidationMode::Strict).passed());

        let slow = WeightTriple { alpha: Schedule::power(1.0, 0.4).unwrap(), ..ok };
        assert!(!validate_dsgd(&slow, ValidationMode::Strict).passed());

        let regression = WeightTriple::new(
            Schedule::exponential(0.01, 0.998).unwrap(),
            Schedule::constant(4.0).unwrap(),
            Schedule::exp_sqrt(20.0, 0.9).unwrap(),
        );
        assert!(!validate_dsgd(&regression, ValidationMode::Strict).passed());
        let permissive = validate_dsgd(&regression, ValidationMode::Permissive);
        assert!(permissive.passed());
        assert!(permissive.has_warnings());
    }

    #[test]
    fn annealing_validation() {
        let w = |ca: f64, gamma: Schedule| {
            WeightTriple::new(Schedule::power(ca, 1.0).unwrap(), Schedule::constant(0.1).unwrap(), gamma)
        };
        let pass = w(0.1, Schedule::annealing(2.0).unwrap());
        assert!(validate_annealing(&pass, 10.0, ValidationMode::Strict).passed());
        assert!(!validate_annealing(&w(1.0, Schedule::zero()), 0.0, ValidationMode::Strict).passed());
        let low = w(0.1, Schedule::annealing(0.1).unwrap());
        assert!(!validate_annealing(&low, 10.0, ValidationMode::Strict).passed());
    }

    #[test]
    fn constant_beta_warning() {
        let g = Graph::cycle(4).unwrap();
        let w = |b: f64| {
            WeightTriple::new(Schedule::power(1.0, 1.0).unwrap(), Schedule::constant(b).unwrap(), Schedule::zero())
        };
        assert!(check_constant_beta(&w(0.2), &g).findings.is_empty());
        assert!(check_constant_beta(&w(0.25), &g).has_warnings());
    }

    #[test]
    fn step_scaled_coupling() {
        let w = WeightTriple::new(
            Schedule::constant(0.1).unwrap(),
            Schedule::constant(4.0).unwrap(),
            Schedule::constant(20.0).unwrap(),
        )
        .with_coupling(Coupling::StepScaled);
        let s = w.at_step(3);
        assert!((s.beta - 0.4).abs() < 1e-15);
        assert!((s.gamma - 2.0).abs() < 1e-15);
    }

    #[test]
    fn toml_schema() {
        let w: WeightTriple = toml::from_str(
            r#"
            coupling = "step-scaled"
            alpha = { law = "exponential", c = 0.01, r = 0.998 }
            beta = { law = "constant", c = 4.0 }
            gamma = { law = "exp-sqrt", c = 20.0, r = 0.9 }
            "#,
        )
        .unwrap();
        assert_eq!(w.alpha, Schedule::exponential(0.01, 0.998).unwrap());
        assert_eq!(w.coupling, Coupling::StepScaled);
        let p: Schedule = toml::from_str("law = \"power\"\nc = 1.0\ntau = 0.75").unwrap();
        assert_eq!(p.offset(), 1);
        assert!(toml::from_str::<Schedule>("law = \"power\"\nc = 1.0\ntau = 0.75\nbogus = 1").is_err());
    }
}
