//! Counter-based random streams and the noise models built on them.
//!
//! Every draw is addressed by `(root seed, agent, iteration, channel)`. The
//! address is hashed into a ChaCha8 key, so a draw never depends on what was
//! drawn before it: runs are reproducible under any execution order, and
//! channels cannot perturb each other.
//!
//! Normal variates use Box–Muller on two 53-bit uniforms, `u1 ∈ (0, 1]` and
//! `u2 ∈ [0, 1)`, producing the pair `(r cos θ, r sin θ)` in that order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Identifier of the stream-derivation algorithm, recorded in run outputs.
pub const STREAM_VERSION: &str = "splitmix64-chacha8-boxmuller/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    GradientNoise = 1,
    Annealing = 2,
    Data = 3,
    Init = 4,
    Directions = 5,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `index` within an experiment rooted at `root`.
pub fn run_seed(root: u64, index: u64) -> u64 {
    mix64(mix64(root ^ 0x005E_ED0F_2E5E_A2C4).wrapping_add(index.wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub root_seed: u64,
}

impl RngStream {
    pub fn new(root_seed: u64) -> Self {
        RngStream { root_seed }
    }

    pub fn substream(&self, agent: u64, k: u64, channel: Channel) -> Substream {
        let mut h = mix64(self.root_seed.wrapping_add(GOLDEN));
        for word in [agent, k, channel as u64] {
            h = mix64(h ^ word.wrapping_add(GOLDEN));
        }
        let mut seed = [0u8; 32];
        let mut s = h;
        for chunk in seed.chunks_exact_mut(8) {
            s = s.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&mix64(s).to_le_bytes());
        }
        Substream { rng: ChaCha8Rng::from_seed(seed), spare: None }
    }
}

/// One addressed stream of variates.
pub struct Substream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Substream {
    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(low, high)`.
    pub fn uniform_open(&mut self, low: f64, high: f64) -> f64 {
        loop {
            let v = low + (high - low) * self.uniform();
            if v > low && v < high {
                return v;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = self.normal());
    }
}

/// Additive gradient noise `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GradientNoiseModel {
    #[default]
    None,
    Gaussian {
        sigma: f64,
    },
    BoundedUniform {
        a: f64,
    },
}

impl GradientNoiseModel {
    pub fn is_none(&self) -> bool {
        matches!(self, GradientNoiseModel::None)
    }

    /// `E[(ξᵀθ)⁺]` for a unit vector `θ`, when it has a closed form.
    pub fn excitation_constant(&self) -> Option<f64> {
        match *self {
            GradientNoiseModel::None => Some(0.0),
            GradientNoiseModel::Gaussian { sigma } => Some(sigma / (2.0 * std::f64::consts::PI).sqrt()),
            GradientNoiseModel::BoundedUniform { .. } => None,
        }
    }
}

/// Writes `ξ_agent(k)` into `out`.
pub fn draw_gradient_noise(model: &GradientNoiseModel, stream: &RngStream, agent: u64, k: u64, out: &mut [f64]) {
    match *model {
        GradientNoiseModel::None => out.fill(0.0),
        GradientNoiseModel::Gaussian { sigma } => {
            let mut s = stream.substream(agent, k, Channel::GradientNoise);
            out.iter_mut().for_each(|v| *v = sigma * s.normal());
        }
        GradientNoiseModel::BoundedUniform { a } => {
            let mut s = stream.substream(agent, k, Channel::GradientNoise);
            out.iter_mut().for_each(|v| *v = a * (2.0 * s.uniform() - 1.0));
        }
    }
}

/// Writes the annealing noise `w_agent(k) ~ N(0, I)` into `out`.
pub fn draw_annealing_noise(stream: &RngStream, agent: u64, k: u64, out: &mut [f64]) {
    stream.substream(agent, k, Channel::Annealing).fill_normal(out);
}

/// Mixture data for the scalar regression problem: `x ~ U(x_low, x_high)`,
/// then `y = slopes.0 · x + ε` with probability `mix_p`, else
/// `y = slopes.1 · x + ε`, with `ε ~ N(0, noise_std²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionData {
    pub x_low: f64,
    pub x_high: f64,
    pub mix_p: f64,
    pub slopes: (f64, f64),
    pub noise_std: f64,
}

impl Default for RegressionData {
    fn default() -> Self {
        RegressionData { x_low: 0.0, x_high: 12.0, mix_p: 0.55, slopes: (0.7, 0.1), noise_std: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionSample {
    pub x: f64,
    pub y: f64,
    /// Whether the sample came from the first (`slopes.0`) branch.
    pub primary: bool,
}

pub fn sample_regression(data: &RegressionData, stream: &RngStream, agent: u64, k: u64) -> RegressionSample {
    let mut s = stream.substream(agent, k, Channel::Data);
    let x = s.uniform_open(data.x_low, data.x_high);
    let primary = s.uniform() < data.mix_p;
    let slope = if primary { data.slopes.0 } else { data.slopes.1 };
    let y = slope * x + data.noise_std * s.normal();
    RegressionSample { x, y, primary }
}

/// `(1/N) d/dw log(8(wx − y)² + 1) = (1/N) · 16x(wx − y) / (8(wx − y)² + 1)`.
pub fn stochastic_regression_gradient(w: f64, sample: &RegressionSample, n_agents: usize) -> f64 {
    let r = w * sample.x - sample.y;
    16.0 * sample.x * r / (8.0 * r * r + 1.0) / n_agents as f64
}

/// Monte Carlo estimate of `min_θ E[(ξᵀθ)⁺]` over `directions` random unit
/// vectors in `R^dim`. All directions share the same `draws` noise samples.
pub fn verify_min_excitation(
    model: &GradientNoiseModel,
    dim: usize,
    directions: usize,
    draws: usize,
    seed: u64,
) -> f64 {
    if model.is_none() || directions == 0 || draws == 0 || dim == 0 {
        return 0.0;
    }
    let stream = RngStream::new(seed);
    let mut dirs = Vec::with_capacity(directions);
    for i in 0..directions {
        let mut s = stream.substream(i as u64, 0, Channel::Directions);
        let mut theta = vec![0.0; dim];
        loop {
            s.fill_normal(&mut theta);
            let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                theta.iter_mut().for_each(|v| *v /= norm);
                break;
            }
        }
        dirs.push(theta);
    }
    let mut sums = vec![0.0; directions];
    let mut xi = vec![0.0; dim];
    for k in 0..draws {
        draw_gradient_noise(model, &stream, 0, k as u64, &mut xi);
        for (sum, theta) in sums.iter_mut().zip(&dirs) {
            let proj: f64 = xi.iter().zip(theta).map(|(a, b)| a * b).sum();
            *sum += proj.max(0.0);
        }
    }
    sums.into_iter().map(|s| s / draws as f64).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_model_is_zero() {
        let s = RngStream::new(3);
        let mut out = vec![1.0; 4];
        draw_gradient_noise(&GradientNoiseModel::None, &s, 2, 9, &mut out);
        assert_eq!(out, vec![0.0; 4]);
        assert_eq!(verify_min_excitation(&GradientNoiseModel::None, 2, 5, 10, 0), 0.0);
    }

    #[test]
    fn draws_are_addressed() {
        let s = RngStream::new(11);
        let m = GradientNoiseModel::Gaussian { sigma: 1.0 };
        let mut a = vec![0.0; 3];
        let mut b = vec![0.0; 3];
        draw_gradient_noise(&m, &s, 1, 5, &mut a);
        draw_annealing_noise(&s, 1, 7, &mut b);
        draw_gradient_noise(&m, &s, 1, 5, &mut b);
        assert_eq!(a, b);

        draw_annealing_noise(&s, 0, 5, &mut a);
        draw_annealing_noise(&s, 1, 5, &mut b);
        assert_ne!(a, b);
        draw_gradient_noise(&m, &s, 0, 5, &mut b);
        assert_ne!(a, b, "channels must differ");
        draw_annealing_noise(&RngStream::new(12), 0, 5, &mut b);
        assert_ne!(a, b, "seeds must differ");
    }

    #[test]
    fn gaussian_noise_mean() {
        let s = RngStream::new(1);
        let m = GradientNoiseModel::Gaussian { sigma: 1.0 };
        let mut sum = [0.0; 2];
        let mut xi = [0.0; 2];
        let n = 100_000;
        for k in 0..n {
            draw_gradient_noise(&m, &s, 0, k, &mut xi);
            sum[0] += xi[0];
            sum[1] += xi[1];
        }
        assert!(sum.iter().all(|v| (v / n as f64).abs() < 0.02), "{sum:?}");
    }

    #[test]
    fn uniform_noise_is_bounded_and_centered() {
        let s = RngStream::new(2);
        let m = GradientNoiseModel::BoundedUniform { a: 0.5 };
        let mut xi = [0.0; 1];
        let mut sum = 0.0;
        for k in 0..100_000 {
            draw_gradient_noise(&m, &s, 3, k, &mut xi);
            assert!(xi[0].abs() <= 0.5);
            sum += xi[0];
        }
        // sd of U(-a, a) is a/√3; CLT bound 3·0.289/√1e5 ≈ 0.0027.
        assert!((sum / 1e5).abs() < 0.006);
    }

    #[test]
    fn annealing_noise_moments() {
        let s = RngStream::new(5);
        let n = 100_000;
        let (mut m0, mut m1, mut c00, mut c01, mut c11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut w = [0.0; 2];
        for k in 0..n {
            draw_annealing_noise(&s, 0, k, &mut w);
            m0 += w[0];
            m1 += w[1];
            c00 += w[0] * w[0];
            c01 += w[0] * w[1];
            c11 += w[1] * w[1];
        }
        let n = n as f64;
        assert!((m0 / n).abs() < 0.02 && (m1 / n).abs() < 0.02);
        assert!((c00 / n - 1.0).abs() < 0.03);
        assert!((c11 / n - 1.0).abs() < 0.03);
        assert!((c01 / n).abs() < 0.03);
    }

    #[test]
    fn regression_sampler_law() {
        let data = RegressionData::default();
        let s = RngStream::new(8);
        let n = 100_000;
        let (mut primary, mut xsum) = (0usize, 0.0);
        for k in 0..n {
            let smp = sample_regression(&data, &s, 0, k);
            assert!(smp.x > 0.0 && smp.x < 12.0);
            primary += smp.primary as usize;
            xsum += smp.x;
        }
        assert!((primary as f64 / n as f64 - 0.55).abs() < 0.01);
        assert!((xsum / n as f64 - 6.0).abs() < 0.05);
    }

    #[test]
    fn regression_gradient() {
        let s = |x, y| RegressionSample { x, y, primary: true };
        assert_eq!(stochastic_regression_gradient(0.5, &s(2.0, 1.0), 1), 0.0);
        let g1 = stochastic_regression_gradient(1.0, &s(1.0, 0.0), 1);
        assert!((g1 - 16.0 / 9.0).abs() < 1e-15);
        assert!((g1 - 1.77778).abs() < 1e-5);
        assert_eq!(stochastic_regression_gradient(1.0, &s(1.0, 0.0), 4), g1 / 4.0);
    }

    #[test]
    fn excitation_scales_with_sigma() {
        let inv = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let e1 = verify_min_excitation(&GradientNoiseModel::Gaussian { sigma: 1.0 }, 2, 50, 100_000, 1);
        assert!((e1 - inv).abs() < 0.01, "{e1}");
        let e2 = verify_min_excitation(&GradientNoiseModel::Gaussian { sigma: 2.0 }, 2, 50, 100_000, 1);
        assert!((e2 - 2.0 * inv).abs() < 0.02, "{e2}");
        assert!(e1 > 0.3);
    }

    #[test]
    fn run_seeds_are_distinct() {
        let seeds: std::collections::HashSet<_> = (0..1000).map(|i| run_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(run_seed(7, 3), run_seed(7, 3));
    }
}
