use rand::Rng;

use super::kernel::Particle;
use crate::data::Dataset;
use crate::error::{Result, SpaError};
use crate::model::{gt_log_density, GtPrior};

/// Weighted particle approximation of the current target.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    pub particles: Vec<Particle>,
    /// Normalized weights.
    pub weights: Vec<f64>,
    /// Running `ln(Z_t / Z_1)`.
    pub log_z_ratio_cum: f64,
    /// 1-based step index.
    pub t: usize,
    /// Inverse-gamma rate `b_t` of the current target.
    pub b: f64,
}

impl ParticleSystem {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn ess(&self) -> f64 {
        ess(&self.weights)
    }
}

/// `1 / Σ W_i²`.
pub fn ess(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Output of [`reweight`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reweight {
    /// `ln γ_t(β) − ln γ_{t−1}(β)` per particle, evaluated at the pre-move
    /// particles.
    pub log_increments: Vec<f64>,
    /// `ln Σ_i W_{t−1}^(i) w_t^(i)`, the estimate of `ln(Z_t / Z_{t−1})`.
    pub log_z_increment: f64,
}

/// Reweight from `prev` to `next`. Under the reversal backward kernel the
/// incremental weight is `γ_t/γ_{t−1}` at the current particle; the
/// likelihood cancels, so only prior terms are evaluated.
pub fn reweight(system: &mut ParticleSystem, data: &Dataset, next: &GtPrior, prev: &GtPrior) -> Result<Reweight> {
    if next.a() != prev.a() {
        return Err(SpaError::invalid("consecutive targets must share degrees of freedom"));
    }
    let start = data.first_penalized();
    let log_increments: Vec<f64> = system
        .particles
        .iter()
        .map(|p| {
            if next == prev {
                return 0.0;
            }
            p.beta[start..]
                .iter()
                .map(|&b| gt_log_density(b, next) - gt_log_density(b, prev))
                .sum()
        })
        .collect();
    let log_terms: Vec<f64> = system
        .weights
        .iter()
        .zip(&log_increments)
        .map(|(w, l)| w.ln() + l)
        .collect();
    let max = log_terms
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(SpaError::DegenerateWeights { step: system.t + 1 });
    }
    let mut new_weights: Vec<f64> = log_terms
        .iter()
        .map(|l| if l.is_nan() { 0.0 } else { (l - max).exp() })
        .collect();
    let sum: f64 = new_weights.iter().sum();
    for w in new_weights.iter_mut() {
        *w /= sum;
    }
    system.weights = new_weights;
    Ok(Reweight {
        log_increments,
        log_z_increment: max + sum.ln(),
    })
}

/// Systematic resampling with offset `u ∈ [0, 1)`: particle `i` receives one
/// copy for each point `(u + k)/N` inside its cumulative-weight interval.
/// Returns ancestor indices.
pub fn systematic_resample_at(weights: &[f64], u: f64) -> Vec<usize> {
    let n = weights.len();
    let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(n - 1);
    let mut ancestors = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut i = 0;
    for k in 0..n {
        let pos = (u + k as f64) / n as f64;
        while pos >= cum && i < last_positive {
            i += 1;
            cum += weights[i];
        }
        ancestors.push(i);
    }
    ancestors
}

/// Resample in place with one uniform draw; weights reset to `1/N` and each
/// cache travels with its particle.
pub fn systematic_resample<R: Rng + ?Sized>(system: &mut ParticleSystem, rng: &mut R) -> Vec<usize> {
    let u: f64 = rng.gen();
    let ancestors = systematic_resample_at(&system.weights, u);
    system.particles = ancestors.iter().map(|&a| system.particles[a].clone()).collect();
    let n = system.particles.len();
    system.weights = vec![1.0 / n as f64; n];
    ancestors
}
