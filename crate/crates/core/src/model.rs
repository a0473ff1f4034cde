//! Generalized-t prior, logistic likelihood with single-coordinate updates,
//! and the analytic oracles built on them.

use statrs::function::gamma::ln_gamma;

use crate::data::Dataset;
use crate::error::{Result, SpaError};
use crate::quadrature::{self, Grid};

/// Centred L1 generalized-t prior `Gt(a, c)`:
/// `p(β) = (2c)⁻¹ (1 + |β|/(a c))^-(a+1)`.
///
/// `c` is the canonical scale. The inverse-gamma rate of the scale-mixture
/// representation is `b = a c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtPrior {
    a: f64,
    c: f64,
}

impl GtPrior {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(SpaError::invalid(format!("degrees of freedom a = {a} must be > 0")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(SpaError::invalid(format!("scale c = {c} must be > 0")));
        }
        Ok(GtPrior { a, c })
    }

    /// Prior with inverse-gamma rate `b`, i.e. `Gt(a, b/a)`.
    pub fn from_rate(a: f64, b: f64) -> Result<Self> {
        GtPrior::new(a, b / a)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn b(&self) -> f64 {
        self.a * self.c
    }

    /// Lasso penalty of the double-exponential limit.
    pub fn lambda_de(&self) -> f64 {
        1.0 / self.c
    }

    #[inline]
    pub fn log_density(&self, beta: f64) -> f64 {
        gt_log_density(beta, self)
    }
}

/// Coefficient-indexed prior lookup; a single [`GtPrior`] applies to all
/// coordinates, a slice gives each coordinate its own.
pub trait PriorLookup {
    fn prior(&self, j: usize) -> GtPrior;

    /// Number of coordinates covered, `None` when unbounded.
    fn len_hint(&self) -> Option<usize> {
        None
    }
}

impl PriorLookup for GtPrior {
    fn prior(&self, _j: usize) -> GtPrior {
        *self
    }
}

impl PriorLookup for [GtPrior] {
    fn prior(&self, j: usize) -> GtPrior {
        self[j]
    }

    fn len_hint(&self) -> Option<usize> {
        Some(self.len())
    }
}

impl PriorLookup for Vec<GtPrior> {
    fn prior(&self, j: usize) -> GtPrior {
        self[j]
    }

    fn len_hint(&self) -> Option<usize> {
        Some(self.len())
    }
}

#[inline]
pub fn gt_log_density(beta: f64, prior: &GtPrior) -> f64 {
    debug_assert!(beta.is_finite());
    let GtPrior { a, c } = *prior;
    -(2.0 * c).ln() - (a + 1.0) * (beta.abs() / (a * c)).ln_1p()
}

/// Laplace log-density with scale `c`.
#[inline]
pub fn de_log_density(beta: f64, c: f64) -> f64 {
    -(2.0 * c).ln() - beta.abs() / c
}

/// Node count for [`gt_scale_mixture_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct MixtureQuadrature {
    pub nodes: usize,
}

impl Default for MixtureQuadrature {
    fn default() -> Self {
        MixtureQuadrature { nodes: 2001 }
    }
}

/// Marginal density at `beta` of `Laplace(β | 0, τ)` with
/// `τ ~ InverseGamma(a, a c)`, integrated numerically over `ln τ`.
///
/// The grid is centred on the mode of the integrand in `ln τ` and runs far
/// enough right to cover the polynomial tail of the inverse gamma.
pub fn gt_scale_mixture_oracle(beta: f64, prior: &GtPrior, quad: &MixtureQuadrature) -> Result<f64> {
    if quad.nodes < 2 {
        return Err(SpaError::Quadrature(format!(
            "degenerate quadrature with {} nodes",
            quad.nodes
        )));
    }
    let a = prior.a();
    let b = prior.b();
    let shift = b + beta.abs();
    let mode = (shift / (a + 1.0)).ln();
    let lo = mode - 8.0;
    let hi = mode + 60.0 / (a + 1.0) + 8.0;
    let grid = Grid::uniform(lo, hi, quad.nodes)?;
    let log_const = -std::f64::consts::LN_2 + a * b.ln() - ln_gamma(a);
    let log_mass = quadrature::log_integrate(&grid, |s| {
        // Laplace × inverse gamma × Jacobian dτ = τ ds
        -(a + 1.0) * s - shift * (-s).exp()
    });
    Ok((log_const + log_mass).exp())
}

#[inline]
pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^η)` without overflow.
#[inline]
pub fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

/// Linear predictor `η = Xβ` with the fitted probabilities and the
/// log-likelihood it implies.
///
/// `prob` and `comp` hold `p_i` and `1 - p_i`, each computed without
/// cancellation, so single-coordinate proposals can be scored as
/// `Σ ln(1 - p_i + p_i e^{δ x_ij})` without re-evaluating softplus.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPredictorCache {
    eta: Vec<f64>,
    prob: Vec<f64>,
    comp: Vec<f64>,
    loglik: f64,
}

/// Reusable buffer for scoring single-coordinate proposals.
#[derive(Debug, Clone, Default)]
pub struct ProposalScratch {
    factors: Vec<f64>,
    table: [f64; 16],
}

/// Upper bound on `ln` of a partial product of likelihood ratio factors.
const LOG_PRODUCT_BOUND: f64 = 600.0;

impl LinearPredictorCache {
    pub fn from_eta(data: &Dataset, eta: Vec<f64>) -> Self {
        let n = eta.len();
        let mut cache = LinearPredictorCache {
            eta,
            prob: vec![0.0; n],
            comp: vec![0.0; n],
            loglik: 0.0,
        };
        cache.refresh(data);
        cache
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    /// Recompute probabilities and log-likelihood from `η`. O(n).
    pub fn refresh(&mut self, data: &Dataset) {
        let mut ll = 0.0;
        for (((&eta, &y), p), q) in self
            .eta
            .iter()
            .zip(data.y())
            .zip(self.prob.iter_mut())
            .zip(self.comp.iter_mut())
        {
            let e = (-eta.abs()).exp();
            let inv = 1.0 / (1.0 + e);
            if eta >= 0.0 {
                *p = inv;
                *q = e * inv;
            } else {
                *p = e * inv;
                *q = inv;
            }
            ll += y * eta - (eta.max(0.0) + e.ln_1p());
        }
        self.loglik = ll;
    }

    /// Change in log-likelihood if `β_j` moved by `delta`. Leaves the cache
    /// untouched; the ratio factors are kept in `scratch` for [`Self::commit`].
    pub fn propose(&self, data: &Dataset, j: usize, delta: f64, scratch: &mut ProposalScratch) -> f64 {
        if delta == 0.0 {
            return 0.0;
        }
        let info = data.info(j);
        let chunk = ((LOG_PRODUCT_BOUND / (delta.abs() * info.max_abs)).floor() as usize).clamp(1, 64);
        let mut log_ratio = 0.0;
        match &info.levels {
            Some(levels) => {
                for (t, &v) in scratch.table.iter_mut().zip(&levels.values) {
                    *t = (delta * v).exp();
                }
                let table = &scratch.table;
                let items = levels.codes.chunks(chunk).zip(self.prob.chunks(chunk)).zip(self.comp.chunks(chunk));
                for ((codes, p), q) in items {
                    let mut prod = 1.0;
                    for ((&k, &p), &q) in codes.iter().zip(p).zip(q) {
                        prod *= q + p * table[k as usize];
                    }
                    log_ratio += prod.ln();
                }
            }
            None => {
                let col = data.column(j);
                scratch.factors.clear();
                scratch.factors.extend(col.iter().map(|&x| (delta * x).exp()));
                let items = scratch.factors.chunks(chunk).zip(self.prob.chunks(chunk)).zip(self.comp.chunks(chunk));
                for ((r, p), q) in items {
                    let mut prod = 1.0;
                    for ((&r, &p), &q) in r.iter().zip(p).zip(q) {
                        prod *= q + p * r;
                    }
                    log_ratio += prod.ln();
                }
            }
        }
        delta * info.y_dot - log_ratio
    }

    /// Apply a move scored by [`Self::propose`] with the same `scratch`.
    /// Probabilities are updated multiplicatively; call [`Self::refresh`]
    /// periodically to clear accumulated round-off.
    pub fn commit(&mut self, data: &Dataset, j: usize, delta: f64, loglik_change: f64, scratch: &ProposalScratch) {
        if delta == 0.0 {
            return;
        }
        let col = data.column(j);
        let info = data.info(j);
        let update = |i: usize, r: f64, eta: &mut [f64], p: &mut [f64], q: &mut [f64]| {
            eta[i] += delta * col[i];
            let pr = p[i] * r;
            let f = q[i] + pr;
            p[i] = pr / f;
            q[i] /= f;
        };
        match &info.levels {
            Some(levels) => {
                for (i, &k) in levels.codes.iter().enumerate() {
                    update(i, scratch.table[k as usize], &mut self.eta, &mut self.prob, &mut self.comp);
                }
            }
            None => {
                for (i, &r) in scratch.factors.iter().enumerate() {
                    update(i, r, &mut self.eta, &mut self.prob, &mut self.comp);
                }
            }
        }
        self.loglik += loglik_change;
    }
}

/// Bernoulli-logit log-likelihood `Σ y_i η_i − ln(1 + e^{η_i})` with its cache.
pub fn log_likelihood(data: &Dataset, beta: &[f64]) -> Result<(f64, LinearPredictorCache)> {
    let eta = data.x().mul_vec(beta)?;
    let cache = LinearPredictorCache::from_eta(data, eta);
    Ok((cache.loglik, cache))
}

/// Move coordinate `j` from `old_bj` to `new_bj`: `η += X_j (new − old)`,
/// then recompute the log-likelihood from `η`. Returns the new value.
pub fn log_likelihood_delta(
    cache: &mut LinearPredictorCache,
    data: &Dataset,
    j: usize,
    old_bj: f64,
    new_bj: f64,
) -> Result<f64> {
    if j >= data.p() {
        return Err(SpaError::IndexOutOfRange { index: j, len: data.p() });
    }
    if cache.eta.len() != data.n() {
        return Err(SpaError::DimensionMismatch {
            expected: data.n(),
            actual: cache.eta.len(),
        });
    }
    let delta = new_bj - old_bj;
    if delta != 0.0 {
        for (e, &x) in cache.eta.iter_mut().zip(data.column(j)) {
            *e += x * delta;
        }
        cache.refresh(data);
    }
    Ok(cache.loglik)
}

/// `Σ_j log Gt(β_j)` over penalized coordinates.
pub fn log_prior<P: PriorLookup + ?Sized>(data: &Dataset, beta: &[f64], prior: &P) -> f64 {
    (data.first_penalized()..beta.len())
        .map(|j| gt_log_density(beta[j], &prior.prior(j)))
        .sum()
}

/// `log γ(β) = log f(y | X, β) + Σ_j log Gt(β_j)`.
pub fn log_posterior_unnorm<P: PriorLookup + ?Sized>(data: &Dataset, beta: &[f64], prior: &P) -> Result<f64> {
    let (ll, _) = log_likelihood(data, beta)?;
    Ok(ll + log_prior(data, beta, prior))
}

/// Integration window for [`shrinkage_posterior_mean`].
#[derive(Debug, Clone, Copy)]
pub struct ShrinkageQuadrature {
    /// Half-width of the `β` window around `y`, in observation sd units.
    pub half_width: f64,
    pub nodes: usize,
}

impl Default for ShrinkageQuadrature {
    fn default() -> Self {
        ShrinkageQuadrature {
            half_width: 12.0,
            nodes: 2001,
        }
    }
}

/// Relative integrand mass tolerated at the window edges.
const EDGE_TOLERANCE: f64 = 1e-10;

/// `E[β | y]` for `y ~ N(β, 1)` and `β ~ Gt(a, c)`.
pub fn shrinkage_posterior_mean(y: f64, prior: &GtPrior, quad: &ShrinkageQuadrature) -> Result<f64> {
    if !y.is_finite() {
        return Err(SpaError::invalid("observation must be finite"));
    }
    let lo = y - quad.half_width;
    let hi = y + quad.half_width;
    let grid = Grid::piecewise(lo, hi, &[0.0], quad.nodes)?;
    let log_g = |b: f64| -0.5 * (y - b) * (y - b) + prior.log_density(b);
    let logs: Vec<f64> = grid.points.iter().map(|&b| log_g(b)).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let edge = log_g(lo).max(log_g(hi)) - m;
    if edge > EDGE_TOLERANCE.ln() {
        return Err(SpaError::Quadrature(format!(
            "window ±{} around y = {y} too narrow: edge mass ratio {:.3e}",
            quad.half_width,
            edge.exp()
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for ((&b, &w), &l) in grid.points.iter().zip(&grid.weights).zip(&logs) {
        let g = w * (l - m).exp();
        num += b * g;
        den += g;
    }
    Ok(num / den)
}

/// `(c_sparse, c_continuous) = (2√(a+1)/a, √(a+1)/a)`: the MAP is sparse for
/// `c` below the first and continuous in the data at the second.
pub fn sparsity_thresholds(a: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SpaError::invalid(format!("degrees of freedom a = {a} must be > 0")));
    }
    let r = (a + 1.0).sqrt() / a;
    Ok((2.0 * r, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{simulate_dataset, Effects, Matrix, SimSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gt(a: f64, c: f64) -> GtPrior {
        GtPrior::new(a, c).unwrap()
    }

    fn toy(n: usize, p: usize, seed: u64) -> Dataset {
        simulate_dataset(&SimSpec {
            n,
            p,
            block_size: p.min(3),
            within_block_corr: 0.5,
            effects: Effects::Fixed(vec![(1, 0.8)]),
            seed,
        })
        .unwrap()
        .0
    }

    fn continuous(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let y = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        let names = (0..p).map(|j| format!("x{j}")).collect();
        Dataset::new(Matrix::from_columns(&cols).unwrap(), y, names).unwrap()
    }

    #[test]
    fn gt_plug_in_values() {
        assert!((gt_log_density(0.0, &gt(4.0, 0.1)) - 5f64.ln()).abs() < 1e-12);
        assert!((gt_log_density(1.0, &gt(1.0, 1.0)) + 3.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn de_values_and_limit() {
        assert!((de_log_density(0.0, 1.0) + 2f64.ln()).abs() < 1e-15);
        assert!((de_log_density(1.0, 1.0) + 2f64.ln() + 1.0).abs() < 1e-15);
        let gap = gt_log_density(2.0, &gt(1e6, 1.0)) - de_log_density(2.0, 1.0);
        assert!(gap.abs() < 1e-5, "gap {gap}");
    }

    #[test]
    fn invalid_priors_are_rejected() {
        assert!(GtPrior::new(0.0, 1.0).is_err());
        assert!(GtPrior::new(1.0, -1.0).is_err());
        assert!(GtPrior::new(f64::NAN, 1.0).is_err());
        let p = GtPrior::from_rate(4.0, 2.0).unwrap();
        assert!((p.c() - 0.5).abs() < 1e-15);
        assert!((p.lambda_de() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn density_normalizes() {
        for a in [0.5, 1.0, 4.0, 100.0] {
            for c in [0.01, 0.1, 1.0] {
                let prior = gt(a, c);
                // ∫_0^∞ on a log grid: β = e^u, dβ = e^u du; doubled for symmetry.
                let grid = Grid::uniform((1e-14f64).ln(), (1e16f64).ln(), 8001).unwrap();
                let half = grid.integrate(|u| (prior.log_density(u.exp()) + u).exp());
                assert!((2.0 * half - 1.0).abs() < 1e-6, "a={a} c={c} mass={}", 2.0 * half);
            }
        }
    }

    #[test]
    fn mixture_oracle_examples() {
        let q = MixtureQuadrature::default();
        let v = gt_scale_mixture_oracle(0.0, &gt(1.0, 1.0), &q).unwrap();
        assert!((v - 0.5).abs() < 1e-6);
        let p = gt(2.0, 0.3);
        let v = gt_scale_mixture_oracle(0.5, &p, &q).unwrap();
        let exact = p.log_density(0.5).exp();
        assert!(((v - exact) / exact).abs() < 1e-6);
        assert!(gt_scale_mixture_oracle(0.5, &p, &MixtureQuadrature { nodes: 1 }).is_err());
    }

    #[test]
    fn heavier_tails_than_laplace() {
        let prior = gt(1.0, 1.0);
        let diff = |b: f64| prior.log_density(b) - de_log_density(b, 1.0);
        // Bisect for the crossing point beyond the origin.
        let (mut lo, mut hi) = (0.5, 20.0);
        assert!(diff(lo) < 0.0 && diff(hi) > 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if diff(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        for k in 1..200 {
            let b = hi + 0.05 * k as f64;
            assert!(diff(b) > 0.0 && diff(-b) > 0.0);
        }
    }

    #[test]
    fn likelihood_at_zero_and_scalar() {
        let data = toy(30, 3, 1);
        let (ll, cache) = log_likelihood(&data, &[0.0; 3]).unwrap();
        assert!((ll - 30.0 * 0.5f64.ln()).abs() < 1e-12);
        assert_eq!(cache.eta(), vec![0.0; 30].as_slice());

        let one = Dataset::new(Matrix::from_columns(&[vec![1.0]]).unwrap(), vec![1], vec!["x".into()]).unwrap();
        let (ll, _) = log_likelihood(&one, &[0.4578]).unwrap();
        // -ln(1 + e^-0.4578) evaluated to 17 digits separately.
        assert!((ll - (-0.490_219_160_473_097)).abs() < 1e-12, "{ll}");
        assert!(log_likelihood(&one, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn delta_updates_match_full_recompute() {
        let data = toy(80, 6, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut beta: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, mut cache) = log_likelihood(&data, &beta).unwrap();
        let same = cache.clone();
        log_likelihood_delta(&mut cache, &data, 2, beta[2], beta[2]).unwrap();
        assert_eq!(cache, same);
        for _ in 0..60 {
            let j = rng.gen_range(0..6);
            let new = rng.gen_range(-3.0..3.0);
            let v = log_likelihood_delta(&mut cache, &data, j, beta[j], new).unwrap();
            beta[j] = new;
            let (full, _) = log_likelihood(&data, &beta).unwrap();
            assert!((v - full).abs() < 1e-10);
        }
        assert!(log_likelihood_delta(&mut cache, &data, 6, 0.0, 1.0).is_err());
    }

    #[test]
    fn fast_proposals_match_exact_changes() {
        for data in [toy(120, 5, 3), continuous(120, 5, 3)] {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let mut beta: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, mut cache) = log_likelihood(&data, &beta).unwrap();
            let mut scratch = ProposalScratch::default();
            for step in 0..200 {
                let j = step % 5;
                let delta = rng.gen_range(-2.0..2.0);
                let change = cache.propose(&data, j, delta, &mut scratch);
                let mut moved = beta.clone();
                moved[j] += delta;
                let (full, _) = log_likelihood(&data, &moved).unwrap();
                assert!((cache.loglik() + change - full).abs() < 1e-9);
                if rng.gen_bool(0.5) {
                    cache.commit(&data, j, delta, change, &scratch);
                    beta = moved;
                }
            }
            let (full, exact) = log_likelihood(&data, &beta).unwrap();
            assert!((cache.loglik() - full).abs() < 1e-9);
            cache.refresh(&data);
            assert!((cache.loglik() - full).abs() < 1e-10);
            for (a, b) in cache.eta().iter().zip(exact.eta()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extreme_linear_predictors_stay_finite() {
        let data = continuous(50, 2, 9);
        let (ll, mut cache) = log_likelihood(&data, &[40.0, -35.0]).unwrap();
        assert!(ll.is_finite());
        let mut scratch = ProposalScratch::default();
        let change = cache.propose(&data, 0, -80.0, &mut scratch);
        let (full, _) = log_likelihood(&data, &[-40.0, -35.0]).unwrap();
        assert!((ll + change - full).abs() < 1e-8 * full.abs().max(1.0));
        cache.commit(&data, 0, -80.0, change, &scratch);
        assert!(cache.loglik().is_finite());
    }

    #[test]
    fn posterior_components() {
        let data = toy(40, 1, 5);
        let prior = gt(4.0, 0.1);
        let v = log_posterior_unnorm(&data, &[0.0], &prior).unwrap();
        assert!((v - (40.0 * 0.5f64.ln() + (1.0 / 0.2f64).ln())).abs() < 1e-12);

        let data = toy(40, 2, 6);
        let beta = [0.3, -0.7];
        let (ll, _) = log_likelihood(&data, &beta).unwrap();
        let manual = ll + prior.log_density(0.3) + prior.log_density(-0.7);
        assert!((log_posterior_unnorm(&data, &beta, &prior).unwrap() - manual).abs() < 1e-12);
        let other = gt(4.0, 0.7);
        let d1 = log_posterior_unnorm(&data, &beta, &prior).unwrap() - log_posterior_unnorm(&data, &beta, &other).unwrap();
        let d2 = log_prior(&data, &beta, &prior) - log_prior(&data, &beta, &other);
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn intercept_is_outside_prior() {
        let data = toy(40, 2, 6).with_intercept();
        let prior = gt(4.0, 0.1);
        let a = log_prior(&data, &[3.0, 0.1, 0.2], &prior);
        let b = log_prior(&data, &[-7.0, 0.1, 0.2], &prior);
        assert_eq!(a, b);
    }

    #[test]
    fn shrinkage_mean_edge_cases() {
        let q = ShrinkageQuadrature::default();
        let prior = gt(4.0, 0.1);
        assert_eq!(shrinkage_posterior_mean(0.0, &prior, &q).unwrap().abs() < 1e-15, true);
        let narrow = ShrinkageQuadrature { half_width: 1.0, nodes: 2001 };
        assert!(shrinkage_posterior_mean(1.0, &prior, &narrow).is_err());
        for k in -40..=40 {
            let y = 0.2 * k as f64;
            let m = shrinkage_posterior_mean(y, &prior, &q).unwrap();
            assert!(m.abs() <= y.abs() + 1e-12);
            if y != 0.0 {
                assert_eq!(m.signum(), y.signum());
            }
        }
    }

    #[test]
    fn threshold_formulas() {
        let (s, c) = sparsity_thresholds(4.0).unwrap();
        assert!((s - 5f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((c - 5f64.sqrt() / 4.0).abs() < 1e-15);
        let (s, c) = sparsity_thresholds(1.0).unwrap();
        assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((c - 2f64.sqrt()).abs() < 1e-15);
        assert!(sparsity_thresholds(0.0).is_err());
    }

    proptest! {
        #[test]
        fn gt_is_symmetric(x in -50.0f64..50.0, a in 0.1f64..50.0, c in 0.01f64..5.0) {
            let p = gt(a, c);
            prop_assert_eq!(p.log_density(x), p.log_density(-x));
        }

        #[test]
        fn delta_sequence_matches_full(seed in 0u64..1000) {
            let data = continuous(40, 4, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut beta = vec![0.0; 4];
            let (_, mut cache) = log_likelihood(&data, &beta).unwrap();
            let mut order: Vec<usize> = (0..4).collect();
            order.sort_by_key(|_| rng.gen::<u32>());
            for j in order {
                let new = rng.gen_range(-2.0..2.0);
                log_likelihood_delta(&mut cache, &data, j, beta[j], new).unwrap();
                beta[j] = new;
            }
            let (full, _) = log_likelihood(&data, &beta).unwrap();
            prop_assert!((cache.loglik() - full).abs() < 1e-9);
        }
    }
}
