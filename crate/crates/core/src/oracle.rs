//! Grid-based reference posteriors for single-coefficient models.
//!
//! With one coefficient the posterior, its CDF and the marginal likelihood
//! can be computed by direct quadrature. These serve as independent checks
//! of the samplers and are exposed so the CLI can report against them.

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Result, SpaError};
use crate::model::{gt_log_density, softplus, GtPrior};
use crate::quadrature::composite_weights;

/// Posterior of the single coefficient of a `p = 1` model on a symmetric
/// grid that has the prior's kink at 0 on a panel boundary.
#[derive(Debug, Clone)]
pub struct Posterior1d {
    points: Vec<f64>,
    /// Unnormalized log density `log f(y|β) + log Gt(β)` at each point.
    log_gamma: Vec<f64>,
    /// Normalized density.
    density: Vec<f64>,
    /// Trapezoid CDF at each point.
    cdf: Vec<f64>,
    log_evidence: f64,
}

const EDGE_LOG_RATIO: f64 = -30.0;

impl Posterior1d {
    /// Grid of `4m + 1` points on `[-half_width, half_width]`; the window is
    /// doubled until the density at the edges is negligible.
    pub fn new(data: &Dataset, prior: &GtPrior, half_width: f64, m: usize) -> Result<Self> {
        if data.p() != 1 || data.has_intercept() {
            return Err(SpaError::invalid("one-dimensional oracle needs a single penalized coefficient"));
        }
        if m == 0 || !(half_width > 0.0) {
            return Err(SpaError::Quadrature("empty grid".into()));
        }
        let x = data.column(0);
        let y = data.y();
        let mut w = half_width;
        for _ in 0..12 {
            let nodes = 4 * m + 1;
            let h = w / (2 * m) as f64;
            let points: Vec<f64> = (0..nodes).map(|k| (k as f64 - (2 * m) as f64) * h).collect();
            let log_gamma: Vec<f64> = points
                .iter()
                .map(|&b| {
                    let ll: f64 = x
                        .iter()
                        .zip(y)
                        .map(|(&xi, &yi)| {
                            let eta = xi * b;
                            yi * eta - softplus(eta)
                        })
                        .sum();
                    ll + gt_log_density(b, prior)
                })
                .collect();
            let max = log_gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let edge = log_gamma[0].max(log_gamma[nodes - 1]) - max;
            if edge > EDGE_LOG_RATIO {
                w *= 2.0;
                continue;
            }
            let weights = composite_weights(nodes, h)?;
            let rel: Vec<f64> = log_gamma.iter().map(|l| (l - max).exp()).collect();
            let mass: f64 = rel.iter().zip(&weights).map(|(r, w)| r * w).sum();
            let density: Vec<f64> = rel.iter().map(|r| r / mass).collect();
            let mut cdf = vec![0.0; nodes];
            for k in 1..nodes {
                cdf[k] = cdf[k - 1] + 0.5 * h * (density[k] + density[k - 1]);
            }
            let total = cdf[nodes - 1];
            for v in cdf.iter_mut() {
                *v /= total;
            }
            return Ok(Posterior1d {
                points,
                log_gamma,
                density,
                cdf,
                log_evidence: max + mass.ln(),
            });
        }
        Err(SpaError::Quadrature("posterior window failed to cover the mass".into()))
    }

    /// Default resolution: 80,001 points starting from `[-10, 10]`.
    pub fn with_defaults(data: &Dataset, prior: &GtPrior) -> Result<Self> {
        Posterior1d::new(data, prior, 10.0, 20_000)
    }

    /// `ln Z = ln ∫ f(y|β) Gt(β) dβ`.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn log_gamma(&self) -> &[f64] {
        &self.log_gamma
    }

    /// CDF by linear interpolation of the trapezoid CDF.
    pub fn cdf(&self, b: f64) -> f64 {
        let k = self.points.partition_point(|&x| x <= b);
        if k == 0 {
            return 0.0;
        }
        if k == self.points.len() {
            return 1.0;
        }
        let (x0, x1) = (self.points[k - 1], self.points[k]);
        let t = (b - x0) / (x1 - x0);
        self.cdf[k - 1] + t * (self.cdf[k] - self.cdf[k - 1])
    }

    /// Inverse of [`Self::cdf`].
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let k = self.cdf.partition_point(|&c| c < q);
        if k == 0 {
            return self.points[0];
        }
        if k == self.cdf.len() {
            return *self.points.last().expect("non-empty grid");
        }
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let t = if c1 > c0 { (q - c0) / (c1 - c0) } else { 0.0 };
        self.points[k - 1] + t * (self.points[k] - self.points[k - 1])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Exact-in-distribution draw by inverting the interpolated CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

/// `ln Z(c)` for a `p = 1` model, by quadrature.
pub fn log_evidence_1d(data: &Dataset, prior: &GtPrior) -> Result<f64> {
    Ok(Posterior1d::with_defaults(data, prior)?.log_evidence())
}
