//! Posterior modes by EM on the scale-mixture representation.
//!
//! Each EM step replaces the generalized-t log prior by a weighted L1
//! penalty with weights `w_j = (a_j + 1)/(a_j c_j + |β_j|)` (the conditional
//! expectation of the inverse Laplace scale) and solves the resulting convex
//! penalized logistic regression.

use crate::data::Dataset;
use crate::error::{Result, SpaError};
use crate::model::{log_posterior_unnorm, sigmoid, PriorLookup};

/// Adaptive L1 weights `(a_j + 1) / (a_j c_j + |β_j|)`.
pub fn em_weights<P: PriorLookup + ?Sized>(beta: &[f64], prior: &P) -> Vec<f64> {
    beta.iter()
        .enumerate()
        .map(|(j, b)| {
            let pj = prior.prior(j);
            (pj.a() + 1.0) / (pj.b() + b.abs())
        })
        .collect()
}

/// Result of the inner weighted-L1 solve.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Fit {
    pub beta: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    /// Largest subgradient violation at `beta`.
    pub kkt: f64,
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Largest violation of the optimality conditions of
/// `max_β log f(y|X,β) − Σ w_j |β_j|` at `beta`, given the fitted
/// probabilities.
fn kkt_from_probs(data: &Dataset, w: &[f64], beta: &[f64], prob: &[f64]) -> f64 {
    (0..data.p())
        .map(|j| {
            let g = gradient(data, j, prob);
            if beta[j] == 0.0 {
                (g.abs() - w[j]).max(0.0)
            } else {
                (g - beta[j].signum() * w[j]).abs()
            }
        })
        .fold(0.0, f64::max)
}

fn gradient(data: &Dataset, j: usize, prob: &[f64]) -> f64 {
    data.column(j)
        .iter()
        .zip(data.y())
        .zip(prob)
        .map(|((x, y), p)| x * (y - p))
        .sum()
}

/// KKT residual of the weighted-L1 problem at `beta`.
pub fn kkt_residual(data: &Dataset, w: &[f64], beta: &[f64]) -> Result<f64> {
    check_dims(data, w, beta)?;
    let prob: Vec<f64> = data.x().mul_vec(beta)?.into_iter().map(sigmoid).collect();
    Ok(kkt_from_probs(data, w, beta, &prob))
}

fn check_dims(data: &Dataset, w: &[f64], beta: &[f64]) -> Result<()> {
    for len in [w.len(), beta.len()] {
        if len != data.p() {
            return Err(SpaError::DimensionMismatch {
                expected: data.p(),
                actual: len,
            });
        }
    }
    Ok(())
}

/// Maximize `log f(y|X,β) − Σ_j w_j |β_j|` by cyclic coordinate descent on
/// the quadratic majorizer with curvature `¼ Σ_i X_ij²`, soft-thresholding
/// each coordinate. Stops once the KKT residual is below `tol`.
pub fn weighted_l1_logistic(
    data: &Dataset,
    w: &[f64],
    beta_init: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<L1Fit> {
    check_dims(data, w, beta_init)?;
    if let Some(bad) = w.iter().find(|v| !(**v >= 0.0)) {
        return Err(SpaError::invalid(format!("penalty weight {bad} must be >= 0")));
    }
    if !(tol > 0.0) {
        return Err(SpaError::invalid("tolerance must be > 0"));
    }
    let curvature: Vec<f64> = (0..data.p())
        .map(|j| 0.25 * data.column(j).iter().map(|x| x * x).sum::<f64>())
        .collect();
    let mut beta = beta_init.to_vec();
    let mut eta = data.x().mul_vec(&beta)?;
    let mut prob: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
    let mut kkt = kkt_from_probs(data, w, &beta, &prob);
    let mut sweeps = 0;
    while kkt >= tol && sweeps < max_iter {
        for j in 0..data.p() {
            if curvature[j] == 0.0 {
                continue;
            }
            let g = gradient(data, j, &prob);
            let new = soft_threshold(beta[j] + g / curvature[j], w[j] / curvature[j]);
            let delta = new - beta[j];
            if delta != 0.0 {
                for ((e, p), &x) in eta.iter_mut().zip(prob.iter_mut()).zip(data.column(j)) {
                    *e += x * delta;
                    *p = sigmoid(*e);
                }
                beta[j] = new;
            }
        }
        sweeps += 1;
        kkt = kkt_from_probs(data, w, &beta, &prob);
    }
    Ok(L1Fit {
        beta,
        converged: kkt < tol,
        sweeps,
        kkt,
    })
}

/// Tolerances and iteration caps for [`em_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            tol: 1e-6,
            max_iter: 500,
            inner_tol: 1e-8,
            inner_max_iter: 10_000,
        }
    }
}

/// One EM iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct EmState {
    pub beta: Vec<f64>,
    /// Penalty weights computed from `beta`; zero on unpenalized coordinates.
    pub weights: Vec<f64>,
    pub log_post: f64,
    pub iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub beta: Vec<f64>,
    pub log_post: f64,
    pub trace: Vec<EmState>,
    /// Outer loop met `tol` before `max_iter`.
    pub converged: bool,
    /// Every inner solve met its KKT tolerance.
    pub inner_converged: bool,
}

fn penalty_weights<P: PriorLookup + ?Sized>(data: &Dataset, beta: &[f64], prior: &P) -> Vec<f64> {
    let mut w = em_weights(beta, prior);
    for (j, wj) in w.iter_mut().enumerate() {
        if !data.is_penalized(j) {
            *wj = 0.0;
        }
    }
    w
}

/// Local posterior mode reached by EM from `beta_init`.
pub fn em_map<P: PriorLookup + ?Sized>(data: &Dataset, prior: &P, beta_init: &[f64], config: &EmConfig) -> Result<EmFit> {
    if beta_init.len() != data.p() {
        return Err(SpaError::DimensionMismatch {
            expected: data.p(),
            actual: beta_init.len(),
        });
    }
    if let Some(len) = prior.len_hint() {
        if len != data.p() {
            return Err(SpaError::DimensionMismatch {
                expected: data.p(),
                actual: len,
            });
        }
    }
    let mut beta = beta_init.to_vec();
    let mut trace = vec![EmState {
        weights: penalty_weights(data, &beta, prior),
        log_post: log_posterior_unnorm(data, &beta, prior)?,
        beta: beta.clone(),
        iter: 0,
    }];
    let mut converged = false;
    let mut inner_converged = true;
    for iter in 1..=config.max_iter {
        let w = &trace.last().expect("trace starts non-empty").weights;
        let fit = weighted_l1_logistic(data, w, &beta, config.inner_tol, config.inner_max_iter)?;
        inner_converged &= fit.converged;
        let step = fit
            .beta
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        beta = fit.beta;
        trace.push(EmState {
            weights: penalty_weights(data, &beta, prior),
            log_post: log_posterior_unnorm(data, &beta, prior)?,
            beta: beta.clone(),
            iter,
        });
        if step < config.tol {
            converged = true;
            break;
        }
    }
    let log_post = trace.last().expect("non-empty").log_post;
    Ok(EmFit {
        beta,
        log_post,
        trace,
        converged,
        inner_converged,
    })
}
