//! Deterministic composite Newton-Cotes quadrature on uniform grids.
//!
//! Used by the analytic oracles (scale-mixture marginal, shrinkage curve,
//! one-dimensional posteriors). Never on the sampler hot path.

use crate::error::{Result, SpaError};

/// Composite rule weights for `nodes` equally spaced points with spacing `h`.
///
/// Simpson's rule when the interval count is even, Simpson plus a closing
/// 3/8 panel when it is odd, trapezoid for a single interval.
pub fn composite_weights(nodes: usize, h: f64) -> Result<Vec<f64>> {
    if nodes < 2 {
        return Err(SpaError::Quadrature(format!(
            "need at least 2 nodes, got {nodes}"
        )));
    }
    let intervals = nodes - 1;
    let mut w = vec![0.0; nodes];
    if intervals == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return Ok(w);
    }
    let simpson_intervals = if intervals % 2 == 0 {
        intervals
    } else {
        intervals - 3
    };
    for k in (0..simpson_intervals).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if simpson_intervals < intervals {
        let s = simpson_intervals;
        let f = 3.0 * h / 8.0;
        w[s] += f;
        w[s + 1] += 3.0 * f;
        w[s + 2] += 3.0 * f;
        w[s + 3] += f;
    }
    Ok(w)
}

/// A uniform grid on `[lo, hi]` with matching composite-rule weights.
#[derive(Debug, Clone)]
pub struct Grid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Grid {
    pub fn uniform(lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(SpaError::Quadrature(format!(
                "invalid interval [{lo}, {hi}]"
            )));
        }
        let weights = composite_weights(nodes, (hi - lo) / (nodes - 1) as f64)?;
        let h = (hi - lo) / (nodes - 1) as f64;
        let points = (0..nodes)
            .map(|k| if k + 1 == nodes { hi } else { lo + h * k as f64 })
            .collect();
        Ok(Grid { points, weights })
    }

    /// Uniform pieces joined at `breaks` (sorted, strictly inside `(lo, hi)`),
    /// so that kinks of the integrand fall on panel boundaries. Nodes are
    /// spread in proportion to piece length.
    pub fn piecewise(lo: f64, hi: f64, breaks: &[f64], nodes: usize) -> Result<Self> {
        let mut edges = vec![lo];
        edges.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
        edges.push(hi);
        let total = hi - lo;
        let mut grid = Grid {
            points: Vec::with_capacity(nodes + edges.len()),
            weights: Vec::with_capacity(nodes + edges.len()),
        };
        for pair in edges.windows(2) {
            let share = ((pair[1] - pair[0]) / total * nodes as f64).round() as usize;
            let piece = Grid::uniform(pair[0], pair[1], share.max(3))?;
            grid.points.extend(piece.points);
            grid.weights.extend(piece.weights);
        }
        Ok(grid)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `ln ∫ exp(log_f)` over the grid, stabilised by the maximum of `log_f`.
pub fn log_integrate(grid: &Grid, log_f: impl Fn(f64) -> f64) -> f64 {
    let logs: Vec<f64> = grid.points.iter().map(|&x| log_f(x)).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = logs
        .iter()
        .zip(&grid.weights)
        .map(|(&l, &w)| w * (l - m).exp())
        .sum();
    m + s.ln()
}
