#![allow(dead_code)]

use spa_core::data::simulate_dataset;
use spa_core::{Dataset, Effects, SimSpec};

fn log1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Log joint density of a one-column logistic model under Gt(a, c).
pub fn log_joint(x: &[f64], y: &[f64], b: f64, a: f64, c: f64) -> f64 {
    let ll: f64 = x.iter().zip(y).map(|(&xi, &yi)| yi * xi * b - log1pexp(xi * b)).sum();
    ll - (2.0 * c).ln() - (a + 1.0) * (b.abs() / (a * c)).ln_1p()
}

/// Trapezoid posterior for one coefficient on `[-w, w]` with `2m + 1` points.
pub struct Grid {
    pub points: Vec<f64>,
    pub logs: Vec<f64>,
    pub cdf: Vec<f64>,
    pub log_z: f64,
}

impl Grid {
    pub fn new(data: &Dataset, a: f64, c: f64, w: f64, m: usize) -> Self {
        let (x, y) = (data.column(0), data.y());
        let h = w / m as f64;
        let points: Vec<f64> = (0..=2 * m).map(|k| -w + k as f64 * h).collect();
        let logs: Vec<f64> = points.iter().map(|&b| log_joint(x, y, b, a, c)).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(logs[0] - max < -30.0 && logs[2 * m] - max < -30.0, "grid too narrow");
        let dens: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let mut cdf = vec![0.0; points.len()];
        for k in 1..points.len() {
            cdf[k] = cdf[k - 1] + 0.5 * h * (dens[k] + dens[k - 1]);
        }
        let mass = cdf[2 * m];
        cdf.iter_mut().for_each(|v| *v /= mass);
        Grid {
            points,
            logs,
            cdf,
            log_z: max + mass.ln(),
        }
    }

    pub fn cdf_at(&self, b: f64) -> f64 {
        let k = self.points.partition_point(|&p| p <= b);
        if k == 0 {
            return 0.0;
        }
        if k == self.points.len() {
            return 1.0;
        }
        let (p0, p1) = (self.points[k - 1], self.points[k]);
        let s = (b - p0) / (p1 - p0);
        self.cdf[k - 1] + s * (self.cdf[k] - self.cdf[k - 1])
    }

    pub fn quantile(&self, q: f64) -> f64 {
        let k = self.cdf.partition_point(|&v| v < q).max(1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let s = if c1 > c0 { (q - c0) / (c1 - c0) } else { 0.0 };
        self.points[k - 1] + s * (self.points[k] - self.points[k - 1])
    }

    pub fn mode(&self) -> f64 {
        let k = (0..self.logs.len()).fold(0, |best, k| if self.logs[k] > self.logs[best] { k } else { best });
        self.points[k]
    }
}

pub fn one_column(n: usize, effect: f64, seed: u64) -> Dataset {
    simulate_dataset(&SimSpec {
        n,
        p: 1,
        block_size: 1,
        within_block_corr: 0.0,
        effects: Effects::Fixed(vec![(1, effect)]),
        seed,
    })
    .unwrap()
    .0
}

/// 200 subjects, 10 markers in blocks of 5, two true effects.
pub fn scenario_a_small(seed: u64) -> (Dataset, Vec<f64>) {
    simulate_dataset(&SimSpec {
        n: 200,
        p: 10,
        block_size: 5,
        within_block_corr: 0.7,
        effects: Effects::Fixed(vec![(3, 0.7), (8, -0.6)]),
        seed,
    })
    .unwrap()
}

pub fn pure_noise(n: usize, p: usize, seed: u64) -> Dataset {
    simulate_dataset(&SimSpec {
        n,
        p,
        block_size: 1,
        within_block_corr: 0.0,
        effects: Effects::Fixed(vec![]),
        seed,
    })
    .unwrap()
    .0
}

pub fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for i in idx {
        acc += weights[i];
        if acc >= 0.5 * total {
            return values[i];
        }
    }
    unreachable!()
}
