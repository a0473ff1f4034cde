use crate::error::{Result, SpaError};

/// Geometric schedule `b_t = b1 · rho^(t-1)`, `t = 1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    b1: f64,
    rho: f64,
    values: Vec<f64>,
}

impl Schedule {
    pub fn new(b1: f64, rho: f64, steps: usize) -> Result<Self> {
        if !(b1 > 0.0) || !b1.is_finite() {
            return Err(SpaError::invalid(format!("b1 = {b1} must be > 0")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(SpaError::invalid(format!(
                "ratio rho = {rho} must lie in (0, 1) for a decreasing schedule"
            )));
        }
        if steps == 0 {
            return Err(SpaError::invalid("schedule needs at least one step"));
        }
        let values: Vec<f64> = (0..steps).map(|k| b1 * rho.powi(k as i32)).collect();
        if !(values[steps - 1] > 0.0) {
            return Err(SpaError::invalid("schedule underflows to zero"));
        }
        Ok(Schedule { b1, rho, values })
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `b_t` for 1-based `t`.
    pub fn b(&self, t: usize) -> f64 {
        self.values[t - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
