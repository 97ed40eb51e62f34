//! Real-space samples of a scalar field on the uniform N^3 grid of [0, 2pi)^3.

use crate::error::{Error, Result};

/// Uniformly sampled real field. Quadrature conventions follow the
/// normalised Haar measure: integrals are plain grid averages.
#[derive(Debug, Clone)]
pub struct GridField {
    n_grid: usize,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(n_grid: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_grid * n_grid * n_grid {
            return Err(Error::InvalidInput(format!(
                "expected {} samples for an n_grid of {n_grid}, got {}",
                n_grid * n_grid * n_grid,
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite grid sample".into()));
        }
        Ok(GridField { n_grid, values })
    }

    pub fn constant(n_grid: usize, value: f64) -> Self {
        GridField {
            n_grid,
            values: vec![value; n_grid * n_grid * n_grid],
        }
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Grid average of `f(v)` over all samples.
    pub fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        let sum: f64 = self.values.iter().map(|&v| f(v)).sum();
        sum / self.values.len() as f64
    }

    /// L^p norm under the normalised measure; `p = f64::INFINITY` gives the
    /// max norm. Fails for p < 1.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_raw(&self.values, p)
    }
}

/// L^p norm of raw grid samples under the normalised measure. Shared by
/// `GridField::lp_norm` and the slice loops that reuse one buffer.
pub fn lp_norm_raw(values: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidInput(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())));
    }
    // Exact powers are the common case (2, 3, 4, 6); powi is much cheaper
    // and bit-stable compared to powf.
    let sum: f64 = if p.fract() == 0.0 && p <= 64.0 {
        let k = p as i32;
        values.iter().map(|&v| v.abs().powi(k)).sum()
    } else {
        values.iter().map(|&v| v.abs().powf(p)).sum()
    };
    Ok((sum / values.len() as f64).powf(1.0 / p))
}
