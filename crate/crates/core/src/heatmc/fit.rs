//! Weighted least-squares fit of `Q(t) = c0 - c1 sqrt(t) + c2 t`.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::Serialize;

use super::HeatContentEstimate;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionFit {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub covariance: [[f64; 3]; 3],
    pub t_grid: Vec<f64>,
    /// `sqrt(sum w_i r_i^2)`.
    pub residual_norm: f64,
    pub condition_number: f64,
}

impl ExpansionFit {
    pub fn coefficients(&self) -> [f64; 3] {
        [self.c0, self.c1, self.c2]
    }

    pub fn std_errs(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| self.covariance[k][k].sqrt())
    }

    pub fn predict(&self, t: f64) -> f64 {
        self.c0 - self.c1 * t.sqrt() + self.c2 * t
    }
}

const MAX_CONDITION: f64 = 1e8;

/// Fit over the points' `(t, q_hat)` with weights `1 / std_err^2`; unit weights
/// when any standard error is zero. Columns are scaled to unit norm before
/// solving, which leaves the coefficients unchanged.
pub fn fit_expansion(points: &[HeatContentEstimate]) -> Result<ExpansionFit> {
    let mut ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.len() < 4 || ts[ts.len() - 1] < 10.0 * ts[0] * (1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!("fit needs at least 4 distinct times spanning a decade, got {ts:?}")));
    }
    let unit = points.iter().any(|p| !(p.std_err > 0.0));
    let n = points.len();
    let sw: Vec<f64> = points.iter().map(|p| if unit { 1.0 } else { 1.0 / p.std_err }).collect();
    let x = DMatrix::from_fn(n, 3, |i, j| sw[i] * [1.0, -points[i].t.sqrt(), points[i].t][j]);
    let y = DVector::from_fn(n, |i, _| sw[i] * points[i].q_hat);
    let scale: Vec<f64> = (0..3).map(|j| x.column(j).norm()).collect();
    let xs = DMatrix::from_fn(n, 3, |i, j| x[(i, j)] / scale[j]);
    let svd = xs.clone().svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let beta_s = svd.solve(&y, 0.0).map_err(|e| Error::ConvergenceFailure(e.to_string()))?;
    let beta: Vec<f64> = (0..3).map(|j| beta_s[j] / scale[j]).collect();
    let resid = &y - &x * DVector::from_column_slice(&beta);
    let rss = resid.norm_squared();
    let gram_s = xs.transpose() * &xs;
    let inv_s: Matrix3<f64> = Matrix3::from_fn(|i, j| gram_s[(i, j)]).try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    // with unit weights the noise level comes from the residuals
    let sigma2 = if unit {
        if n > 3 {
            rss / (n - 3) as f64
        } else {
            0.0
        }
    } else {
        1.0
    };
    let covariance = std::array::from_fn(|i| std::array::from_fn(|j| sigma2 * inv_s[(i, j)] / (scale[i] * scale[j])));
    Ok(ExpansionFit { c0: beta[0], c1: beta[1], c2: beta[2], covariance, t_grid: ts, residual_norm: rss.sqrt(), condition_number: cond })
}
