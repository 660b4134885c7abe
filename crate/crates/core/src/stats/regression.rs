use serde::{Deserialize, Serialize};

use super::special::beta_inc;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation.
    pub r: f64,
    /// Two-tailed p-value of the slope (t-test on r, n − 2 degrees of freedom).
    pub p_value: f64,
    pub n: usize,
}

impl RegressionResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Two-tailed survival probability `2·P(T ≥ |t|)` of Student's t with `df`
/// degrees of freedom, via `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn t_sf(t: f64, df: u32) -> Result<f64> {
    if df < 1 {
        return Err(Error::Domain("t distribution needs df >= 1".into()));
    }
    if t.is_nan() {
        return Err(Error::Domain("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let df = f64::from(df);
    let x = df / (df + t * t);
    beta_inc(df / 2.0, 0.5, x).map(|p| p.clamp(0.0, 1.0))
}

/// Ordinary least squares of `y` on `x` with Pearson r and its two-tailed
/// p-value. Sums are taken on centered data.
///
/// Constant `y` yields slope 0, r = 0, p = 1. With n = 2 the fit is exact and
/// the p-value is reported as 1 (no residual degrees of freedom).
pub fn ols_regression(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::InsufficientData(format!(
            "x has {} values, y has {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "{n} points, need at least 2"
        )));
    }
    let nf = n as f64;
    let x_mean = x.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - x_mean;
        let dy = yi - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateRegressor);
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    if syy == 0.0 {
        return Ok(RegressionResult {
            slope: 0.0,
            intercept: y_mean,
            r: 0.0,
            p_value: 1.0,
            n,
        });
    }

    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let p_value = if n < 3 {
        1.0
    } else if r.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as u32;
        let t = r * ((n - 2) as f64 / (1.0 - r * r)).sqrt();
        t_sf(t, df)?
    };
    Ok(RegressionResult {
        slope,
        intercept,
        r,
        p_value,
        n,
    })
}
