//! Weighted least-squares line fits, the workhorse behind every slope
//! estimate in the crate (log-log dimension fits, decay exponents, overlap
//! scalings).

use crate::{Error, Result};

/// Result of a straight-line fit y = intercept + slope * x.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r2: f64,
}

/// Exponent fit on log-log data together with its diagnostics.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ExponentFit {
    /// Fitted slope of log y vs log x.
    pub exponent: f64,
    pub stderr: f64,
    pub r2: f64,
}

/// r² below which a log-log fit is not considered a power law.
pub const POWER_LAW_R2_MIN: f64 = 0.995;

impl ExponentFit {
    /// Whether the log-log data was actually linear (power-law behaviour).
    pub fn is_power_law(&self) -> bool {
        self.r2 >= POWER_LAW_R2_MIN
    }
}

/// Weighted least squares of y against x. `weights = None` means uniform.
pub fn weighted_line_fit(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidParameter(format!(
            "x/y length mismatch: {} vs {}",
            n,
            y.len()
        )));
    }
    if n < 3 {
        return Err(Error::TooShort { have: n, need: 3 });
    }
    let uniform = vec![1.0; n];
    let w = weights.unwrap_or(&uniform);
    if w.len() != n || w.iter().any(|&wi| !(wi > 0.0) || !wi.is_finite()) {
        return Err(Error::InvalidParameter(
            "weights must be positive and finite".into(),
        ));
    }

    let sw: f64 = w.iter().sum();
    let xb = x.iter().zip(w).map(|(xi, wi)| wi * xi).sum::<f64>() / sw;
    let yb = y.iter().zip(w).map(|(yi, wi)| wi * yi).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - xb;
        let dy = y[i] - yb;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::Degenerate("zero spread in x".into()));
    }
    let slope = sxy / sxx;
    let intercept = yb - slope * xb;

    let mut ss_res = 0.0;
    for i in 0..n {
        let r = y[i] - intercept - slope * x[i];
        ss_res += w[i] * r * r;
    }
    let dof = (n - 2) as f64;
    let slope_stderr = (ss_res / dof / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };

    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        r2,
    })
}

/// Log-log power-law fit of y against x. All inputs must be positive.
pub fn log_log_fit(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<ExponentFit> {
    if x.iter().chain(y).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "log-log fit requires positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let fit = weighted_line_fit(&lx, &ly, weights)?;
    Ok(ExponentFit {
        exponent: fit.slope,
        stderr: fit.slope_stderr,
        r2: fit.r2,
    })
}

/// Least-squares coefficient c for the through-origin model y = c * x.
pub fn proportional_fit(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidParameter("empty or mismatched data".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("zero x data".into()));
    }
    Ok(sxy / sxx)
}

/// Geometrically spaced grid from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0 && n >= 2);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
}
