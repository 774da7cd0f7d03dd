//! Proportion intervals, delta-method errors, and log-log fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval at 95%.
pub fn wilson(successes: u64, samples: u64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = samples as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == samples { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Standard error of g(p̂) by the first-order delta method with a central-difference gradient.
pub fn delta_se(p: &[f64], cov: &[Vec<f64>], g: impl Fn(&[f64]) -> f64) -> f64 {
    let m = p.len();
    let mut grad = vec![0.0; m];
    let mut x = p.to_vec();
    for j in 0..m {
        let h = (p[j].abs() * 1e-6).max(1e-12);
        x[j] = p[j] + h;
        let up = g(&x);
        x[j] = p[j] - h;
        let down = g(&x);
        x[j] = p[j];
        grad[j] = (up - down) / (2.0 * h);
    }
    let mut var = 0.0;
    for a in 0..m {
        for b in 0..m {
            var += grad[a] * grad[b] * cov[a][b];
        }
    }
    var.max(0.0).sqrt()
}

/// OLS line through (x_i, y_i).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Slope error from the regression residuals.
    pub stderr_slope: f64,
    /// Slope error propagated from the sampling variances of the y_i, when supplied.
    pub sampling_stderr: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

impl FitResult {
    /// 95% interval for the slope from the sampling error, falling back to the residual error.
    pub fn slope_ci(&self) -> (f64, f64) {
        let se = self.sampling_stderr.unwrap_or(self.stderr_slope);
        (self.slope - Z95 * se, self.slope + Z95 * se)
    }
}

/// Ordinary least squares; `var_y` are the sampling variances of independent y_i.
pub fn ols(points: &[(f64, f64)], var_y: Option<&[f64]>) -> Result<FitResult> {
    let m = points.len();
    if m < 3 {
        return Err(Error::InvalidParameter(format!("fit needs at least 3 points, got {m}")));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidParameter("non-finite fit point".into()));
    }
    let mf = m as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / mf;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = points.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit abscissae are all equal".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr_slope = (rss / (mf - 2.0) / sxx).sqrt();
    let sampling_stderr = var_y.map(|v| {
        points.iter().zip(v).map(|(p, var)| ((p.0 - xbar) / sxx).powi(2) * var).sum::<f64>().sqrt()
    });
    Ok(FitResult { slope, intercept, stderr_slope, sampling_stderr, points: points.to_vec() })
}

/// Fit of log p against log n; `p` must be positive.
pub fn fit_exponent(ns: &[f64], ps: &[f64], var_log_p: Option<&[f64]>) -> Result<FitResult> {
    if ns.len() != ps.len() {
        return Err(Error::DimensionMismatch { expected: ns.len(), got: ps.len() });
    }
    if let Some(i) = ps.iter().position(|&p| p <= 0.0) {
        return Err(Error::InvalidParameter(format!("estimate at n = {} is zero", ns[i])));
    }
    if ns.iter().any(|&n| n <= 0.0) {
        return Err(Error::InvalidParameter("scales must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = ns.iter().zip(ps).map(|(n, p)| (n.ln(), p.ln())).collect();
    ols(&pts, var_log_p)
}
