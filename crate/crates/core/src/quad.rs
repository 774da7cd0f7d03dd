//! Composite Simpson quadrature with interval doubling.

use crate::error::{Error, Result};

const MAX_INTERVALS: usize = 1 << 22;

/// Result of an adaptive-by-doubling Simpson integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// |S(2m) − S(m)| / 15 at the final refinement.
    pub error_estimate: f64,
    pub points: usize,
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let mut sum = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * k as f64);
    }
    sum * h / 3.0
}

/// Starts from `points` nodes (at least 129) and doubles until the Richardson
/// estimate drops below `tol / 10`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize, tol: f64) -> Result<Quadrature> {
    let mut m = points.max(129) - 1;
    m += m % 2;
    let mut prev = simpson(&f, a, b, m);
    if !prev.is_finite() {
        return Err(Error::SingularIntegrand(format!("non-finite integrand on [{a}, {b}]")));
    }
    loop {
        let next = simpson(&f, a, b, 2 * m);
        if !next.is_finite() {
            return Err(Error::SingularIntegrand(format!("non-finite integrand on [{a}, {b}]")));
        }
        let err = (next - prev).abs() / 15.0;
        m *= 2;
        if err <= tol / 10.0 || m >= MAX_INTERVALS {
            return Ok(Quadrature { value: next + (next - prev) / 15.0, error_estimate: err, points: m + 1 });
        }
        prev = next;
    }
}
