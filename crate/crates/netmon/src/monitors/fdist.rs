//! F-distribution quantiles via the inverse regularized incomplete beta
//! function.
//!
//! The forward regularized incomplete beta comes from `statrs`; the
//! inversion is a plain bisection on the CDF identity
//! `P(F <= q) = I_x(d1/2, d2/2)` with `x = d1 q / (d1 q + d2)`, run to
//! floating-point exhaustion, which is far inside the required 1e-8
//! relative accuracy.

use super::MonitorError;
use statrs::function::beta::beta_reg;

/// The p-quantile of the F(d1, d2) distribution.
pub fn f_quantile(p: f64, d1: u64, d2: u64) -> Result<f64, MonitorError> {
    if !(p > 0.0 && p < 1.0) || d1 == 0 || d2 == 0 {
        return Err(MonitorError::InvalidFParameters { p, d1, d2 });
    }
    let a = d1 as f64 / 2.0;
    let b = d2 as f64 / 2.0;
    // Invert I_x(a, b) = p for x in (0, 1); I is continuous and strictly
    // increasing there.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(d2 as f64 * x / (d1 as f64 * (1.0 - x)))
}
