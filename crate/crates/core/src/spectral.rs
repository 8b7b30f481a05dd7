//! Periodic quadrature and zero-forcing power thresholds.

use std::f64::consts::PI;

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Default absolute tolerance on integral values.
pub const QUAD_TOL: f64 = 1e-10;

const MIN_LEVEL: u32 = 10;
const MAX_LEVEL: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub grid_size: usize,
    /// Change from the previous (half-size) grid.
    pub est_error: f64,
}

/// `int_0^{2 pi} f(lambda) d lambda` by the rectangle rule on `lambda_k = 2 pi k / M`.
///
/// `M` starts at `2^10` and doubles, reusing previous samples, until two successive
/// values differ by at most `tol`. Fails when `M` would exceed `2^20` or the
/// integrand is not finite.
pub fn integrate_periodic<F>(f: F, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    let mut m = 1usize << MIN_LEVEL;
    let mut sum: CompensatedSum = (0..m).map(|k| f(2.0 * PI * k as f64 / m as f64)).collect();
    let mut prev = 2.0 * PI * sum.value() / m as f64;
    let mut est_error = f64::INFINITY;

    while m < 1usize << MAX_LEVEL {
        let m2 = 2 * m;
        for k in (1..m2).step_by(2) {
            sum.add(f(2.0 * PI * k as f64 / m2 as f64));
        }
        m = m2;
        let value = 2.0 * PI * sum.value() / m as f64;
        if !value.is_finite() {
            break;
        }
        est_error = (value - prev).abs();
        if est_error <= tol {
            return Ok(QuadratureResult {
                value,
                grid_size: m,
                est_error,
            });
        }
        prev = value;
    }
    Err(Error::QuadratureFailure {
        tol,
        est_error,
        grid_size: m,
    })
}

/// Asymptotic zero-forcing power `delta^2 / (2 pi) int 1 / |f(lambda)|^2 d lambda`,
/// above which the approximate capacity is one bit per use.
pub fn pbar_asymptotic(spec: &ChannelSpec) -> Result<f64> {
    let q = integrate_periodic(|l| 1.0 / spec.power_response(l), QUAD_TOL)?;
    let d2 = spec.delta() * spec.delta();
    Ok(d2 * q.value / (2.0 * PI))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "two-tap coefficient must satisfy |epsilon| < 1, got {epsilon}"
        )));
    }
    Ok(())
}

/// `delta^2 / (1 - epsilon^2)` for the channel `(1, epsilon)`.
pub fn pbar_two_tap(epsilon: f64, delta: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(delta * delta / (1.0 - epsilon * epsilon))
}

/// `delta^2 / (1 + epsilon)^2`, the per-use energy of `+-(1, ..., 1)` on `(1, epsilon)`.
pub fn pmin_two_tap(epsilon: f64, delta: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "two-tap coefficient must be nonnegative, got {epsilon}"
        )));
    }
    Ok(delta * delta / ((1.0 + epsilon) * (1.0 + epsilon)))
}
