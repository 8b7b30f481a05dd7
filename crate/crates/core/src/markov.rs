//! Zero-forcing with a two-state Markov input.
//!
//! Information signs `b` follow a symmetric Markov chain that stays in its state with
//! probability `alpha`; the transmitter sends `x = delta M_h^{-1} b`, so the channel
//! output is exactly `delta b` and the rate is the chain's entropy rate `H_2(alpha)`.
//! The sign correlation decays as `E[b_n b_{n+d}] = rho^d` with `rho = 2 alpha - 1`,
//! which fixes the transmit power.

use std::f64::consts::PI;

use crate::channel::{ChannelOperators, ChannelSpec};
use crate::error::{Error, Result};
use crate::numeric::{binary_entropy, compensated_sum};
use crate::spectral::{integrate_periodic, QUAD_TOL};

/// Largest block length for [`power_finite_n`].
pub const DENSE_CAP: usize = 4096;

/// Bisection tolerance on `alpha`.
pub const ALPHA_TOL: f64 = 1e-10;

// Coarse scan resolution on each side of 1/2 before bisecting.
const ALPHA_SCAN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovScheme {
    alpha: f64,
    rho: f64,
}

impl MarkovScheme {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "self-transition probability must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(MarkovScheme {
            alpha,
            rho: 2.0 * alpha - 1.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Correlation decay `2 alpha - 1`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn transition_matrix(&self) -> [[f64; 2]; 2] {
        let a = self.alpha;
        [[a, 1.0 - a], [1.0 - a, a]]
    }

    /// `E[b_n b_{n+d}] = rho^d`.
    pub fn correlation(&self, d: u32) -> f64 {
        if d == 0 {
            1.0
        } else {
            self.rho.powi(d as i32)
        }
    }

    /// `H_2(alpha)` in bits per symbol.
    pub fn entropy_rate_bits(&self) -> f64 {
        binary_entropy(self.alpha)
    }
}

/// Finite-block power `(delta^2 / N) tr(R M_h^{-1} M_h^{-T})` with the exact Toeplitz
/// correlation `R_ij = rho^{|i - j|}`.
///
/// `M_h^{-1} M_h^{-T}` is the circulant `G`, so the trace collapses to a sum over lags:
/// `sum_{|d| < N} (N - |d|) rho^{|d|} g[d mod N]`.
pub fn power_finite_n(ops: &ChannelOperators, scheme: &MarkovScheme) -> Result<f64> {
    let n = ops.block_len();
    if n > DENSE_CAP {
        return Err(Error::TooLarge { n, cap: DENSE_CAP });
    }
    let g = ops.gram_row();
    let rho = scheme.rho();
    let mut rho_d = 1.0;
    let lags = (1..n).map(|d| {
        rho_d *= rho;
        (n - d) as f64 * rho_d * (g[d] + g[n - d])
    });
    let trace = compensated_sum(std::iter::once(n as f64 * g[0]).chain(lags));
    let delta = ops.delta();
    Ok(delta * delta * trace / n as f64)
}

/// Asymptotic power
/// `delta^2 / (2 pi) int |f|^{-2} [2 (1 - rho cos) / (1 + rho^2 - 2 rho cos) - 1] d lambda`.
///
/// The bracket equals the Poisson kernel `(1 - rho^2) / (1 + rho^2 - 2 rho cos lambda)`,
/// which integrates to `2 pi` and peaks at `0` (`rho > 0`) or `pi` (`rho < 0`). Its
/// mass at the peak is integrated exactly and only the remainder goes to the quadrature,
/// which keeps the rule convergent as `|rho| -> 1`. At `|rho| = 1` the limit
/// `delta^2 / |f(peak)|^2` is returned.
pub fn power_asymptotic(spec: &ChannelSpec, scheme: &MarkovScheme) -> Result<f64> {
    let rho = scheme.rho();
    let d2 = spec.delta() * spec.delta();
    let peak = if rho >= 0.0 { 0.0 } else { PI };
    let w_peak = 1.0 / spec.power_response(peak);
    if !w_peak.is_finite() {
        return Err(Error::InvalidChannel(format!(
            "frequency response vanishes at lambda = {peak}"
        )));
    }
    if rho.abs() >= 1.0 {
        return Ok(d2 * w_peak);
    }
    // Denominator rewritten around the peak so it does not cancel to zero as |rho| -> 1.
    let kernel = |l: f64| {
        let den = if rho >= 0.0 {
            (1.0 - rho).powi(2) + 4.0 * rho * (0.5 * l).sin().powi(2)
        } else {
            (1.0 + rho).powi(2) - 4.0 * rho * (0.5 * l).cos().powi(2)
        };
        (1.0 - rho) * (1.0 + rho) / den
    };
    let rest = integrate_periodic(|l| (1.0 / spec.power_response(l) - w_peak) * kernel(l), QUAD_TOL)?;
    Ok(d2 * (w_peak + rest.value / (2.0 * PI)))
}

/// Power model used as the constraint in rate maximization.
#[derive(Debug, Clone, Copy)]
pub enum PowerModel<'a> {
    /// [`power_asymptotic`]: the large-block limit.
    Asymptotic,
    /// [`power_finite_n`] at the block length of the given operators.
    FiniteBlock(&'a ChannelOperators),
}

impl PowerModel<'_> {
    pub fn power(&self, spec: &ChannelSpec, scheme: &MarkovScheme) -> Result<f64> {
        match self {
            PowerModel::Asymptotic => power_asymptotic(spec, scheme),
            PowerModel::FiniteBlock(ops) => power_finite_n(ops, scheme),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSolution {
    pub rate_bits: f64,
    /// Optimal self-transition probability; `None` when no `alpha` is feasible.
    pub alpha_star: Option<f64>,
}

/// `R_m(P) = max H_2(alpha)` subject to the asymptotic power constraint.
pub fn achievable_rate(spec: &ChannelSpec, power: f64) -> Result<f64> {
    optimize_rate(spec, power, PowerModel::Asymptotic).map(|r| r.rate_bits)
}

/// Maximizes `H_2(alpha)` over `alpha` in `[0, 1]` with `P_zm(alpha) <= power`.
///
/// `H_2` is symmetric and unimodal around `1/2`, so on each side the best feasible
/// `alpha` is the one closest to `1/2`. Each side is scanned outward from `1/2` to find
/// the first feasible grid point, then the crossing is refined by bisection.
pub fn optimize_rate(spec: &ChannelSpec, power: f64, model: PowerModel<'_>) -> Result<RateSolution> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "power must be positive, got {power}"
        )));
    }
    let power_at = |alpha: f64| model.power(spec, &MarkovScheme::new(alpha)?);
    if power_at(0.5)? <= power {
        return Ok(RateSolution {
            rate_bits: 1.0,
            alpha_star: Some(0.5),
        });
    }

    let mut best: Option<f64> = None;
    for end in [1.0, 0.0] {
        if let Some(alpha) = nearest_feasible(&power_at, end, power)? {
            let better = best.is_none_or(|b| binary_entropy(alpha) > binary_entropy(b));
            if better {
                best = Some(alpha);
            }
        }
    }
    Ok(RateSolution {
        rate_bits: best.map_or(0.0, binary_entropy),
        alpha_star: best,
    })
}

// Feasible alpha closest to 1/2 on the segment from 1/2 to `end`.
fn nearest_feasible<F>(power_at: &F, end: f64, power: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let point = |k: usize| 0.5 + (end - 0.5) * k as f64 / ALPHA_SCAN as f64;
    let mut infeasible = 0.5;
    let mut feasible = None;
    for k in 1..=ALPHA_SCAN {
        let a = point(k);
        if power_at(a)? <= power {
            feasible = Some(a);
            break;
        }
        infeasible = a;
    }
    let Some(mut feasible) = feasible else {
        return Ok(None);
    };
    while (feasible - infeasible).abs() > ALPHA_TOL {
        let mid = 0.5 * (feasible + infeasible);
        if power_at(mid)? <= power {
            feasible = mid;
        } else {
            infeasible = mid;
        }
    }
    Ok(Some(feasible))
}

/// Optimal `alpha` for the channel `(1, epsilon)`: `None` below `delta^2 / (1 + epsilon)^2`,
/// `1/2` from `delta^2 / (1 - epsilon^2)` upward.
pub fn two_tap_closed_form_alpha(epsilon: f64, delta: f64, power: f64) -> Result<Option<f64>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "closed form requires 0 < epsilon < 1, got {epsilon}"
        )));
    }
    let d2 = delta * delta;
    let p_low = d2 / ((1.0 + epsilon) * (1.0 + epsilon));
    let p_high = d2 / (1.0 - epsilon * epsilon);
    if power >= p_high {
        return Ok(Some(0.5));
    }
    if power < p_low {
        return Ok(None);
    }
    let u = power / d2 * (1.0 - epsilon * epsilon);
    let alpha = 0.5 + (1.0 - u) / (1.0 + u) / (2.0 * epsilon);
    Ok(Some(alpha.clamp(0.5, 1.0)))
}

/// Piecewise closed-form Markov rate for the channel `(1, epsilon)`.
pub fn rate_two_tap_closed_form(epsilon: f64, delta: f64, power: f64) -> Result<f64> {
    Ok(two_tap_closed_form_alpha(epsilon, delta, power)?.map_or(0.0, binary_entropy))
}

/// Closed-form asymptotic Markov power for `(1, epsilon)`:
/// `delta^2 / (1 - e^2) * (1 + e (1 - 2 alpha)) / (1 - e (1 - 2 alpha))`.
pub fn two_tap_power_closed_form(epsilon: f64, delta: f64, alpha: f64) -> f64 {
    let t = epsilon * (1.0 - 2.0 * alpha);
    delta * delta / (1.0 - epsilon * epsilon) * (1.0 + t) / (1.0 - t)
}
