//! Maximum-entropy output distributions under an average-energy budget.
//!
//! Among all distributions on `{-1, +1}^N` with `sum_s p(s) E(s) <= N P`, entropy is
//! maximized by `p(s) = exp(-beta E(s) / N) / Z`. The entropy in nats is
//! `H = beta <E>/N + ln Z`, and the approximate capacity is `H / (N ln 2)` bits per
//! channel use.

use std::fmt;

use crate::channel::ChannelOperators;
use crate::energy::{enumerate_profile, EnergyProfile};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Relative tolerance for matching `<E>` to `N P` in the interior regime.
pub const BETA_MATCH_REL_TOL: f64 = 1e-10;

/// Relative tolerance for `N P == E_min`.
pub const BOUNDARY_REL_TOL: f64 = 1e-9;

const MAX_BISECTIONS: usize = 200;
const MAX_DOUBLINGS: usize = 1100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `N P < E_min`: no input meets the budget.
    Infeasible,
    /// `N P == E_min`: uniform over the minimizers.
    MinEnergyBoundary,
    /// `E_min < N P < mean energy`.
    GibbsInterior,
    /// `N P >= mean energy`: uniform over all patterns.
    Saturated,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Infeasible => "INFEASIBLE",
            Regime::MinEnergyBoundary => "MIN_ENERGY_BOUNDARY",
            Regime::GibbsInterior => "GIBBS_INTERIOR",
            Regime::Saturated => "SATURATED",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsSolution {
    /// Multiplier `beta`; `+inf` on the boundary and when infeasible.
    pub gibbs_beta: f64,
    /// `ln Z`; `-inf` when `beta` is infinite.
    pub log_partition: f64,
    pub entropy_bits_per_use: f64,
    pub avg_energy_per_use: f64,
    pub regime: Regime,
}

impl GibbsSolution {
    /// Placeholder for a power below the feasibility threshold (zero rate).
    pub fn infeasible(e_min_per_use: f64) -> Self {
        GibbsSolution {
            gibbs_beta: f64::INFINITY,
            log_partition: f64::NEG_INFINITY,
            entropy_bits_per_use: 0.0,
            avg_energy_per_use: e_min_per_use,
            regime: Regime::Infeasible,
        }
    }
}

// Shifted weights exp(-beta (E - E_min) / N); returns (sum w, sum w E).
fn weighted_sums(profile: &EnergyProfile, beta: f64) -> (f64, f64) {
    let n = profile.block_len() as f64;
    let e_min = profile.e_min();
    let mut z = CompensatedSum::default();
    let mut ze = CompensatedSum::default();
    for &e in profile.energies() {
        let w = (-beta * (e - e_min) / n).exp();
        z.add(w);
        ze.add(w * e);
    }
    (z.value(), ze.value())
}

/// `ln sum_s exp(-beta E(s) / N)`, with the largest exponent factored out.
pub fn log_partition(profile: &EnergyProfile, beta: f64) -> f64 {
    let n = profile.block_len() as f64;
    let (z, _) = weighted_sums(profile, beta);
    z.ln() - beta * profile.e_min() / n
}

/// Expected total energy `sum_s E(s) p_beta(s)`.
pub fn avg_energy(profile: &EnergyProfile, beta: f64) -> f64 {
    let (z, ze) = weighted_sums(profile, beta);
    ze / z
}

/// The Gibbs distribution `p_beta(s)`, indexed like the profile energies.
pub fn gibbs_probabilities(profile: &EnergyProfile, beta: f64) -> Vec<f64> {
    let n = profile.block_len() as f64;
    let ln_z = log_partition(profile, beta);
    profile
        .energies()
        .iter()
        .map(|&e| (-beta * e / n - ln_z).exp())
        .collect()
}

fn interior_solution(profile: &EnergyProfile, beta: f64) -> GibbsSolution {
    let n = profile.block_len() as f64;
    let (z, ze) = weighted_sums(profile, beta);
    let mean = ze / z;
    let ln_z = z.ln() - beta * profile.e_min() / n;
    let entropy_nats = beta * mean / n + ln_z;
    GibbsSolution {
        gibbs_beta: beta,
        log_partition: ln_z,
        entropy_bits_per_use: (entropy_nats / (n * std::f64::consts::LN_2)).clamp(0.0, 1.0),
        avg_energy_per_use: mean / n,
        regime: Regime::GibbsInterior,
    }
}

/// Finds the entropy-maximizing distribution for per-use power `power`.
pub fn solve_beta(profile: &EnergyProfile, power: f64) -> Result<GibbsSolution> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "power must be positive, got {power}"
        )));
    }
    let n = profile.block_len();
    let nf = n as f64;
    let budget = power * nf;
    let e_min = profile.e_min();

    if budget < e_min * (1.0 - BOUNDARY_REL_TOL) {
        return Err(Error::InfeasiblePower {
            power,
            e_min_per_use: e_min / nf,
        });
    }
    if budget >= profile.e_mean() || profile.is_flat() {
        return Ok(GibbsSolution {
            gibbs_beta: 0.0,
            log_partition: nf * std::f64::consts::LN_2,
            entropy_bits_per_use: 1.0,
            avg_energy_per_use: profile.e_mean() / nf,
            regime: Regime::Saturated,
        });
    }
    if (budget - e_min).abs() <= BOUNDARY_REL_TOL * e_min {
        return Ok(GibbsSolution {
            gibbs_beta: f64::INFINITY,
            log_partition: f64::NEG_INFINITY,
            entropy_bits_per_use: (profile.min_count() as f64).log2() / nf,
            avg_energy_per_use: e_min / nf,
            regime: Regime::MinEnergyBoundary,
        });
    }

    // avg_energy decreases from the mean energy at beta = 0 towards E_min.
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while avg_energy(profile, hi) >= budget {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Ok(interior_solution(profile, hi));
        }
    }
    let tol = BETA_MATCH_REL_TOL * budget;
    let mut beta = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        beta = 0.5 * (lo + hi);
        let avg = avg_energy(profile, beta);
        if (avg - budget).abs() <= tol {
            break;
        }
        if avg > budget {
            lo = beta;
        } else {
            hi = beta;
        }
    }
    Ok(interior_solution(profile, beta))
}

/// `C_delta(P)` at the block length of `ops`.
pub fn capacity(ops: &ChannelOperators, power: f64) -> Result<GibbsSolution> {
    let profile = enumerate_profile(ops)?;
    solve_beta(&profile, power)
}

/// Capacity over an ascending power grid, sharing one energy profile.
/// Infeasible grid points yield [`GibbsSolution::infeasible`].
pub fn capacity_curve(ops: &ChannelOperators, power_grid: &[f64]) -> Result<Vec<(f64, GibbsSolution)>> {
    let profile = enumerate_profile(ops)?;
    capacity_curve_from_profile(&profile, power_grid)
}

pub fn capacity_curve_from_profile(
    profile: &EnergyProfile,
    power_grid: &[f64],
) -> Result<Vec<(f64, GibbsSolution)>> {
    if power_grid.is_empty() {
        return Err(Error::InvalidParameter("power grid is empty".into()));
    }
    if power_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("power grid must be ascending".into()));
    }
    power_grid
        .iter()
        .map(|&p| match solve_beta(profile, p) {
            Ok(sol) => Ok((p, sol)),
            Err(Error::InfeasiblePower { e_min_per_use, .. }) => {
                Ok((p, GibbsSolution::infeasible(e_min_per_use)))
            }
            Err(e) => Err(e),
        })
        .collect()
}
