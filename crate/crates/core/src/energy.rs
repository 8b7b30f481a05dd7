//! Minimum input energy per quantized output pattern.
//!
//! For a sign pattern `s`, `E(s)` is the smallest `||x||^2` such that
//! `diag(s) M_h x >= delta * 1`. When `G = (M_h M_h^T)^{-1}` is diagonally dominant
//! every constraint is active at the optimum and `E(s) = delta^2 s^T G s`. Otherwise
//! the convex program is solved through its dual
//!
//! ```text
//!     max_{lambda >= 0}  g(lambda) = -lambda^T A lambda / 4 + delta * 1^T lambda,
//!     A = diag(s) M_h M_h^T diag(s),      x = M_h^T diag(s) lambda / 2,
//! ```
//!
//! with accelerated projected gradient ascent. Every returned solution carries a
//! feasible primal point and a dual-feasible multiplier, so the reported gap is a
//! certificate of optimality.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::channel::ChannelOperators;
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Largest block length accepted by [`enumerate_profile`].
pub const ENUMERATION_CAP: usize = 20;

/// Relative tolerance for counting minimizers.
pub const MIN_TIE_REL_TOL: f64 = 1e-9;

/// Relative duality-gap tolerance of the dual QP solver.
pub const GAP_REL_TOL: f64 = 1e-8;

/// Relative feasibility tolerance (times `delta`).
pub const FEAS_REL_TOL: f64 = 1e-8;

// Incremental Gray-code updates are re-anchored at this period.
const GRAY_RESYNC: usize = 1024;

/// An output pattern in `{-1, +1}^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidParameter("empty sign pattern".into()));
        }
        if let Some(bad) = signs.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidParameter(format!(
                "sign pattern entries must be +1 or -1, found {bad}"
            )));
        }
        Ok(SignPattern(signs))
    }

    /// Pattern whose big-endian bit encoding is `index` (bit 1 is `+1`).
    pub fn from_index(index: u64, n: usize) -> Self {
        assert!((1..=64).contains(&n), "pattern length must be in 1..=64");
        SignPattern(
            (0..n)
                .map(|i| if (index >> (n - 1 - i)) & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn index(&self) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, &v| (acc << 1) | u64::from(v == 1))
    }

    pub fn all_ones(n: usize) -> Self {
        SignPattern(vec![1; n])
    }

    pub fn negated(&self) -> Self {
        SignPattern(self.0.iter().map(|v| -v).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| f64::from(v)).collect()
    }

    /// Big-endian bit string, `+1 -> '1'`.
    pub fn bits(&self) -> String {
        self.0.iter().map(|&v| if v == 1 { '1' } else { '0' }).collect()
    }
}

/// Minimizer of the energy program for one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySolution {
    pub energy: f64,
    pub x_star: Vec<f64>,
    pub dual: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
}

/// Settings for [`solve_energy_qp_with`].
#[derive(Debug, Clone, Copy)]
pub struct QpOptions {
    /// Iteration budget; `None` means `50 * N^2`.
    pub max_iter: Option<usize>,
    pub gap_rel_tol: f64,
    /// Start from the closed-form multiplier clipped to the orthant.
    pub warm_start: bool,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions {
            max_iter: None,
            gap_rel_tol: GAP_REL_TOL,
            warm_start: true,
        }
    }
}

fn check_pattern(ops: &ChannelOperators, s: &SignPattern) -> Result<()> {
    if s.len() != ops.block_len() {
        return Err(Error::DimensionMismatch {
            expected: ops.block_len(),
            actual: s.len(),
        });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closed-form solution `x* = delta M_h^{-1} s`, valid for diagonally dominant channels.
pub fn analytic_energy(ops: &ChannelOperators, s: &SignPattern) -> Result<EnergySolution> {
    if !ops.is_diagonally_dominant() {
        return Err(Error::NotDiagonallyDominant);
    }
    check_pattern(ops, s)?;
    Ok(closed_form(ops, s))
}

// x = delta M^{-1} s, lambda = 2 delta diag(s) G diag(s) 1.
fn closed_form(ops: &ChannelOperators, s: &SignPattern) -> EnergySolution {
    let delta = ops.delta();
    let sv = s.to_f64();
    let x_star: Vec<f64> = ops
        .apply_inverse(&sv)
        .expect("length checked")
        .into_iter()
        .map(|v| delta * v)
        .collect();
    let gs = ops.apply_gram(&sv).expect("length checked");
    let dual = sv
        .iter()
        .zip(&gs)
        .map(|(si, gi)| 2.0 * delta * si * gi)
        .collect();
    EnergySolution {
        energy: delta * delta * dot(&sv, &gs),
        x_star,
        dual,
        gap: 0.0,
        iterations: 0,
    }
}

/// Solves the energy program through its dual with default options.
pub fn solve_energy_qp(ops: &ChannelOperators, s: &SignPattern) -> Result<EnergySolution> {
    solve_energy_qp_with(ops, s, &QpOptions::default())
}

struct DualWorkspace<'a> {
    ops: &'a ChannelOperators,
    s: Vec<f64>,
    delta: f64,
    u: Vec<f64>,
    x: Vec<f64>,
    mx: Vec<f64>,
}

impl DualWorkspace<'_> {
    /// Sets `x = M^T diag(s) lambda / 2` and returns the constraint values
    /// `c = diag(s) M x`, which also equal `A lambda / 2`.
    fn evaluate(&mut self, lambda: &[f64], c: &mut [f64]) {
        for ((u, &l), &si) in self.u.iter_mut().zip(lambda).zip(&self.s) {
            *u = 0.5 * si * l;
        }
        self.ops.apply_transpose_into(&self.u, &mut self.x);
        self.ops.apply_channel_into(&self.x, &mut self.mx);
        for ((ci, &m), &si) in c.iter_mut().zip(&self.mx).zip(&self.s) {
            *ci = si * m;
        }
    }

    /// Dual value `g(lambda) = -||x||^2 + delta * sum(lambda)` for the last evaluation.
    fn dual_value(&self, lambda: &[f64]) -> f64 {
        -dot(&self.x, &self.x) + self.delta * lambda.iter().sum::<f64>()
    }

    /// Feasible primal point: `x` rescaled so the tightest constraint is active.
    fn scaled_primal(&self, c: &[f64]) -> Option<(f64, Vec<f64>)> {
        let cmin = c.iter().copied().fold(f64::INFINITY, f64::min);
        if !(cmin > 0.0) {
            return None;
        }
        let scale = self.delta / cmin;
        let x: Vec<f64> = self.x.iter().map(|v| scale * v).collect();
        Some((dot(&x, &x), x))
    }
}

/// Dual projected-gradient solver with Nesterov momentum and adaptive restart.
pub fn solve_energy_qp_with(
    ops: &ChannelOperators,
    s: &SignPattern,
    opts: &QpOptions,
) -> Result<EnergySolution> {
    check_pattern(ops, s)?;
    let n = ops.block_len();
    let delta = ops.delta();
    let max_iter = opts.max_iter.unwrap_or(50 * n * n);
    // Gradient of -g is Lipschitz with constant lambda_max(A) / 2.
    let (lambda_max, _) = ops.gram_spectrum_bounds();
    let step = 2.0 / lambda_max;

    let mut ws = DualWorkspace {
        ops,
        s: s.to_f64(),
        delta,
        u: vec![0.0; n],
        x: vec![0.0; n],
        mx: vec![0.0; n],
    };

    let mut lambda = if opts.warm_start {
        closed_form(ops, s)
            .dual
            .into_iter()
            .map(|l| l.max(0.0))
            .collect()
    } else {
        vec![0.0; n]
    };
    let mut c = vec![0.0; n];
    let mut momentum_point = lambda.clone();
    let mut t = 1.0_f64;
    let mut prev_dual = f64::NEG_INFINITY;
    let mut best: Option<EnergySolution> = None;
    let mut grad = vec![0.0; n];

    for iter in 0..=max_iter {
        // Certificate at the current dual-feasible iterate.
        ws.evaluate(&lambda, &mut c);
        let dual_value = ws.dual_value(&lambda);
        if let Some((primal, x)) = ws.scaled_primal(&c) {
            let gap = (primal - dual_value).max(0.0);
            if best.as_ref().is_none_or(|b| gap < b.gap) {
                best = Some(EnergySolution {
                    energy: primal,
                    x_star: x,
                    dual: lambda.clone(),
                    gap,
                    iterations: iter,
                });
            }
            if gap <= opts.gap_rel_tol * primal {
                return Ok(best.expect("just set"));
            }
        }
        if iter == max_iter {
            break;
        }

        if dual_value < prev_dual {
            // Objective went down: drop the momentum.
            t = 1.0;
            momentum_point.copy_from_slice(&lambda);
        }
        prev_dual = dual_value;

        ws.evaluate(&momentum_point, &mut grad);
        let next: Vec<f64> = momentum_point
            .iter()
            .zip(&grad)
            .map(|(&y, &cy)| (y + step * (delta - cy)).max(0.0))
            .collect();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for ((y, &l_new), &l_old) in momentum_point.iter_mut().zip(&next).zip(&lambda) {
            *y = l_new + beta * (l_new - l_old);
        }
        lambda = next;
        t = t_next;
    }

    let best = best.unwrap_or_else(|| EnergySolution {
        energy: f64::INFINITY,
        x_star: ws.x.clone(),
        dual: lambda.clone(),
        gap: f64::INFINITY,
        iterations: max_iter,
    });
    Err(Error::NoConvergence {
        iterations: max_iter,
        gap: best.gap,
        best: Box::new(best),
    })
}

/// Closed form for diagonally dominant channels, dual QP otherwise.
pub fn energy(ops: &ChannelOperators, s: &SignPattern) -> Result<EnergySolution> {
    if ops.is_diagonally_dominant() {
        analytic_energy(ops, s)
    } else {
        solve_energy_qp(ops, s)
    }
}

/// `delta^2 tr(M_h^{-T} M_h^{-1}) = delta^2 sum_k 1 / |f(2 pi k / N)|^2`.
pub fn mean_energy_trace(ops: &ChannelOperators) -> f64 {
    let delta = ops.delta();
    delta * delta * compensated_sum(ops.dft_gains().iter().map(|g| 1.0 / g.norm_sqr()))
}

/// How the energies of a profile were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyMethod {
    Analytic,
    DualQp,
    Supplied,
}

/// Energies of all `2^N` patterns with summary statistics.
#[derive(Debug, Clone)]
pub struct EnergyProfile {
    n: usize,
    energies: Vec<f64>,
    e_min: f64,
    e_max: f64,
    e_mean: f64,
    min_count: usize,
    method: EnergyMethod,
}

impl EnergyProfile {
    /// Builds a profile from energies indexed by [`SignPattern::index`].
    pub fn from_energies(n: usize, energies: Vec<f64>) -> Result<Self> {
        Self::build(n, energies, EnergyMethod::Supplied)
    }

    fn build(n: usize, energies: Vec<f64>, method: EnergyMethod) -> Result<Self> {
        if n == 0 || n > 63 || energies.len() != 1usize << n {
            return Err(Error::InvalidParameter(format!(
                "expected 2^{n} energies, got {}",
                energies.len()
            )));
        }
        if energies.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidParameter(
                "energies must be finite and nonnegative".into(),
            ));
        }
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let e_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e_mean =
            (compensated_sum(energies.iter().copied()) / energies.len() as f64).clamp(e_min, e_max);
        let tie = MIN_TIE_REL_TOL * e_min;
        let min_count = energies.iter().filter(|&&e| e - e_min <= tie).count();
        Ok(EnergyProfile {
            n,
            energies,
            e_min,
            e_max,
            e_mean,
            min_count,
            method,
        })
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    /// Energies indexed by [`SignPattern::index`].
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy_of(&self, s: &SignPattern) -> f64 {
        self.energies[s.index() as usize]
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn e_mean(&self) -> f64 {
        self.e_mean
    }

    /// Number of patterns within [`MIN_TIE_REL_TOL`] of the minimum.
    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn method(&self) -> EnergyMethod {
        self.method
    }

    /// True when every pattern is a minimizer.
    pub fn is_flat(&self) -> bool {
        self.min_count == self.energies.len()
    }

    pub fn minimizers(&self) -> impl Iterator<Item = SignPattern> + '_ {
        let tie = MIN_TIE_REL_TOL * self.e_min;
        self.energies
            .iter()
            .enumerate()
            .filter(move |(_, &e)| e - self.e_min <= tie)
            .map(move |(i, _)| SignPattern::from_index(i as u64, self.n))
    }

    /// Writes `pattern_bits,energy` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "pattern_bits,energy")?;
        for (i, e) in self.energies.iter().enumerate() {
            writeln!(w, "{},{}", SignPattern::from_index(i as u64, self.n).bits(), e)?;
        }
        Ok(())
    }
}

/// Energies of every pattern, enumerated with the default cap.
pub fn enumerate_profile(ops: &ChannelOperators) -> Result<EnergyProfile> {
    enumerate_profile_capped(ops, ENUMERATION_CAP)
}

pub fn enumerate_profile_capped(ops: &ChannelOperators, cap: usize) -> Result<EnergyProfile> {
    let n = ops.block_len();
    if n > cap || n > 63 {
        return Err(Error::TooLarge { n, cap });
    }
    if ops.is_diagonally_dominant() {
        EnergyProfile::build(n, gray_code_energies(ops), EnergyMethod::Analytic)
    } else {
        EnergyProfile::build(n, qp_energies(ops)?, EnergyMethod::DualQp)
    }
}

// delta^2 s^T G s over all patterns in Gray-code order; one sign flip updates
// both G s and the quadratic form in O(N).
fn gray_code_energies(ops: &ChannelOperators) -> Vec<f64> {
    let n = ops.block_len();
    let total = 1usize << n;
    let d2 = ops.delta() * ops.delta();
    let g = ops.gram_row();
    let column = |pos: usize, i: usize| g[(pos + n - i) % n];

    let mut energies = vec![0.0; total];
    let mut s = vec![-1.0; n];
    let mut gs = ops.apply_gram(&s).expect("length matches");
    let mut q = dot(&s, &gs);
    let mut index = 0usize;
    energies[0] = d2 * q;

    for k in 1..total {
        let bit = k.trailing_zeros() as usize;
        let pos = n - 1 - bit;
        let old = s[pos];
        q += 4.0 * g[0] - 4.0 * old * gs[pos];
        for (i, v) in gs.iter_mut().enumerate() {
            *v -= 2.0 * old * column(pos, i);
        }
        s[pos] = -old;
        index ^= 1 << bit;
        if k % GRAY_RESYNC == 0 {
            gs = ops.apply_gram(&s).expect("length matches");
            q = dot(&s, &gs);
        }
        energies[index] = d2 * q;
    }
    energies
}

// E(s) = E(-s): solve patterns with s_0 = -1 and mirror onto their complements.
fn qp_energies(ops: &ChannelOperators) -> Result<Vec<f64>> {
    let n = ops.block_len();
    let total = 1usize << n;
    let half = total / 2;
    let solved: Vec<f64> = (0..half.max(1))
        .into_par_iter()
        .map(|i| solve_energy_qp(ops, &SignPattern::from_index(i as u64, n)).map(|sol| sol.energy))
        .collect::<Result<_>>()?;
    let mut energies = vec![0.0; total];
    for (i, e) in solved.into_iter().enumerate() {
        energies[i] = e;
        energies[total - 1 - i] = e;
    }
    Ok(energies)
}
