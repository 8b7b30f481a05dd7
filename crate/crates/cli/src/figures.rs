//! Curve data for the two reference channel setups.
//!
//! `fig3`: the two-tap channels `(1, 0.2)` and `(1, 0.8)`, capacity and Markov rate on
//! a common grid. `fig4`: the three-tap channel `(-0.3, 1, 0.6)`, which is not
//! diagonally dominant, so its capacity comes from QP energies.
//!
//! Grids are in units of `P / delta^2`. The first `fig3` point is the exact threshold
//! `1 / (1 + 0.2)^2`; its four-decimal rendering `0.6944` lies just below it and would
//! be infeasible.

use std::io::Write;

use clap::ValueEnum;
use qisi::energy::enumerate_profile;
use qisi::gibbs::capacity_curve_from_profile;
use qisi::markov::{optimize_rate, PowerModel};
use qisi::{ChannelOperators, ChannelSpec};

use crate::CliError;

pub const DELTA: f64 = 0.3;
pub const BLOCK_LEN: usize = 12;

pub const FIG3_GRID: [f64; 16] = [
    1.0 / 1.44,
    0.7178,
    0.7411,
    0.7644,
    0.7867,
    0.8100,
    0.8333,
    0.8567,
    0.8800,
    0.9033,
    0.9256,
    0.9489,
    0.9722,
    0.9956,
    1.0189,
    1.0422,
];

pub const FIG4_TAPS: [f64; 3] = [-0.3, 1.0, 0.6];

pub const FIG4_C_GRID: [f64; 26] = [
    0.5644, 0.5744, 0.5856, 0.5967, 0.6078, 0.6189, 0.6300, 0.6400, 0.6511, 0.6622, 0.6733,
    0.6844, 0.6956, 0.7056, 0.7167, 0.7278, 0.7389, 0.7500, 0.7611, 0.7711, 0.7822, 0.7933,
    0.8044, 0.8156, 0.8267, 0.8367,
];

pub const FIG4_RM_GRID: [f64; 23] = [
    0.5922, 0.6022, 0.6133, 0.6244, 0.6356, 0.6467, 0.6578, 0.6678, 0.6789, 0.6900, 0.7011,
    0.7122, 0.7233, 0.7333, 0.7444, 0.7556, 0.7667, 0.7778, 0.7889, 0.7989, 0.8100, 0.8211,
    0.8322,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig3,
    Fig4,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub series: String,
    pub p_over_delta2: f64,
    pub value: f64,
    /// Whether the acceptance suite checks this series against reference data.
    pub verified: bool,
}

fn ops(taps: &[f64]) -> Result<ChannelOperators, CliError> {
    Ok(ChannelOperators::new(ChannelSpec::new(taps.to_vec(), DELTA, BLOCK_LEN)?)?)
}

fn capacity_series(taps: &[f64], grid: &[f64], series: &str, verified: bool) -> Result<Vec<FigureRow>, CliError> {
    let profile = enumerate_profile(&ops(taps)?)?;
    let powers: Vec<f64> = grid.iter().map(|g| g * DELTA * DELTA).collect();
    let curve = capacity_curve_from_profile(&profile, &powers)?;
    Ok(grid
        .iter()
        .zip(curve)
        .map(|(&g, (_, sol))| FigureRow {
            series: series.to_string(),
            p_over_delta2: g,
            value: sol.entropy_bits_per_use,
            verified,
        })
        .collect())
}

fn rate_series(
    taps: &[f64],
    grid: &[f64],
    series: &str,
    verified: bool,
    finite_block: bool,
) -> Result<Vec<FigureRow>, CliError> {
    let ops = ops(taps)?;
    let model = if finite_block {
        PowerModel::FiniteBlock(&ops)
    } else {
        PowerModel::Asymptotic
    };
    grid.iter()
        .map(|&g| {
            let r = optimize_rate(ops.spec(), g * DELTA * DELTA, model)?;
            Ok(FigureRow {
                series: series.to_string(),
                p_over_delta2: g,
                value: r.rate_bits,
                verified,
            })
        })
        .collect()
}

/// Rows of one figure, series by series.
pub fn figure_rows(which: Figure) -> Result<Vec<FigureRow>, CliError> {
    let mut rows = Vec::new();
    match which {
        Figure::Fig3 => {
            for (eps, verified) in [(0.2, true), (0.8, false)] {
                let taps = [1.0, eps];
                rows.extend(capacity_series(&taps, &FIG3_GRID, &format!("C_eps{eps}"), verified)?);
                rows.extend(rate_series(&taps, &FIG3_GRID, &format!("Rm_eps{eps}"), verified, false)?);
            }
        }
        Figure::Fig4 => {
            rows.extend(capacity_series(&FIG4_TAPS, &FIG4_C_GRID, "C", true)?);
            // The plotted rate tracks the exact block-12 power rather than the limit.
            rows.extend(rate_series(&FIG4_TAPS, &FIG4_RM_GRID, "Rm", true, true)?);
        }
    }
    Ok(rows)
}

pub fn write_figure<W: Write>(which: Figure, out: &mut W) -> Result<(), CliError> {
    let rows = figure_rows(which)?;
    writeln!(out, "# command=figures")?;
    writeln!(out, "# figure={}", which.name())?;
    writeln!(out, "# delta={DELTA}")?;
    writeln!(out, "# n={BLOCK_LEN}")?;
    match which {
        Figure::Fig3 => writeln!(out, "# rate_power_model=asymptotic")?,
        Figure::Fig4 => writeln!(out, "# rate_power_model=finite_block")?,
    }
    writeln!(out, "figure,series,p_over_delta2,value,verified")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            which.name(),
            r.series,
            r.p_over_delta2,
            r.value,
            r.verified
        )?;
    }
    Ok(())
}
