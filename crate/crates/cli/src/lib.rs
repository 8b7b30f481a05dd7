//! Command-line front end for `qisi`.
//!
//! Every command writes to a caller-supplied [`Write`] so output can be captured in
//! tests. Floats use Rust's shortest round-trip formatting; lines starting with `#`
//! echo the configuration ahead of the CSV header.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qisi::energy::enumerate_profile;
use qisi::gibbs::capacity_curve_from_profile;
use qisi::markov::{optimize_rate, PowerModel};
use qisi::sim::simulate_zero_forcing;
use qisi::{ChannelOperators, ChannelSpec, NoisySimConfig, Regime};

pub mod figures;
pub mod grid;

pub use figures::Figure;
pub use grid::PowerGrid;

use grid::join;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qisi::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("empirical flip rate lies outside the 3-sigma interval")]
    ValidationFailed,
}

impl CliError {
    /// 1 for usage or configuration problems, 2 for a failed validation and 3 when a
    /// numerical routine did not converge.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::ValidationFailed => 2,
            CliError::Core(qisi::Error::NoConvergence { .. } | qisi::Error::QuadratureFailure { .. }) => 3,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qisi", version, about = "Approximate capacity of 1-bit quantized ISI channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gibbs capacity over a power grid.
    Capacity(CurveArgs),
    /// Markov zero-forcing rate over a power grid.
    Markov(MarkovArgs),
    /// Summary of the exhaustive energy profile.
    Energy(EnergyArgs),
    /// Monte-Carlo check of the flip rate on the noisy channel.
    Validate(ValidateArgs),
    /// Curve data for the reference setups.
    Figures(FiguresArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Channel taps, comma separated (h_0 first).
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub taps: Vec<f64>,
    /// Output threshold delta.
    #[arg(long, default_value_t = 0.3)]
    pub delta: f64,
    /// Block length N.
    #[arg(long = "n", default_value_t = 12)]
    pub block_len: usize,
}

impl ChannelArgs {
    fn operators(&self) -> Result<ChannelOperators, CliError> {
        Ok(ChannelOperators::new(ChannelSpec::new(
            self.taps.clone(),
            self.delta,
            self.block_len,
        )?)?)
    }

    fn write_meta<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# taps={}", join(&self.taps))?;
        writeln!(out, "# delta={}", self.delta)?;
        writeln!(out, "# n={}", self.block_len)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Grid in units of P/delta^2: `min:max:count` or `a,b,c`.
    #[arg(long)]
    pub grid: PowerGrid,
    /// Read grid values as raw power P instead of P/delta^2.
    #[arg(long)]
    pub raw_power: bool,
}

impl CurveArgs {
    /// `(p_over_delta2, power)` pairs.
    fn points(&self) -> Vec<(f64, f64)> {
        let d2 = self.channel.delta * self.channel.delta;
        self.grid
            .points()
            .into_iter()
            .map(|v| if self.raw_power { (v / d2, v) } else { (v, v * d2) })
            .collect()
    }

    fn write_meta<W: Write>(&self, command: &str, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# command={command}")?;
        self.channel.write_meta(out)?;
        writeln!(out, "# grid={}", self.grid)?;
        let units = if self.raw_power { "power" } else { "p_over_delta2" };
        writeln!(out, "# grid_units={units}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowerModelArg {
    /// Large-block limit of the transmit power.
    Asymptotic,
    /// Exact power at block length N.
    Finite,
}

#[derive(Debug, Clone, Args)]
pub struct MarkovArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, value_enum, default_value_t = PowerModelArg::Asymptotic)]
    pub power_model: PowerModelArg,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Also write every pattern's energy to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub dump_energies: Option<PathBuf>,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(format!("not a whole number: {s:?}"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Noise standard deviation.
    #[arg(long)]
    pub sigma: f64,
    /// Markov self-transition probability of the transmitted signs.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Number of symbols to simulate (accepts `1e6`).
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    pub symbols: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct FiguresArgs {
    #[arg(value_enum)]
    pub which: Figure,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |a| a.to_string())
}

pub fn cmd_capacity<W: Write>(args: &CurveArgs, out: &mut W) -> Result<(), CliError> {
    let ops = args.channel.operators()?;
    let profile = enumerate_profile(&ops)?;
    let points = args.points();
    let powers: Vec<f64> = points.iter().map(|p| p.1).collect();
    let curve = capacity_curve_from_profile(&profile, &powers)?;
    if curve.iter().all(|(_, s)| s.regime == Regime::Infeasible) {
        let n = ops.block_len() as f64;
        return Err(qisi::Error::InfeasiblePower {
            power: powers[powers.len() - 1],
            e_min_per_use: profile.e_min() / n,
        }
        .into());
    }
    args.write_meta("capacity", out)?;
    writeln!(out, "p_over_delta2,capacity_bits,regime,gibbs_beta")?;
    for ((g, _), (_, sol)) in points.iter().zip(&curve) {
        writeln!(out, "{g},{},{},{}", sol.entropy_bits_per_use, sol.regime, sol.gibbs_beta)?;
    }
    Ok(())
}

pub fn cmd_markov<W: Write>(args: &MarkovArgs, out: &mut W) -> Result<(), CliError> {
    let ops = args.curve.channel.operators()?;
    let model = match args.power_model {
        PowerModelArg::Asymptotic => PowerModel::Asymptotic,
        PowerModelArg::Finite => PowerModel::FiniteBlock(&ops),
    };
    let points = args.curve.points();
    let rows = points
        .iter()
        .map(|&(g, p)| Ok((g, optimize_rate(ops.spec(), p, model)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    if rows.iter().all(|(_, r)| r.alpha_star.is_none()) {
        return Err(CliError::Usage(
            "no point of the grid admits a feasible Markov input".into(),
        ));
    }
    args.curve.write_meta("markov", out)?;
    let model_name = match args.power_model {
        PowerModelArg::Asymptotic => "asymptotic",
        PowerModelArg::Finite => "finite",
    };
    writeln!(out, "# power_model={model_name}")?;
    writeln!(out, "p_over_delta2,rate_bits,alpha_star")?;
    for (g, r) in rows {
        writeln!(out, "{g},{},{}", r.rate_bits, fmt_opt(r.alpha_star))?;
    }
    Ok(())
}

pub fn cmd_energy<W: Write>(args: &EnergyArgs, out: &mut W) -> Result<(), CliError> {
    let ops = args.channel.operators()?;
    let profile = enumerate_profile(&ops)?;
    if let Some(path) = &args.dump_energies {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        profile.write_csv(file)?;
    }
    let n = ops.block_len() as f64;
    writeln!(out, "# command=energy")?;
    args.channel.write_meta(out)?;
    writeln!(out, "e_min_per_use,e_mean_per_use,e_max_per_use,min_count,dd_flag")?;
    writeln!(
        out,
        "{},{},{},{},{}",
        profile.e_min() / n,
        profile.e_mean() / n,
        profile.e_max() / n,
        profile.min_count(),
        ops.is_diagonally_dominant()
    )?;
    Ok(())
}

pub fn cmd_validate<W: Write>(args: &ValidateArgs, out: &mut W) -> Result<(), CliError> {
    let ops = args.channel.operators()?;
    let cfg = NoisySimConfig {
        sigma: args.sigma,
        num_symbols: args.symbols,
        seed: args.seed,
        alpha: args.alpha,
    };
    let report = simulate_zero_forcing(&ops, &cfg)?;
    writeln!(out, "# command=validate")?;
    args.channel.write_meta(out)?;
    writeln!(out, "# sigma={}", args.sigma)?;
    writeln!(out, "# alpha={}", args.alpha)?;
    writeln!(out, "# seed={}", args.seed)?;
    if !cfg.has_enough_symbols() {
        writeln!(out, "# warning=fewer than 1000 symbols, interval is not meaningful")?;
    }
    write!(out, "{}", report.to_key_value())?;
    let pass = report.within_interval(3.0);
    writeln!(out, "verdict={}", if pass { "PASS" } else { "FAIL" })?;
    if pass {
        Ok(())
    } else {
        Err(CliError::ValidationFailed)
    }
}

pub fn run<W: Write>(command: &Command, out: &mut W) -> Result<(), CliError> {
    match command {
        Command::Capacity(a) => cmd_capacity(a, out),
        Command::Markov(a) => cmd_markov(a, out),
        Command::Energy(a) => cmd_energy(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Figures(a) => figures::write_figure(a.which, out),
    }
}
