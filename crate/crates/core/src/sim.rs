//! Monte-Carlo check of the threshold approximation on the noisy channel.
//!
//! Zero-forcing makes every noiseless output sample exactly `+-delta`, so a sign flip
//! after adding `N(0, sigma^2)` noise happens with probability `Q(delta / sigma)`.
//!
//! Randomness comes from ChaCha8 seeded with `seed`; block `k` uses stream `k` of that
//! seed, so results do not depend on how blocks are scheduled across threads. Gaussian
//! samples use `rand_distr::StandardNormal` (ziggurat).

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{quantize, ChannelOperators};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Below this many symbols the report's error bars are not meaningful.
pub const MIN_REPORT_SYMBOLS: u64 = 1000;

/// Gaussian tail `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisySimConfig {
    pub sigma: f64,
    pub num_symbols: u64,
    pub seed: u64,
    pub alpha: f64,
}

impl NoisySimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise deviation must be positive, got {}",
                self.sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.num_symbols == 0 {
            return Err(Error::InvalidParameter("at least one symbol is required".into()));
        }
        Ok(())
    }

    pub fn has_enough_symbols(&self) -> bool {
        self.num_symbols >= MIN_REPORT_SYMBOLS
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    pub empirical_flip_rate: f64,
    pub theoretical_bound: f64,
    /// `sqrt(p (1 - p) / num_symbols)` at the empirical rate.
    pub std_error: f64,
    pub measured_power_per_use: f64,
    /// Sample deviation of per-block power over `sqrt(num_blocks)`.
    pub power_std_error: f64,
    pub num_symbols: u64,
    pub num_blocks: u64,
    pub flips: u64,
}

impl SimReport {
    const FIELDS: [&'static str; 8] = [
        "empirical_flip_rate",
        "theoretical_bound",
        "std_error",
        "measured_power_per_use",
        "power_std_error",
        "num_symbols",
        "num_blocks",
        "flips",
    ];

    fn values(&self) -> [String; 8] {
        [
            self.empirical_flip_rate.to_string(),
            self.theoretical_bound.to_string(),
            self.std_error.to_string(),
            self.measured_power_per_use.to_string(),
            self.power_std_error.to_string(),
            self.num_symbols.to_string(),
            self.num_blocks.to_string(),
            self.flips.to_string(),
        ]
    }

    /// True when the empirical rate is within `k` standard errors of `Q(delta / sigma)`.
    pub fn within_interval(&self, k: f64) -> bool {
        (self.empirical_flip_rate - self.theoretical_bound).abs() <= k * self.std_error
    }

    /// True when the empirical rate does not exceed the bound by more than `k` errors.
    pub fn below_bound(&self, k: f64) -> bool {
        self.empirical_flip_rate <= self.theoretical_bound + k * self.std_error
    }

    /// One `key=value` line per field.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in Self::FIELDS.iter().zip(self.values()) {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn csv_header() -> String {
        Self::FIELDS.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.values().join(",")
    }
}

struct BlockOutcome {
    flips: u64,
    power: f64,
}

fn simulate_block(
    ops: &ChannelOperators,
    cfg: &NoisySimConfig,
    block: u64,
    counted: usize,
) -> BlockOutcome {
    let n = ops.block_len();
    let delta = ops.delta();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(block);

    let mut b = Vec::with_capacity(n);
    let mut current = if rng.random::<bool>() { 1.0 } else { -1.0 };
    b.push(current);
    for _ in 1..n {
        if rng.random::<f64>() >= cfg.alpha {
            current = -current;
        }
        b.push(current);
    }

    let x: Vec<f64> = ops
        .apply_inverse(&b)
        .expect("block length matches")
        .into_iter()
        .map(|v| delta * v)
        .collect();
    let y = ops.apply_channel(&x).expect("block length matches");
    let flips = y
        .iter()
        .zip(&b)
        .take(counted)
        .filter(|(&yi, &bi)| {
            let z: f64 = rng.sample(StandardNormal);
            f64::from(quantize(yi + cfg.sigma * z)) != bi
        })
        .count() as u64;
    let power = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    BlockOutcome { flips, power }
}

/// Transmits Markov sign sequences with zero-forcing over the noisy channel and counts
/// positions where the quantized output differs from the intended sign.
pub fn simulate_zero_forcing(ops: &ChannelOperators, cfg: &NoisySimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let n = ops.block_len() as u64;
    let num_blocks = cfg.num_symbols.div_ceil(n);
    let outcomes: Vec<BlockOutcome> = (0..num_blocks)
        .into_par_iter()
        .map(|k| {
            let counted = (cfg.num_symbols - k * n).min(n) as usize;
            simulate_block(ops, cfg, k, counted)
        })
        .collect();

    let flips: u64 = outcomes.iter().map(|o| o.flips).sum();
    let rate = flips as f64 / cfg.num_symbols as f64;
    let blocks = outcomes.len() as f64;
    let mean_power = compensated_sum(outcomes.iter().map(|o| o.power)) / blocks;
    let power_std_error = if outcomes.len() > 1 {
        let var = compensated_sum(outcomes.iter().map(|o| (o.power - mean_power).powi(2)))
            / (blocks - 1.0);
        (var / blocks).sqrt()
    } else {
        0.0
    };

    Ok(SimReport {
        empirical_flip_rate: rate,
        theoretical_bound: q_function(ops.delta() / cfg.sigma),
        std_error: (rate * (1.0 - rate) / cfg.num_symbols as f64).sqrt(),
        measured_power_per_use: mean_power,
        power_std_error,
        num_symbols: cfg.num_symbols,
        num_blocks,
        flips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;

    fn ops(taps: &[f64], delta: f64, n: usize) -> ChannelOperators {
        ChannelOperators::new(ChannelSpec::new(taps.to_vec(), delta, n).unwrap()).unwrap()
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!(q_function(40.0) < 1e-300);
        assert!((q_function(3.0) - 1.3499e-3).abs() < 1e-7);
        assert!((q_function(-1.0) - (1.0 - q_function(1.0))).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let good = NoisySimConfig {
            sigma: 0.1,
            num_symbols: 10,
            seed: 0,
            alpha: 0.5,
        };
        assert!(good.validate().is_ok());
        assert!(!good.has_enough_symbols());
        assert!(NoisySimConfig { sigma: 0.0, ..good }.validate().is_err());
        assert!(NoisySimConfig { alpha: 1.5, ..good }.validate().is_err());
        assert!(NoisySimConfig { num_symbols: 0, ..good }.validate().is_err());
    }

    #[test]
    fn zero_forcing_output_has_threshold_magnitude() {
        let o = ops(&[1.0, 0.2], 0.3, 16);
        let b: Vec<f64> = (0..16).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let x: Vec<f64> = o.apply_inverse(&b).unwrap().iter().map(|v| 0.3 * v).collect();
        for y in o.apply_channel(&x).unwrap() {
            assert!((y.abs() - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_limit_has_no_flips() {
        let o = ops(&[1.0, 0.2], 0.3, 12);
        let cfg = NoisySimConfig {
            sigma: 1e-9,
            num_symbols: 20_000,
            seed: 3,
            alpha: 0.5,
        };
        let r = simulate_zero_forcing(&o, &cfg).unwrap();
        assert_eq!(r.flips, 0);
        assert!(r.within_interval(3.0));
    }

    #[test]
    fn partial_last_block_counts_exact_symbols() {
        let o = ops(&[1.0, 0.2], 0.3, 12);
        let cfg = NoisySimConfig {
            sigma: 0.3,
            num_symbols: 1001,
            seed: 9,
            alpha: 0.5,
        };
        let r = simulate_zero_forcing(&o, &cfg).unwrap();
        assert_eq!(r.num_blocks, 84);
        assert_eq!(r.num_symbols, 1001);
        assert!(r.flips <= 1001);
    }

    #[test]
    fn report_serialization_order() {
        let r = SimReport {
            empirical_flip_rate: 0.25,
            theoretical_bound: 0.5,
            std_error: 0.125,
            measured_power_per_use: 1.5,
            power_std_error: 0.0,
            num_symbols: 4,
            num_blocks: 1,
            flips: 1,
        };
        assert_eq!(
            r.to_key_value(),
            "empirical_flip_rate=0.25\ntheoretical_bound=0.5\nstd_error=0.125\n\
             measured_power_per_use=1.5\npower_std_error=0\nnum_symbols=4\nnum_blocks=1\nflips=1\n"
        );
        assert_eq!(SimReport::csv_header().split(',').count(), 8);
        assert_eq!(r.to_csv_row(), "0.25,0.5,0.125,1.5,0,4,1,1");
    }
}
