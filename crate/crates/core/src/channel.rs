//! Channel instances and circulant operators.
//!
//! The channel acts on a block of `N` inputs by circular convolution,
//! `y_n = sum_k h_k x_{(n - k) mod N}`, i.e. `y = M_h x` with `M_h` the circulant
//! matrix whose first column is the tap vector. Circulant matrices are diagonalized
//! by the DFT, so inverses and the Gram inverse `G = (M_h M_h^T)^{-1}` are computed
//! spectrally.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative tolerance on `|f(2 pi k / N)|` below which the channel is singular.
pub const SINGULAR_REL_TOL: f64 = 1e-9;

/// Relative slack on the diagonal-dominance comparison.
pub const DD_REL_TOL: f64 = 1e-12;

/// One-bit quantizer: `+1` for `x >= 0`, `-1` otherwise.
#[inline]
pub fn quantize(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// A channel instance: taps, output threshold and block length.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    taps: Vec<f64>,
    delta: f64,
    block_len: usize,
}

impl ChannelSpec {
    /// `taps[0]` multiplies the current symbol.
    pub fn new(taps: Vec<f64>, delta: f64, block_len: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidChannel("at least one tap is required".into()));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidChannel("taps must be finite".into()));
        }
        if taps.iter().all(|&t| t == 0.0) {
            return Err(Error::InvalidChannel("at least one tap must be nonzero".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidChannel(format!(
                "threshold must be positive, got {delta}"
            )));
        }
        if block_len < taps.len() {
            return Err(Error::InvalidChannel(format!(
                "block length {block_len} is shorter than the channel ({} taps)",
                taps.len()
            )));
        }
        Ok(ChannelSpec {
            taps,
            delta,
            block_len,
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Same channel with a different threshold.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        ChannelSpec::new(self.taps.clone(), delta, self.block_len)
    }

    /// Same channel with a different block length.
    pub fn with_block_len(&self, block_len: usize) -> Result<Self> {
        ChannelSpec::new(self.taps.clone(), self.delta, block_len)
    }

    /// `f(lambda) = sum_k h_k e^{j k lambda}`.
    pub fn frequency_response(&self, lambda: f64) -> Complex64 {
        self.taps
            .iter()
            .enumerate()
            .map(|(k, &h)| Complex64::from_polar(h, k as f64 * lambda))
            .sum()
    }

    /// `|f(lambda)|^2`.
    pub fn power_response(&self, lambda: f64) -> f64 {
        self.frequency_response(lambda).norm_sqr()
    }
}

/// Precomputed circulant actions for a nonsingular channel.
#[derive(Clone)]
pub struct ChannelOperators {
    spec: ChannelSpec,
    dft_gains: Vec<Complex64>,
    gram_row: Vec<f64>,
    inverse_row: Vec<f64>,
    dd_flag: bool,
    // 1 / H_k with H_k = sum_n h_n e^{-2 pi i k n / N}, the spectrum of M_h^{-1}.
    inverse_spectrum: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for ChannelOperators {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChannelOperators")
            .field("spec", &self.spec)
            .field("dft_gains", &self.dft_gains)
            .field("gram_row", &self.gram_row)
            .field("inverse_row", &self.inverse_row)
            .field("dd_flag", &self.dd_flag)
            .finish_non_exhaustive()
    }
}

impl ChannelOperators {
    pub fn new(spec: ChannelSpec) -> Result<Self> {
        let n = spec.block_len();
        let dft_gains: Vec<Complex64> = (0..n)
            .map(|k| spec.frequency_response(2.0 * PI * k as f64 / n as f64))
            .collect();
        let max_gain = dft_gains.iter().map(|g| g.norm()).fold(0.0, f64::max);
        let tolerance = SINGULAR_REL_TOL * max_gain;
        if let Some((index, g)) = dft_gains
            .iter()
            .enumerate()
            .find(|(_, g)| g.norm() <= tolerance)
        {
            return Err(Error::SingularChannel {
                index,
                magnitude: g.norm(),
                tolerance,
            });
        }

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);

        // For real taps H_k = conj(f(2 pi k / N)).
        let inverse_spectrum: Vec<Complex64> = dft_gains.iter().map(|g| 1.0 / g.conj()).collect();

        let mut buf = inverse_spectrum.clone();
        ifft.process(&mut buf);
        let inverse_row: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();

        let mut buf: Vec<Complex64> = dft_gains
            .iter()
            .map(|g| Complex64::new(1.0 / g.norm_sqr(), 0.0))
            .collect();
        ifft.process(&mut buf);
        let gram_row: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();

        let diag = gram_row[0];
        let off: f64 = gram_row[1..].iter().map(|g| g.abs()).sum();
        let dd_flag = diag + DD_REL_TOL * diag.abs() >= off;

        Ok(ChannelOperators {
            spec,
            dft_gains,
            gram_row,
            inverse_row,
            dd_flag,
            inverse_spectrum,
            fft,
            ifft,
        })
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn block_len(&self) -> usize {
        self.spec.block_len()
    }

    pub fn delta(&self) -> f64 {
        self.spec.delta()
    }

    /// `f(2 pi k / N)` for `k = 0..N`.
    pub fn dft_gains(&self) -> &[Complex64] {
        &self.dft_gains
    }

    /// Circulant generator of `G`: `G_ij = gram_row[(j - i) mod N]`.
    pub fn gram_row(&self) -> &[f64] {
        &self.gram_row
    }

    /// First column of `M_h^{-1}`.
    pub fn inverse_row(&self) -> &[f64] {
        &self.inverse_row
    }

    /// True when `G` is row diagonally dominant.
    pub fn is_diagonally_dominant(&self) -> bool {
        self.dd_flag
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        let n = self.block_len();
        self.gram_row[(j + n - i % n) % n]
    }

    /// Dense row-major `G`.
    pub fn gram_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.block_len();
        (0..n)
            .map(|i| (0..n).map(|j| self.gram_entry(i, j)).collect())
            .collect()
    }

    /// Largest and smallest `|f(2 pi k / N)|^2`, the extreme eigenvalues of `M_h M_h^T`.
    pub fn gram_spectrum_bounds(&self) -> (f64, f64) {
        self.dft_gains
            .iter()
            .map(|g| g.norm_sqr())
            .fold((0.0, f64::INFINITY), |(hi, lo), v| (hi.max(v), lo.min(v)))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.block_len() {
            return Err(Error::DimensionMismatch {
                expected: self.block_len(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `y = M_h x` (circular convolution).
    pub fn apply_channel(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_channel_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn apply_channel_into(&self, x: &[f64], y: &mut [f64]) {
        let n = x.len();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self
                .spec
                .taps()
                .iter()
                .enumerate()
                .map(|(k, &h)| h * x[(i + n - k) % n])
                .sum();
        }
    }

    /// `y = M_h^T x` (circular correlation).
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_transpose_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        let n = x.len();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self
                .spec
                .taps()
                .iter()
                .enumerate()
                .map(|(k, &h)| h * x[(i + k) % n])
                .sum();
        }
    }

    /// `x = M_h^{-1} y`.
    pub fn apply_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        let n = y.len();
        let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.inverse_spectrum) {
            *b *= s;
        }
        self.ifft.process(&mut buf);
        Ok(buf.iter().map(|c| c.re / n as f64).collect())
    }

    /// `G v` using the circulant generator.
    pub fn apply_gram(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let n = v.len();
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.gram_row[(j + n - i) % n] * v[j])
                    .sum()
            })
            .collect())
    }
}
