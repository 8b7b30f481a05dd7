use crate::energy::EnergySolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel is singular: |f(2*pi*{index}/N)| = {magnitude:e} is below tolerance {tolerance:e}")]
    SingularChannel {
        index: usize,
        magnitude: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("Gram inverse is not diagonally dominant; the closed-form energy does not apply")]
    NotDiagonallyDominant,

    #[error("dual QP did not converge after {iterations} iterations (gap {gap:e})")]
    NoConvergence {
        iterations: usize,
        gap: f64,
        best: Box<EnergySolution>,
    },

    #[error("block length {n} exceeds the limit of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("power {power} is below the feasibility threshold E_min/N = {e_min_per_use}")]
    InfeasiblePower { power: f64, e_min_per_use: f64 },

    #[error("periodic quadrature did not reach tolerance {tol:e} (last change {est_error:e} at {grid_size} points)")]
    QuadratureFailure {
        tol: f64,
        est_error: f64,
        grid_size: usize,
    },
}
