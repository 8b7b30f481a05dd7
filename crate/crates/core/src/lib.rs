//! Approximate capacity of ISI channels with 1-bit quantized output.
//!
//! The noisy channel `R = M_h X + Z` followed by a sign quantizer is replaced by a
//! noiseless surrogate in which the unquantized output must satisfy `|Y_n| >= delta`.
//! Under that constraint the quantized output is a deterministic function of the
//! input, so capacity reduces to maximizing the output entropy subject to an
//! average-energy budget. This crate provides:
//!
//! * [`channel`]: circulant channel operators, DFT gains and the diagonal-dominance test.
//! * [`energy`]: minimum energy `E(s)` per output sign pattern, analytic or by a dual QP.
//! * [`gibbs`]: Gibbs maximum-entropy distributions and the approximate capacity `C(P)`.
//! * [`markov`]: zero-forcing with a two-state Markov input and its achievable rate.
//! * [`spectral`]: periodic quadrature and the power thresholds of two-tap channels.
//! * [`sim`]: Monte-Carlo check of the approximation error on the true noisy channel.

pub mod channel;
pub mod energy;
pub mod error;
pub mod gibbs;
pub mod markov;
mod numeric;
pub mod sim;
pub mod spectral;

pub use channel::{quantize, ChannelOperators, ChannelSpec};
pub use energy::{EnergyProfile, EnergySolution, SignPattern};
pub use error::{Error, Result};
pub use gibbs::{GibbsSolution, Regime};
pub use markov::{MarkovScheme, PowerModel, RateSolution};
pub use sim::{NoisySimConfig, SimReport};
pub use spectral::QuadratureResult;
