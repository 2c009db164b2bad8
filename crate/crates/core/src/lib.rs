//! Secret key rates for continuous-variable QKD with discrete phase-shift-keyed
//! coherent-state modulation, under collective attacks and reverse reconciliation.
//!
//! The crate is organised bottom-up:
//!
//! - [`modulation`]: analytic spectrum of the PSK ensemble state and the
//!   entries of the source covariance matrix.
//! - [`fock`]: brute-force truncated Fock-space reconstruction of the same
//!   quantities, used as an independent oracle.
//! - [`channel`]: fiber link and trusted-detector noise budget, plus a
//!   Monte-Carlo quadrature sampler.
//! - [`keyrate`]: mutual information, Holevo bound and the two computation
//!   paths for the conditional symplectic spectrum.
//! - [`sweep`]: configuration, distance sweeps, variance optimisation and CSV
//!   output used by the `cvqkd` binary.
//!
//! Quadratures are expressed in shot-noise units (vacuum variance 1) and all
//! logarithms are base 2, so rates are in bits per channel use.

pub mod channel;
pub mod error;
pub mod fock;
pub mod keyrate;
pub mod modulation;
pub mod sweep;

pub use error::{Error, Result};
