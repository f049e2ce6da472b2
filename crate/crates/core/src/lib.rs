//! Numerics for 1-D Schrödinger operators with Coulomb-like potentials
//! regularized near the origin and perturbed by shrinking
//! `eps^-2 U(x/eps) + eps^-1 V(x/eps)` profiles.
//!
//! The crate is organised bottom-up:
//!
//! * [`potentials`] – the singular background `Q`, its regularizations and
//!   the distributional pairing diagnostic.
//! * [`odes`] – adaptive integration, the log-corrected fundamental system at
//!   the Coulomb point and decaying solutions.
//! * [`resonance`] – zero-energy resonances and half-bound states.
//! * [`limit_operator`] – classification of the `eps -> 0` limit, its
//!   resolvent and scattering.
//! * [`eps_operator`] – resolvent and scattering for a fixed `eps`.
//! * [`harness`] – sweeps over `eps`, rate fits and penetrability tables.
//! * [`cli`] – the command line front end.

pub mod cli;
pub mod eps_operator;
pub mod error;
pub mod harness;
pub mod limit_operator;
pub mod odes;
pub mod potentials;
pub mod quadrature;
pub mod resonance;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Build identifier embedded in every CLI output.
pub const BUILD_ID: &str = concat!("coulomb-limit ", env!("CARGO_PKG_VERSION"));
