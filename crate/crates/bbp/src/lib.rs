//! Simulation of broadband pulsed homodyne detection with energy-weighted
//! detectors on truncated Fock spaces, together with quantitative checks of
//! its convergence to an ideal quadrature measurement.
//!
//! The crate is organized in layers:
//!
//! - [`fock`]: basis enumeration, ladder and detector observables, Hermitian
//!   eigendecomposition and discrete spectral measures.
//! - [`states`]: coherent states, Fock states and their finite
//!   superpositions, with displacement-operator cross checks.
//! - [`optics`]: beamsplitter conventions, LO amplitudes and the mode-basis
//!   rotation that isolates the measured quadrature's mode.
//! - [`measurement`]: the finite-LO measurement operator, its outcome
//!   distribution, and two independent oracle pipelines.
//! - [`ideal`]: the exact quadrature distribution via oscillator
//!   eigenfunctions.
//! - [`convergence`]: moment sweeps, scaling-exponent fits, weak-convergence
//!   metrics and the bilinear-form check.
//! - [`scenario`]: JSON-configured runs producing CSV and JSON artifacts.
//! - [`acceptance`]: the built-in verification suite used by `bbp check`.

pub mod error;
pub mod fock;
pub mod linalg;
pub mod optics;
pub mod states;

pub use error::{Error, Result};
