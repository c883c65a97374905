//! Single-photon scattering by a chain of two-level qubits in a
//! one-dimensional waveguide, with the qubit–field coupling restricted to
//! positive frequencies.
//!
//! Frequencies are measured in units of the qubit frequency Ω, times in
//! units of 1/Ω, and qubit positions are stored as phases k₀x. SI inputs
//! are converted once, in [`kernels::ChainConfig`] and [`pulse::PulseSpec`].

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod closed_form;
pub mod dynamics;
pub mod error;
pub mod golden;
pub mod kernels;
pub mod oracle;
pub mod pulse;
pub mod quadrature;
pub mod scenario;
pub mod solver;
pub mod specfun;

pub use error::{Error, ErrorKind, Result};
