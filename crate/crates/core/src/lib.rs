//! Time-resolved EPR of radical–triplet systems as open quantum systems.
//!
//! The crate builds the effective spin models of single- and double-radical
//! triplet systems (SRTS/DRTS), evolves them under the Lindblad equation in
//! a dense Liouville-space representation, and evaluates linear-response
//! susceptibilities of the (generally non-stationary) state.
//!
//! Module map:
//!
//! - [`linalg`]: dense complex matrices, LU, matrix exponentials, Hermitian
//!   and general eigendecompositions.
//! - [`spin`]: spin matrices, structured Hilbert spaces, total-spin bases.
//! - [`model`]: Hamiltonians, jump channels and initial states.
//! - [`liouville`]: vectorization, Lindblad superoperators, adjoints.
//! - [`propagate`]: piecewise-constant time evolution and observables.
//! - [`response`]: susceptibilities, field sweeps, line-shape analysis.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod lineshape;
pub mod liouville;
pub mod model;
pub mod propagate;
pub mod response;
pub mod spin;
pub mod units;

pub use error::{Error, Result};
pub use linalg::{c64, CMatrix};
pub use liouville::{DensityOperator, SuperOperator};
pub use model::{JumpChannel, Model, ModelKind, ModelParams};
pub use num_complex::Complex64;
pub use propagate::{Protocol, Trajectory};
pub use response::{Probe, SpectrumConfig, SpectrumResult};
pub use spin::{CoupledBasis, Manifold, Spin, SpinOps, StructuredSpace};
pub use units::UnitSystem;
