//! Numerical toolkit for quantum kinematics: Born probabilities over
//! non-Boolean event spaces, Lüders conditionalization and remote steering,
//! environment-induced decoherence, and tomographic state reconstruction with
//! a measure-and-prepare information-loss demonstration.
//!
//! The crate is generic over the real scalar through [`Scalar`] (with `f64`
//! as the working precision — see the aliases at the root) and every
//! operation is a pure function over immutable values, safe for concurrent
//! read-only use.

pub mod conditionalization;
pub mod decoherence;
pub mod error;
pub mod event_space;
pub mod infoloss;
pub mod linalg;
pub mod random;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Scalar, Tolerances};

/// `f64` working-precision aliases.
pub type Matrix64 = linalg::ComplexMatrix<f64>;
pub type Vector64 = linalg::StateVector<f64>;
pub type Density64 = linalg::DensityOperator<f64>;
pub type Projector64 = event_space::Projector<f64>;
pub type Pvm64 = event_space::Pvm<f64>;
pub type Tolerances64 = scalar::Tolerances<f64>;

/// Single-precision aliases for the substrate types.
pub type Matrix32 = linalg::ComplexMatrix<f32>;
pub type Vector32 = linalg::StateVector<f32>;
