//! Numerical workbench for two-dimensional inverse backscattering: forward
//! Lippmann–Schwinger solves, the backscattering Born approximation, the
//! cubic Born term by singular quadrature, and Sobolev regularity estimates.

// `!(x > 0.0)` is how parameter checks reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod born;
pub mod error;
pub mod grid;
pub mod krylov;
pub mod parallel;
pub mod potentials;
pub mod q3quad;
pub mod quadrature;
pub mod resolvent;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use potentials::{FourierEvaluator, PotentialSpec};
pub use scalar::Scalar;

/// Double-precision aliases used by the physics modules.
pub type Grid = grid::Grid2D;
pub type RealField = grid::RealField<f64>;
pub type ComplexField = grid::ComplexField<f64>;
pub type SpectrumField = grid::SpectrumField<f64>;
