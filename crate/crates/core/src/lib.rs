//! Gaussian approximation of Levy processes: truncated scaling matrices,
//! exact compound-Poisson simulation, distance estimators and long-time
//! diagnostics.
//!
//! Everything numeric is generic over [`Real`] (`f64` and `f32`); the aliases
//! below fix `f64`.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod distances;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = linalg::Matrix<f64>;
pub type Triplet = measures::LevyTriplet<f64>;
pub type RadialMeasure = measures::RadialLevyMeasure<f64>;
pub type Batch = simulate::SampleBatch<f64>;
pub type Estimate = distances::DistanceEstimate<f64>;
pub type Sweep = diagnostics::SweepReport<f64>;
pub type ScalingPair = measures::ScalingPair<f64>;
