//! Exact arithmetic for Bedford-McMullen carpets carrying the uniform
//! Bernoulli measure: reverse run lengths, certified ball measures,
//! point-wise doubling indices and Lipschitz-invariant comparison.
//!
//! Geometry and measure routines are generic over [`scalar::Scalar`]; the
//! aliases below fix the two scalar types used in practice.

pub mod carpet;
pub mod classify;
pub mod coding;
pub mod error;
pub mod hp;
pub mod index;
pub mod measure;
pub mod report;
pub mod runlength;
pub mod scalar;

pub use carpet::{Carpet, CarpetSpec, Digit, FiberSequence};
pub use coding::{Coding, Point};
pub use error::{Error, Result};

/// Exact rationals.
pub type Rational = num_rational::BigRational;
/// A point with exact rational coordinates.
pub type ExactPoint = coding::Point<Rational>;
/// A point with `f64` coordinates, for sampling and plotting.
pub type FastPoint = coding::Point<f64>;
