//! Binary digital nets on the dyadic cube, their dual distributions, and the
//! Walsh-analytic approximation of the discrepancy function.
//!
//! Exact computations use [`walsh::DyadicRational`]; Monte Carlo estimates in
//! [`norms`] use `f64`.

pub mod discrepancy;
pub mod error;
pub mod f2;
pub mod nets;
pub mod norms;
pub mod verify;
pub mod walsh;

pub use error::{Error, Result};
pub use f2::{Ambient, DyadicCoord, DyadicPoint, F2Subspace};
pub use nets::{DigitShift, GeneratorSet, NetQuality, PointSet};
pub use walsh::DyadicRational;
