//! Representations of integers as sums of five squares of primes whose
//! squares have fractional parts `{η·p²}` (or `{η·p}`) in a fixed window,
//! with a quadratic irrational η.

pub mod counting;
pub mod diophantine;
pub mod error;
pub mod expsum;
pub mod harness;
mod ntt;
pub mod primes;
pub mod report;
pub mod sigma;
pub mod smoothing;

pub use error::{Error, Result};
