//! Adaptive subdivision of real polynomial hypersurfaces, instrumented with
//! local condition numbers, local size bounds and continuous-amortization
//! cost estimates.

pub mod amortize;
pub mod condition;
pub mod error;
pub mod geometry;
pub mod poly;
pub mod randpoly;
pub mod subdivide;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil;
