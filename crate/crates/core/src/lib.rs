//! Spatial-change event (SCE) sequences and prefix-forest tuple mining for
//! multidimensional time series.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`data`]: load or generate samples, normalize each dimension to `[0, 1]`.
//! 2. [`symbolize`]: turn each step into one event code over the `3^D`
//!    alphabet of joint up/flat/down motions.
//! 3. [`miner`]: count contiguous event tuples in a prefix forest, prune by
//!    document support and keep the root-to-leaf paths.
//! 4. [`features`] and [`eval`]: vectorize samples over the mined tuples and
//!    measure classification accuracy and CPU time.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod miner;
pub mod symbolize;

pub use error::{Result, StemError};
