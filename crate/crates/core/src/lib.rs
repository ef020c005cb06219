//! Label-frugal active learning by exemplar design.
//!
//! Instead of sampling queries from a fixed pool, each round designs a
//! display of exemplars by minimizing a representativity + diversity +
//! uncertainty objective with a fixed-point iteration, optionally in the
//! latent space of an invertible, stability-certified network, and
//! measures the labeling-budget/accuracy trade-off against baseline
//! strategies.

pub mod active;
pub mod display;
pub mod error;
pub mod experiment;
pub mod net;
pub mod numerics;
pub mod skeleton;

pub use error::{Error, Result};
