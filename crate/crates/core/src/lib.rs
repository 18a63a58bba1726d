//! Time-varying SNR, sharing-number and shared-rate processes seen by a mobile
//! moving on a straight line through a Poisson field of wireless nodes.

// `!(x > 0.0)` checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::should_implement_trait)]

pub mod apps;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod mginf;
pub mod model;
pub mod quad;
pub mod rng;
pub mod sharedrate;
pub mod sharing;
pub mod stats;
pub mod trace;

pub use error::{Error, Result};
