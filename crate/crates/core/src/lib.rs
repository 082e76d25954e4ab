//! Exact and Monte Carlo tools for trimmed sums of `⌊1/x⌋` along doubling-map orbits.

pub mod dynamics;
pub mod error;
pub mod exactnum;
pub mod harness;
pub mod observables;
pub mod spectral;
pub mod trimming;

pub use error::{Error, Result};
