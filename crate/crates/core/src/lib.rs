//! Niching genetic algorithms for wrapper-style variable selection.
//!
//! The library couples eight niching GA variants (deterministic and
//! probabilistic crowding, restricted tournament selection, worst-among-most-
//! similar, enhanced crowding, and their fitness-sharing hybrids) with a
//! pseudo-inverse linear-regression fitness function, and provides the
//! dataset construction, post-run analysis, and experiment harness around
//! them.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod fitness;
pub mod ga;
pub mod niching;
pub mod regression;

pub use error::Error;
