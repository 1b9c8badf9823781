//! Projection-free online convex optimization under arbitrary, unknown
//! gradient delays.
//!
//! - [`geometry`]: feasible sets with linear minimization oracles
//! - [`losses`]: seeded online loss streams
//! - [`delay`]: delay schedules and the feedback queue
//! - [`solvers`]: delayed online Frank-Wolfe, delayed OGD, and the registry
//! - [`oracle`]: independent ground truth used by tests and `gapcheck`
//! - [`harness`]: experiment runner, config files, sweeps and CSV output

pub mod delay;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod losses;
pub mod oracle;
pub mod solvers;
pub mod vector;

pub use error::{Error, Result};
pub use vector::Vector;
