//! IO, experiment orchestration and the command-line front end for the
//! no-three-in-line sampler. The algorithms live in `no3l_core`.

mod error;

pub mod cli;
pub mod experiments;
pub mod format;
pub mod parallel;

pub use error::{Error, Result};
pub use no3l_core as core;
