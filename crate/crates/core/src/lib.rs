//! Exact integer geometry and randomized constructions for the extensible
//! no-three-in-line problem.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation. File formats, experiment orchestration and the command line
//! live in the `no3l` companion crate.
//!
//! The pipeline mirrors the construction it implements:
//!
//! 1. [`sampling`] realizes a random set `Q` on dyadic shells
//!    `R_T = {x : 2^T <= |x|_inf < 2^(T+1)}` with inclusion probability
//!    `c / (2^T sqrt(T))`, using a counter-based uniform map so every
//!    decision is a pure function of `(seed, x, y)`.
//! 2. [`triples`] counts collinear triples exactly.
//! 3. [`construct`] deletes the norm-largest point of every collinear triple,
//!    producing a set `S` with no three points on a line.
//! 4. [`analytics`] computes the line-weight functionals that bound the mean
//!    and variance of the triple count, and aggregates Monte Carlo moments.
#![no_std]

extern crate alloc;

pub mod analytics;
pub mod construct;
mod error;
pub mod geom;
pub mod rng;
pub mod sampling;
pub mod sum;
pub mod triples;

pub use error::{Error, Result};
pub use geom::{LatticeLine, Point, PrimitiveDirection, ShellIndex};
pub use sampling::{PointSet, Provenance, SamplerConfig, SetKind};
