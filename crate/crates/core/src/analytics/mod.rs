//! Weight functionals bounding the mean and variance of the triple count,
//! and Monte Carlo aggregation.

mod lines;
mod moments;

pub use lines::*;
pub use moments::*;
