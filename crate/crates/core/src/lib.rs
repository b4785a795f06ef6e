//! Nonlinear N-term approximation by piecewise polynomials on dyadic cubes and rings.

pub mod approximant;
pub mod checks;
pub mod config;
pub mod dyadic;
pub mod error;
pub mod format;
pub mod grid;
pub mod pipeline;
pub mod polyfit;
pub mod render;
pub mod ring_cover;
pub mod tree;
pub mod variation;

pub use error::{Error, Result};
