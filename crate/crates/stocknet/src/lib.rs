//! Dependence-network analysis for multivariate return series.

pub mod copula;
pub mod dependence;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod mi;
pub mod nonlin;
pub mod panel;
pub mod filter;
pub mod graph;
pub mod pipeline;
pub mod planarity;
pub mod rng;
pub mod sample;
pub mod surrogate;

pub use error::{Error, Result};
