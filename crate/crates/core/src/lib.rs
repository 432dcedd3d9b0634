//! Bayesian optimization over sets of graphs.

pub mod bo;
pub mod error;
pub mod experiment;
pub mod features;
pub mod gp;
pub mod graph;
pub mod hyperopt;
pub mod kernels;
pub mod objectives;
pub mod rng;
pub mod traffic;

pub use error::{GboError, Result};
