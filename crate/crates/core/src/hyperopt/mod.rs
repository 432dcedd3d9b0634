//! Hyperparameter estimation for the combined-kernel GP.

mod fit;
mod nelder_mead;

pub use fit::{fit_params, FitResult, HyperoptOptions, Pins};
pub use nelder_mead::{nelder_mead, nelder_mead_max, NelderMeadOptions, NelderMeadResult};
