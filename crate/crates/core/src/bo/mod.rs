//! Expected-improvement search over a candidate set and the baselines it is
//! compared against.

mod acquisition;
mod baselines;
mod optimizer;
mod record;
mod strategy;

pub use acquisition::{expected_improvement, select_next};
pub use baselines::{run_ga, run_random, run_sa, sa_temperatures, BitEncoding, GaConfig, SaConfig};
pub use optimizer::{initial_design, run_gbo, GboConfig, GboOptimizer, Suggestion};
pub use record::{FitTrace, RunRecord, Step, Stop};
pub use strategy::{run_strategy, SearchProblem, Strategy, StrategyOptions};
