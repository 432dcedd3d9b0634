pub mod config;
pub mod report;
pub mod runner;

pub use config::{Benchmark, CandidateSpec, ExperimentConfig, KernelSection, Partition, ProjectSpec, Seeds};
pub use runner::{
    hartmann_global_max, median, prepare, quantile, run_experiment, run_prepared, summarize, write_outputs,
    ExperimentResult, Prepared, StrategySummary, Summary,
};
