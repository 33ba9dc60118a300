//! Experiment harness: distributions, paired-run estimators, benches and
//! reports.

pub mod bench;
pub mod coverage;
pub mod dataset;
pub mod distribution;
pub mod experiment;
pub mod hh;
pub mod sensitivity;
pub mod stats;

pub use bench::{run_bench, BenchReport, BenchSpec, ExperimentConfig, Format};
pub use coverage::{coverage_bench, CoverageReport, CoverageSpec};
pub use dataset::Dataset;
pub use distribution::{generate, Distribution, DistributionSpec, ParitySpec, Support};
pub use experiment::{
    accuracy_bench, estimate_replicability, estimate_two_param_replicability, AlgorithmSpec, Experiment, Output,
    ThresholdRule,
};
pub use sensitivity::{sensitivity_exhaustive, sensitivity_oracle, NeighborMode, SensitivityReport};
pub use stats::{wilson_interval, AgreementReport, TwoParamReport};
