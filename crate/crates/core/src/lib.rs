//! Replicable learning of parities over GF(2).
//!
//! The crate is layered bottom-up:
//!
//! * [`gf2`]: bit-packed vectors, canonical subspaces and affine solving;
//! * [`partition`]: the greedy independent-set partition and its histogram;
//! * [`span`]: replicable recovery of a heavy subspace;
//! * [`parity`]: the realizable parity learner;
//! * [`heavy_hitters`] and [`wrapper`]: the all-distribution upgrade;
//! * [`harness`]: generators, estimators and experiment reports.
//!
//! All randomness flows through [`RandomnessHandle`], so two runs given the
//! same handle toss the same coins.

pub mod error;
pub mod gf2;
pub mod harness;
pub mod heavy_hitters;
pub mod parity;
pub mod partition;
#[cfg(test)]
mod properties;
pub mod rng;
pub mod span;
pub mod wrapper;

pub use error::{Error, Result};
pub use gf2::{
    rank, rref, sample_uniform, solve_affine, AffineSolution, AffineSolutionSet, BitVec,
    EchelonBasis, Subspace,
};
pub use heavy_hitters::{r_heavy_hitters, HHParams};
pub use parity::{
    empirical_error, learn_parity, predict, recommended_sample_size, LabeledSample, LearnOutcome,
    LearnerParams, ParityHypothesis,
};
pub use partition::{multiplicities, stable_partition, MultiplicityMap, Partition};
pub use rng::{RandomStream, RandomnessHandle, Seed};
pub use span::{derive_thresholds, rep_linear_span, uncovered_fraction, SpanParams, Thresholds};
pub use wrapper::{make_replicable, BaseLearner, SampleSource, WrapperOutput, WrapperParams};
