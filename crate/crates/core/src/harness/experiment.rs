//! Algorithm selectors and the experiments built on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitVec, Subspace};
use crate::harness::distribution::{Distribution, DistributionSpec};
use crate::harness::stats::{estimate_agreement, estimate_two_param, AgreementReport, TwoParamReport};
use crate::parity::{empirical_error, learn_parity, LearnOutcome, LearnerParams};
use crate::rng::RandomnessHandle;
use crate::span::{rep_linear_span, SpanParams, Thresholds};
use crate::wrapper::{make_replicable, GeneratedSource, ParityBase, WrapperOutput, WrapperParams};

/// How the span thresholds are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// The closed-form defaults for `(d, m, rho)`.
    #[default]
    Derived,
    Fixed { t_min: f64, t_max: f64 },
    /// Multiples of `m / d^2`.
    Scaled { lo: f64, hi: f64 },
}

impl ThresholdRule {
    pub fn resolve(&self, d: usize, m: usize) -> Option<Thresholds> {
        match *self {
            ThresholdRule::Derived => None,
            ThresholdRule::Fixed { t_min, t_max } => Some(Thresholds::new(t_min, t_max)),
            ThresholdRule::Scaled { lo, hi } => {
                let unit = m as f64 / (d * d) as f64;
                Some(Thresholds::new(lo * unit, hi * unit))
            }
        }
    }

    pub fn span_params(&self, d: usize, m: usize, rho: f64, eps: f64) -> Result<SpanParams> {
        let p = SpanParams::new(d, m, rho, eps)?;
        let p = match self.resolve(d, m) {
            Some(t) => p.with_thresholds(t.t_min, t.t_max),
            None => p,
        };
        p.thresholds()?;
        Ok(p)
    }

    pub fn learner_params(&self, d: usize, m: usize, rho: f64, eps: f64, delta: f64) -> Result<LearnerParams> {
        let mut p = LearnerParams::new(d, m, rho, eps, delta)?;
        if let Some(t) = self.resolve(d, m) {
            p = p.with_thresholds(t.t_min, t.t_max);
        }
        p.span.thresholds()?;
        Ok(p)
    }
}

fn default_rho() -> f64 {
    0.1
}

fn default_c_t() -> f64 {
    4.0
}

fn default_one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlgorithmSpec {
    Span {
        m: usize,
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_rho")]
        eps: f64,
        #[serde(default)]
        thresholds: ThresholdRule,
    },
    Parity {
        m: usize,
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_rho")]
        eps: f64,
        #[serde(default = "default_rho")]
        delta: f64,
        #[serde(default)]
        thresholds: ThresholdRule,
    },
    /// The parity learner inside the replicability wrapper; `m` is the
    /// base learner's batch size.
    WrappedParity {
        m: usize,
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_rho")]
        eps: f64,
        #[serde(default = "default_rho")]
        delta: f64,
        #[serde(default)]
        thresholds: ThresholdRule,
        #[serde(default = "default_rho")]
        wrapper_rho: f64,
        #[serde(default = "default_rho")]
        wrapper_delta: f64,
        #[serde(default = "default_c_t")]
        c_t: f64,
        #[serde(default = "default_one")]
        c_k: f64,
        #[serde(default = "default_one")]
        c_delta: f64,
    },
    /// Returns the first sample's point; an estimator sanity check.
    FirstSample,
    /// Ignores its input.
    Constant,
}

/// Any algorithm's output, compared exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum Output {
    Subspace(Subspace),
    Parity(LearnOutcome),
    Wrapped(WrapperOutput<LearnOutcome>),
    Vector(BitVec),
    Constant,
}

impl Output {
    /// The learned parity, when there is one.
    pub fn parity(&self) -> Option<&BitVec> {
        match self {
            Output::Parity(LearnOutcome::Parity(h)) => Some(&h.w),
            Output::Wrapped(WrapperOutput::Hypothesis(LearnOutcome::Parity(h))) => Some(&h.w),
            _ => None,
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Subspace(s) => s.fmt(f),
            Output::Parity(o) => o.fmt(f),
            Output::Wrapped(o) => o.fmt(f),
            Output::Vector(v) => v.fmt(f),
            Output::Constant => f.write_str("constant"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub distribution: DistributionSpec,
    pub algorithm: AlgorithmSpec,
}

impl Experiment {
    pub fn new(distribution: DistributionSpec, algorithm: AlgorithmSpec) -> Self {
        Experiment {
            distribution,
            algorithm,
        }
    }

    pub fn d(&self) -> usize {
        self.distribution.d
    }

    /// Checks both halves without running anything.
    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        let d = self.d();
        match &self.algorithm {
            AlgorithmSpec::Span { m, rho, eps, thresholds } => {
                thresholds.span_params(d, *m, *rho, *eps)?;
            }
            AlgorithmSpec::Parity { m, rho, eps, delta, thresholds } => {
                thresholds.learner_params(d, *m, *rho, *eps, *delta)?;
            }
            AlgorithmSpec::WrappedParity {
                m,
                rho,
                eps,
                delta,
                thresholds,
                wrapper_rho,
                wrapper_delta,
                c_t,
                c_k,
                c_delta,
            } => {
                thresholds.learner_params(d, *m, *rho, *eps, *delta)?;
                WrapperParams::new(*wrapper_rho, *wrapper_delta)?.with_constants(*c_t, *c_k, *c_delta)?;
            }
            AlgorithmSpec::FirstSample | AlgorithmSpec::Constant => {}
        }
        Ok(())
    }

    /// One run: data from `data`, internal coins from `alg`.
    pub fn run(&self, dist: &Distribution, data: &RandomnessHandle, alg: &RandomnessHandle) -> Result<Output> {
        let d = self.d();
        let mut stream = data.stream();
        match &self.algorithm {
            AlgorithmSpec::Span { m, rho, eps, thresholds } => {
                let params = thresholds.span_params(d, *m, *rho, *eps)?;
                let xs: Vec<BitVec> = dist.generate(*m, &mut stream).into_iter().map(|s| s.x).collect();
                rep_linear_span(&xs, &params, alg).map(Output::Subspace)
            }
            AlgorithmSpec::Parity { m, rho, eps, delta, thresholds } => {
                let params = thresholds.learner_params(d, *m, *rho, *eps, *delta)?;
                let samples = dist.generate(*m, &mut stream);
                learn_parity(&samples, &params, alg).map(Output::Parity)
            }
            AlgorithmSpec::WrappedParity {
                m,
                rho,
                eps,
                delta,
                thresholds,
                wrapper_rho,
                wrapper_delta,
                c_t,
                c_k,
                c_delta,
            } => {
                let base = ParityBase::new(thresholds.learner_params(d, *m, *rho, *eps, *delta)?);
                let wp = WrapperParams::new(*wrapper_rho, *wrapper_delta)?.with_constants(*c_t, *c_k, *c_delta)?;
                let mut source = GeneratedSource::new(stream, |s: &mut _| Ok(dist.sample(s)));
                let report = make_replicable(&base, &wp, &mut source, alg)?;
                Ok(Output::Wrapped(report.output))
            }
            AlgorithmSpec::FirstSample => Ok(Output::Vector(dist.sample(&mut stream).x)),
            AlgorithmSpec::Constant => Ok(Output::Constant),
        }
    }
}

/// Paired runs per trial: fresh distribution at `trial-i/distribution`,
/// independent datasets, shared algorithm coins.
pub fn estimate_replicability(exp: &Experiment, trials: usize, root: &RandomnessHandle) -> Result<AgreementReport> {
    exp.validate()?;
    estimate_agreement(root, trials, |h| {
        let dist = exp.distribution.resolve(&h.distribution)?;
        let a = exp.run(&dist, &h.sample_a, &h.algorithm)?;
        let b = exp.run(&dist, &h.sample_b, &h.algorithm)?;
        Ok((a, b))
    })
}

/// Modal-output mass per fixed seed; the distribution is resolved once at
/// `root/distribution`.
pub fn estimate_two_param_replicability(
    exp: &Experiment,
    seeds: usize,
    trials_per_seed: usize,
    eta: f64,
    root: &RandomnessHandle,
) -> Result<TwoParamReport> {
    exp.validate()?;
    let dist = exp.distribution.resolve(&root.child("distribution"))?;
    estimate_two_param(root, seeds, trials_per_seed, eta, |alg, data| exp.run(&dist, data, alg))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub index: usize,
    pub path: String,
    pub output: String,
    /// Holdout error of the learned parity; absent when there is none.
    pub holdout_error: Option<f64>,
    /// Whether the output equals the hidden parity.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub trials: usize,
    pub holdout: usize,
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyReport {
    /// Trials without a parity output (bottom or infeasible).
    pub fn no_output(&self) -> usize {
        self.rows.iter().filter(|r| r.holdout_error.is_none()).count()
    }

    pub fn exact(&self) -> usize {
        self.rows.iter().filter(|r| r.exact).count()
    }

    /// Trials with holdout error at most `eps`.
    pub fn within(&self, eps: f64) -> usize {
        self.rows
            .iter()
            .filter(|r| r.holdout_error.is_some_and(|e| e <= eps))
            .count()
    }
}

/// Trains once per trial and measures error on `holdout` fresh samples.
pub fn accuracy_bench(exp: &Experiment, trials: usize, holdout: usize, root: &RandomnessHandle) -> Result<AccuracyReport> {
    use rayon::prelude::*;

    exp.validate()?;
    if holdout == 0 {
        return Err(Error::EmptyInput("holdout size must be positive"));
    }
    let rows = (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial = root.child_index("trial", i as u64);
            let dist = exp.distribution.resolve(&trial.child("distribution"))?;
            let out = exp.run(&dist, &trial.child("sample"), &trial.child("algorithm"))?;
            let test = dist.generate(holdout, &mut trial.substream("holdout"));
            let (holdout_error, exact) = match out.parity() {
                Some(w) => {
                    let h = crate::parity::ParityHypothesis::new(w.clone());
                    (Some(empirical_error(&h, &test)?), dist.hidden_parity() == Some(w))
                }
                None => (None, false),
            };
            Ok(AccuracyRow {
                index: i,
                path: trial.path(),
                output: out.to_string(),
                holdout_error,
                exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyReport { trials, holdout, rows })
}
