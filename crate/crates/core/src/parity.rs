//! Realizable PAC learner for parities.
//!
//! Recover a replicable subspace `V*` from the sample points, solve the
//! labels on the samples inside `V*`, and output a uniformly random member
//! of the solution coset. On realizable data that coset is `w* + (V*)^⊥`
//! in every run that recovered the same `V*`, so a shared coset draw makes
//! the outputs identical.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_open, Error, Result};
use crate::gf2::{solve_affine, AffineSolution, BitVec, Subspace};
use crate::rng::RandomnessHandle;
use crate::span::{rep_linear_span, SpanParams};

/// Substream label for the coset draw.
pub const COSET_STREAM: &str = "coset";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: BitVec,
    pub y: bool,
}

impl LabeledSample {
    pub fn new(x: BitVec, y: bool) -> Self {
        LabeledSample { x, y }
    }
}

/// `f_w(x) = <w, x> mod 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParityHypothesis {
    pub w: BitVec,
}

impl ParityHypothesis {
    pub fn new(w: BitVec) -> Self {
        ParityHypothesis { w }
    }

    pub fn predict(&self, x: &BitVec) -> Result<bool> {
        self.w.dot(x)
    }
}

impl fmt::Display for ParityHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.w.fmt(f)
    }
}

pub fn predict(h: &ParityHypothesis, x: &BitVec) -> Result<bool> {
    h.predict(x)
}

/// What the learner returns. `Infeasible` means the labels on the covered
/// samples contradict every parity, which realizable data never does.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "w", rename_all = "kebab-case")]
pub enum LearnOutcome {
    Parity(ParityHypothesis),
    Infeasible,
}

impl LearnOutcome {
    pub fn hypothesis(&self) -> Option<&ParityHypothesis> {
        match self {
            LearnOutcome::Parity(h) => Some(h),
            LearnOutcome::Infeasible => None,
        }
    }
}

impl fmt::Display for LearnOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnOutcome::Parity(h) => h.fmt(f),
            LearnOutcome::Infeasible => f.write_str("infeasible"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerParams {
    pub d: usize,
    pub rho: f64,
    pub eps: f64,
    pub delta: f64,
    pub span: SpanParams,
}

impl LearnerParams {
    /// The span step gets `eps / 2`; the other half of the error budget
    /// goes to generalization.
    pub fn new(d: usize, m: usize, rho: f64, eps: f64, delta: f64) -> Result<Self> {
        check_open("delta", delta, 0.0, 1.0)?;
        let span = SpanParams::new(d, m, rho, eps / 2.0)?;
        Ok(LearnerParams {
            d,
            rho,
            eps,
            delta,
            span,
        })
    }

    pub fn with_thresholds(mut self, t_min: f64, t_max: f64) -> Self {
        self.span = self.span.with_thresholds(t_min, t_max);
        self
    }

    pub fn m(&self) -> usize {
        self.span.m
    }
}

#[derive(Clone, Debug)]
pub struct LearnReport {
    pub outcome: LearnOutcome,
    pub span: Subspace,
    /// Samples with `x` in the recovered span.
    pub covered: usize,
}

pub fn learn_parity(
    samples: &[LabeledSample],
    params: &LearnerParams,
    rnd: &RandomnessHandle,
) -> Result<LearnOutcome> {
    learn_parity_detailed(samples, params, rnd).map(|r| r.outcome)
}

pub fn learn_parity_detailed(
    samples: &[LabeledSample],
    params: &LearnerParams,
    rnd: &RandomnessHandle,
) -> Result<LearnReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("learn_parity needs at least one sample"));
    }
    for s in samples {
        check_dim(params.d, s.x.dim())?;
    }
    let xs: Vec<BitVec> = samples.iter().map(|s| s.x.clone()).collect();
    let span = rep_linear_span(&xs, &params.span, rnd)?;

    let mut equations = Vec::new();
    for s in samples {
        if span.contains(&s.x)? {
            equations.push((s.x.clone(), s.y));
        }
    }
    let covered = equations.len();

    let outcome = match solve_affine(params.d, &equations)? {
        AffineSolution::Infeasible => LearnOutcome::Infeasible,
        AffineSolution::Feasible(sols) => {
            let w = sols.sample_uniform(&mut rnd.substream(COSET_STREAM));
            LearnOutcome::Parity(ParityHypothesis::new(w))
        }
    };
    Ok(LearnReport {
        outcome,
        span,
        covered,
    })
}

/// Fraction of samples the hypothesis mislabels.
pub fn empirical_error(h: &ParityHypothesis, samples: &[LabeledSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("empirical error of an empty sample"));
    }
    let mut wrong = 0usize;
    for s in samples {
        if h.predict(&s.x)? != s.y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / samples.len() as f64)
}

/// Advisory sample size with explicit constants:
///
/// ```text
/// 900 d^6 ln(12 d / rho) / (rho^2 (eps/2)^2)  +  2 (d + ln(2/delta)) / eps^2
/// ```
///
/// The first term makes the span step cover a `1 - eps/2` fraction; the
/// second is the uniform-convergence term for `2^d` hypotheses.
pub fn recommended_sample_size(d: usize, rho: f64, eps: f64, delta: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    check_open("rho", rho, 0.0, 1.0)?;
    check_open("eps", eps, 0.0, 1.0)?;
    check_open("delta", delta, 0.0, 1.0)?;
    let df = d as f64;
    let half = eps / 2.0;
    let span_term = 900.0 * df.powi(6) * (12.0 * df / rho).ln() / (rho * rho * half * half);
    let generalization = (2.0 * (df + (2.0 / delta).ln()) / (eps * eps)).ceil();
    Ok(span_term.ceil() + generalization)
}
