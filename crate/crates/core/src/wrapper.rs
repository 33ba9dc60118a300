//! Upgrade a learner that is replicable on realizable sources into one that
//! is replicable on every source.
//!
//! Each round fixes one base substream, runs the base learner on `k` fresh
//! batches with that same substream, and looks for a replicable heavy hitter
//! among the `k` outputs. The first round with a nonempty list decides the
//! output; after `T` empty rounds the result is [`WrapperOutput::Bottom`].

use std::fmt;
use std::hash::Hash;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_open, Error, Result};
use crate::heavy_hitters::{r_heavy_hitters, HHParams};
use crate::parity::{learn_parity, LabeledSample, LearnOutcome, LearnerParams};
use crate::rng::{RandomStream, RandomnessHandle};

/// A learner run on fixed-size batches. Must be deterministic given the
/// batch and the handle.
pub trait BaseLearner: Sync {
    type Sample: Send + Sync;
    type Hypothesis: Ord + Hash + Clone + Send;

    fn batch_size(&self) -> usize;

    fn learn(&self, batch: &[Self::Sample], rnd: &RandomnessHandle) -> Result<Self::Hypothesis>;
}

/// Pull interface for fresh samples.
pub trait SampleSource {
    type Sample;

    fn next_batch(&mut self, n: usize) -> Result<Vec<Self::Sample>>;
}

/// Serves a fixed dataset front to back.
#[derive(Clone, Debug)]
pub struct VecSource<S> {
    data: Vec<S>,
    pos: usize,
}

impl<S> VecSource<S> {
    pub fn new(data: Vec<S>) -> Self {
        VecSource { data, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }
}

impl<S: Clone> SampleSource for VecSource<S> {
    type Sample = S;

    fn next_batch(&mut self, n: usize) -> Result<Vec<S>> {
        if n > self.remaining() {
            return Err(Error::DataExhausted {
                requested: n,
                available: self.remaining(),
            });
        }
        let batch = self.data[self.pos..self.pos + n].to_vec();
        self.pos += n;
        Ok(batch)
    }
}

/// Draws samples one at a time from a generator closure.
pub struct GeneratedSource<F> {
    stream: RandomStream,
    draw: F,
    drawn: usize,
}

impl<F> GeneratedSource<F> {
    pub fn new(stream: RandomStream, draw: F) -> Self {
        GeneratedSource {
            stream,
            draw,
            drawn: 0,
        }
    }

    pub fn drawn(&self) -> usize {
        self.drawn
    }
}

impl<S, F> SampleSource for GeneratedSource<F>
where
    F: FnMut(&mut RandomStream) -> Result<S>,
{
    type Sample = S;

    fn next_batch(&mut self, n: usize) -> Result<Vec<S>> {
        let mut batch = Vec::with_capacity(n);
        for _ in 0..n {
            batch.push((self.draw)(&mut self.stream)?);
        }
        self.drawn += n;
        Ok(batch)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WrapperParams {
    pub rho: f64,
    pub delta: f64,
    pub c_t: f64,
    pub c_k: f64,
    pub c_delta: f64,
}

impl WrapperParams {
    /// Requires `rho in (0, 1/8)` and `delta in (0, 1/4)`.
    pub fn new(rho: f64, delta: f64) -> Result<Self> {
        check_open("rho", rho, 0.0, 0.125)?;
        check_open("delta", delta, 0.0, 0.25)?;
        Ok(WrapperParams {
            rho,
            delta,
            c_t: 4.0,
            c_k: 1.0,
            c_delta: 1.0,
        })
    }

    pub fn with_constants(mut self, c_t: f64, c_k: f64, c_delta: f64) -> Result<Self> {
        for (name, v) in [("c_t", c_t), ("c_k", c_k), ("c_delta", c_delta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive and finite",
                });
            }
        }
        self.c_t = c_t;
        self.c_k = c_k;
        self.c_delta = c_delta;
        Ok(self)
    }

    /// `T = ceil(c_T ln(1/delta) / ln(1/rho))`, at least 1.
    pub fn rounds(&self) -> usize {
        let t = (self.c_t * (1.0 / self.delta).ln() / (1.0 / self.rho).ln()).ceil();
        (t as usize).max(1)
    }

    /// `k = ceil(c_k T^2 / rho^2 ln(T / rho))`, at least 1.
    pub fn batches_per_round(&self) -> usize {
        let t = self.rounds() as f64;
        let k = (self.c_k * t * t / (self.rho * self.rho) * (t / self.rho).ln()).ceil();
        (k as usize).max(1)
    }

    /// Confidence the base learner should be run at:
    /// `c_delta delta rho^2 ln(1/rho) / ln(1/delta)`.
    pub fn base_confidence(&self) -> f64 {
        self.c_delta * self.delta * self.rho * self.rho * (1.0 / self.rho).ln()
            / (1.0 / self.delta).ln()
    }

    /// Heavy hitters run with `eps = 1/12`, `nu = 2/3` and `rho / (2T)`.
    pub fn heavy_hitter_params(&self) -> HHParams {
        HHParams::wrapper_default(self.rho / (2.0 * self.rounds() as f64))
            .expect("rho / 2T lies in (0, 1)")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum WrapperOutput<H> {
    Hypothesis(H),
    Bottom,
}

impl<H> WrapperOutput<H> {
    pub fn hypothesis(&self) -> Option<&H> {
        match self {
            WrapperOutput::Hypothesis(h) => Some(h),
            WrapperOutput::Bottom => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, WrapperOutput::Bottom)
    }
}

impl<H: fmt::Display> fmt::Display for WrapperOutput<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WrapperOutput::Hypothesis(h) => h.fmt(f),
            WrapperOutput::Bottom => f.write_str("bottom"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WrapperReport<H> {
    pub output: WrapperOutput<H>,
    pub rounds_executed: usize,
    /// Always `rounds_executed * k * batch_size`.
    pub samples_consumed: usize,
}

pub fn make_replicable<B, S>(
    base: &B,
    params: &WrapperParams,
    data: &mut S,
    rnd: &RandomnessHandle,
) -> Result<WrapperReport<B::Hypothesis>>
where
    B: BaseLearner,
    S: SampleSource<Sample = B::Sample>,
{
    let rounds = params.rounds();
    let k = params.batches_per_round();
    let m_a = base.batch_size();
    let hh = params.heavy_hitter_params();

    let mut consumed = 0;
    for t in 1..=rounds {
        let round = rnd.child_index("round", t as u64);
        let r1 = round.child("base");
        let r2 = round.child("hh");

        // batch j always goes to call j, whatever the execution order
        let mut batches = Vec::with_capacity(k);
        for _ in 0..k {
            batches.push(data.next_batch(m_a)?);
        }
        consumed += k * m_a;

        let outputs: Vec<B::Hypothesis> = batches
            .par_iter()
            .map(|batch| base.learn(batch, &r1))
            .collect::<Result<_>>()?;

        let list = r_heavy_hitters(&outputs, &hh, &r2)?;
        if !list.is_empty() {
            let pick = round.substream("pick").index(list.len());
            return Ok(WrapperReport {
                output: WrapperOutput::Hypothesis(list[pick].clone()),
                rounds_executed: t,
                samples_consumed: consumed,
            });
        }
    }
    Ok(WrapperReport {
        output: WrapperOutput::Bottom,
        rounds_executed: rounds,
        samples_consumed: consumed,
    })
}

/// The parity learner as a base learner; `Infeasible` is an ordinary
/// hypothesis value here so non-realizable rounds still compare exactly.
#[derive(Clone, Debug)]
pub struct ParityBase {
    pub params: LearnerParams,
}

impl ParityBase {
    pub fn new(params: LearnerParams) -> Self {
        ParityBase { params }
    }
}

impl BaseLearner for ParityBase {
    type Sample = LabeledSample;
    type Hypothesis = LearnOutcome;

    fn batch_size(&self) -> usize {
        self.params.m()
    }

    fn learn(&self, batch: &[LabeledSample], rnd: &RandomnessHandle) -> Result<LearnOutcome> {
        learn_parity(batch, &self.params, rnd)
    }
}
