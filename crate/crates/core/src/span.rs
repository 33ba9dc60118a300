//! Replicable linear span.
//!
//! Partition the nonzero inputs greedily, count how many blocks span each
//! subspace, draw a threshold `t` uniformly from `[T_min, T_max]` and return
//! the largest subspace whose count reaches `t`. Because the block spans form
//! a chain, the heavy subspaces are totally ordered and the largest is
//! unique. Two runs that share the threshold draw agree whenever their heavy
//! sets coincide.
//!
//! Whatever `t` is drawn, the output lies inside the span of the input and
//! leaves at most `d^2 * T_max` inputs uncovered.

use serde::Serialize;

use crate::error::{check_dim, check_open, Error, Result};
use crate::gf2::{BitVec, Subspace};
use crate::partition::{multiplicities, stable_partition, MultiplicityMap};
use crate::rng::RandomnessHandle;

/// Substream label for the threshold draw.
pub const THRESHOLD_STREAM: &str = "span-threshold";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub t_min: f64,
    pub t_max: f64,
}

impl Thresholds {
    pub fn new(t_min: f64, t_max: f64) -> Self {
        Thresholds { t_min, t_max }
    }

    /// Checks `T_min < T_max` and `T_max < m / d^2`. The second inequality
    /// is what guarantees a nonempty heavy set on `m` nonzero vectors.
    pub fn validate(&self, d: usize, m: usize) -> Result<()> {
        if !(self.t_min.is_finite() && self.t_max.is_finite()) || self.t_min < 0.0 {
            return Err(Error::InvalidParameter {
                name: "t_min",
                value: self.t_min,
                reason: "thresholds must be finite and non-negative",
            });
        }
        if self.t_min >= self.t_max {
            return Err(Error::ThresholdOrder {
                t_min: self.t_min,
                t_max: self.t_max,
            });
        }
        let limit = m as f64 / (d * d) as f64;
        if self.t_max >= limit {
            return Err(Error::ThresholdTooLarge {
                t_max: self.t_max,
                limit,
            });
        }
        Ok(())
    }

    /// Deterministic coverage guarantee: `d^2 * T_max` inputs may be missed.
    pub fn uncovered_bound(&self, d: usize) -> f64 {
        (d * d) as f64 * self.t_max
    }
}

/// The closed-form defaults, without the validity check:
///
/// ```text
/// T_min = sqrt(2 m (d^2 + ln(6/rho)))
/// T_max = (30 d / rho) * sqrt(m ln(12 d / rho))
/// ```
pub fn threshold_formulas(d: usize, m: usize, rho: f64) -> Result<Thresholds> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if m == 0 {
        return Err(Error::EmptyInput("sample count m must be positive"));
    }
    check_open("rho", rho, 0.0, 1.0)?;
    let (d, m) = (d as f64, m as f64);
    let t_min = (2.0 * m * (d * d + (6.0 / rho).ln())).sqrt();
    let t_max = (30.0 * d / rho) * (m * (12.0 * d / rho).ln()).sqrt();
    Ok(Thresholds { t_min, t_max })
}

/// Default thresholds, rejected when `m` is too small for `(d, rho)`.
pub fn derive_thresholds(d: usize, m: usize, rho: f64) -> Result<Thresholds> {
    let t = threshold_formulas(d, m, rho)?;
    t.validate(d, m)?;
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpanParams {
    pub d: usize,
    pub m: usize,
    pub rho: f64,
    pub eps: f64,
    pub threshold_override: Option<Thresholds>,
}

impl SpanParams {
    pub fn new(d: usize, m: usize, rho: f64, eps: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if m == 0 {
            return Err(Error::EmptyInput("sample count m must be positive"));
        }
        check_open("rho", rho, 0.0, 1.0)?;
        check_open("eps", eps, 0.0, 1.0)?;
        Ok(SpanParams {
            d,
            m,
            rho,
            eps,
            threshold_override: None,
        })
    }

    pub fn with_thresholds(mut self, t_min: f64, t_max: f64) -> Self {
        self.threshold_override = Some(Thresholds::new(t_min, t_max));
        self
    }

    /// The override if present, else the defaults; validated either way.
    pub fn thresholds(&self) -> Result<Thresholds> {
        match self.threshold_override {
            Some(t) => {
                t.validate(self.d, self.m)?;
                Ok(t)
            }
            None => derive_thresholds(self.d, self.m, self.rho),
        }
    }

    /// Whether the deterministic bound `d^2 T_max / m` is within `eps`.
    pub fn coverage_guaranteed(&self) -> Result<bool> {
        let t = self.thresholds()?;
        Ok(t.uncovered_bound(self.d) / self.m as f64 <= self.eps)
    }
}

/// Subspaces whose multiplicity reaches the drawn threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeavySet {
    pub chosen_t: f64,
    /// In order of first occurrence in the partition, which is decreasing
    /// by inclusion.
    pub subspaces: Vec<(Subspace, usize)>,
}

impl HeavySet {
    /// Whether every pair of members is comparable by inclusion.
    pub fn is_chain(&self) -> bool {
        let s = &self.subspaces;
        s.iter().enumerate().all(|(i, (a, _))| {
            s[i + 1..].iter().all(|(b, _)| {
                b.is_subspace_of(a).unwrap_or(false) || a.is_subspace_of(b).unwrap_or(false)
            })
        })
    }

    /// The unique maximum-dimension member, if any.
    pub fn largest(&self) -> Option<&Subspace> {
        let best = self.subspaces.iter().map(|(s, _)| s).max_by_key(|s| s.dim())?;
        debug_assert_eq!(
            self.subspaces.iter().filter(|(s, _)| s.dim() == best.dim()).count(),
            1,
            "heavy subspaces must form a chain"
        );
        Some(best)
    }
}

/// Everything one run computed, for inspection and benches.
#[derive(Clone, Debug)]
pub struct SpanOutcome {
    pub subspace: Subspace,
    pub thresholds: Thresholds,
    pub heavy: HeavySet,
    pub multiplicities: MultiplicityMap,
    pub zero_vectors: usize,
    pub uncovered: usize,
}

pub fn rep_linear_span(
    vectors: &[BitVec],
    params: &SpanParams,
    rnd: &RandomnessHandle,
) -> Result<Subspace> {
    rep_linear_span_detailed(vectors, params, rnd).map(|o| o.subspace)
}

pub fn rep_linear_span_detailed(
    vectors: &[BitVec],
    params: &SpanParams,
    rnd: &RandomnessHandle,
) -> Result<SpanOutcome> {
    let thresholds = params.thresholds()?;
    if vectors.is_empty() {
        return Err(Error::EmptyInput("rep_linear_span needs at least one vector"));
    }
    if vectors.len() != params.m {
        return Err(Error::SampleCountMismatch {
            expected: params.m,
            found: vectors.len(),
        });
    }
    for v in vectors {
        check_dim(params.d, v.dim())?;
    }

    // zero lies in every subspace and the partition rejects it
    let nonzero: Vec<BitVec> = vectors.iter().filter(|v| !v.is_zero()).cloned().collect();
    let zero_vectors = vectors.len() - nonzero.len();

    let partition = stable_partition(params.d, &nonzero)?;
    let mults = multiplicities(&partition);

    let t = rnd
        .substream(THRESHOLD_STREAM)
        .uniform(thresholds.t_min, thresholds.t_max);
    let heavy = HeavySet {
        chosen_t: t,
        subspaces: mults
            .iter()
            .filter(|(_, n)| *n as f64 >= t)
            .map(|(s, n)| (s.clone(), n))
            .collect(),
    };
    // Only reachable when many inputs are zero; {0} covers all of those.
    let subspace = heavy
        .largest()
        .cloned()
        .unwrap_or_else(|| Subspace::zero(params.d));
    let uncovered = uncovered_count(vectors, &subspace)?;

    Ok(SpanOutcome {
        subspace,
        thresholds,
        heavy,
        multiplicities: mults,
        zero_vectors,
        uncovered,
    })
}

/// Input positions whose vector lies outside `v`, counted with multiplicity.
pub fn uncovered_count(vectors: &[BitVec], v: &Subspace) -> Result<usize> {
    let mut n = 0;
    for x in vectors {
        if !v.contains(x)? {
            n += 1;
        }
    }
    Ok(n)
}

pub fn uncovered_fraction(vectors: &[BitVec], v: &Subspace) -> Result<f64> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("uncovered fraction of an empty sample"));
    }
    Ok(uncovered_count(vectors, v)? as f64 / vectors.len() as f64)
}
