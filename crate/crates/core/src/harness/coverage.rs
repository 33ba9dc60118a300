//! Uncovered mass of the recovered span against its deterministic bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gf2::BitVec;
use crate::harness::distribution::DistributionSpec;
use crate::harness::experiment::ThresholdRule;
use crate::rng::RandomnessHandle;
use crate::span::rep_linear_span_detailed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageSpec {
    pub distribution: DistributionSpec,
    pub ms: Vec<usize>,
    #[serde(default = "rho_default")]
    pub rho: f64,
    #[serde(default = "rho_default")]
    pub eps: f64,
    #[serde(default)]
    pub thresholds: ThresholdRule,
    pub trials: usize,
}

fn rho_default() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageRow {
    pub m: usize,
    pub t_max: f64,
    pub trials: usize,
    pub mean_uncovered_fraction: f64,
    pub max_uncovered_fraction: f64,
    /// `d^2 T_max / m`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// One row per `m`; trial `i` at size `m` uses `m-<m>/trial-<i>`.
pub fn coverage_bench(spec: &CoverageSpec, root: &RandomnessHandle) -> Result<CoverageReport> {
    let d = spec.distribution.d;
    let mut rows = Vec::with_capacity(spec.ms.len());
    for &m in &spec.ms {
        let params = spec.thresholds.span_params(d, m, spec.rho, spec.eps)?;
        let t = params.thresholds()?;
        let bound_count = t.uncovered_bound(d);
        let level = root.child_index("m", m as u64);
        let fractions = (0..spec.trials)
            .into_par_iter()
            .map(|i| {
                let trial = level.child_index("trial", i as u64);
                let dist = spec.distribution.resolve(&trial.child("distribution"))?;
                let xs: Vec<BitVec> = dist
                    .generate(m, &mut trial.substream("sample"))
                    .into_iter()
                    .map(|s| s.x)
                    .collect();
                let out = rep_linear_span_detailed(&xs, &params, &trial.child("algorithm"))?;
                Ok((out.uncovered as f64 <= bound_count, out.uncovered as f64 / m as f64))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = fractions.len().max(1) as f64;
        rows.push(CoverageRow {
            m,
            t_max: t.t_max,
            trials: spec.trials,
            mean_uncovered_fraction: fractions.iter().map(|f| f.1).sum::<f64>() / n,
            max_uncovered_fraction: fractions.iter().map(|f| f.1).fold(0.0, f64::max),
            bound: bound_count / m as f64,
            holds: fractions.iter().all(|f| f.0),
        });
    }
    Ok(CoverageReport { rows })
}
