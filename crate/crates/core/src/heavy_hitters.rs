//! Replicable heavy hitters over a finite sample.
//!
//! A cutoff `nu'` is drawn uniformly from `[nu - eps, nu + eps]` using shared
//! randomness, and every item whose empirical frequency reaches `nu'` is
//! returned in sorted order. Two samples whose frequencies sit on the same
//! side of `nu'` for every item produce identical lists.

use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{check_open, Error, Result};
use crate::rng::RandomnessHandle;

/// Substream label for the cutoff draw.
pub const CUTOFF_STREAM: &str = "hh-threshold";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HHParams {
    pub eps_hh: f64,
    pub nu_hh: f64,
    pub rho: f64,
}

impl HHParams {
    /// Requires `eps in (0, 1/2)`, `nu in (eps, 1 - eps)`, `rho in (0, 1)`.
    pub fn new(eps_hh: f64, nu_hh: f64, rho: f64) -> Result<Self> {
        check_open("eps_hh", eps_hh, 0.0, 0.5)?;
        check_open("nu_hh", nu_hh, eps_hh, 1.0 - eps_hh)?;
        check_open("rho", rho, 0.0, 1.0)?;
        Ok(HHParams { eps_hh, nu_hh, rho })
    }

    /// The setting used inside the replicability wrapper.
    pub fn wrapper_default(rho: f64) -> Result<Self> {
        Self::new(1.0 / 12.0, 2.0 / 3.0, rho)
    }

    /// `ceil(1 / (rho^2 eps^2 (nu - eps)^2))`.
    pub fn advisory_sample_size(&self) -> usize {
        let gap = self.nu_hh - self.eps_hh;
        (1.0 / (self.rho * self.rho * self.eps_hh * self.eps_hh * gap * gap)).ceil() as usize
    }

    pub fn cutoff_range(&self) -> (f64, f64) {
        (self.nu_hh - self.eps_hh, self.nu_hh + self.eps_hh)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HHReport<T> {
    pub cutoff: f64,
    /// Sorted ascending.
    pub items: Vec<T>,
    /// Empirical frequency of each returned item, aligned with `items`.
    pub frequencies: Vec<f64>,
}

pub fn r_heavy_hitters<T>(items: &[T], params: &HHParams, rnd: &RandomnessHandle) -> Result<Vec<T>>
where
    T: Ord + Hash + Clone,
{
    r_heavy_hitters_detailed(items, params, rnd).map(|r| r.items)
}

pub fn r_heavy_hitters_detailed<T>(
    items: &[T],
    params: &HHParams,
    rnd: &RandomnessHandle,
) -> Result<HHReport<T>>
where
    T: Ord + Hash + Clone,
{
    if items.is_empty() {
        return Err(Error::EmptyInput("heavy hitters need at least one item"));
    }
    let (lo, hi) = params.cutoff_range();
    let cutoff = rnd.substream(CUTOFF_STREAM).uniform(lo, hi);

    let mut counts: HashMap<&T, usize> = HashMap::new();
    for item in items {
        *counts.entry(item).or_insert(0) += 1;
    }
    let n = items.len() as f64;
    let mut heavy: Vec<(&T, f64)> = counts
        .into_iter()
        .map(|(item, c)| (item, c as f64 / n))
        .filter(|&(_, f)| f >= cutoff)
        .collect();
    heavy.sort_by(|a, b| a.0.cmp(b.0));
    Ok(HHReport {
        cutoff,
        items: heavy.iter().map(|(t, _)| (*t).clone()).collect(),
        frequencies: heavy.iter().map(|&(_, f)| f).collect(),
    })
}
