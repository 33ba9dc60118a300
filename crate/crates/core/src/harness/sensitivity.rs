//! Empirical ℓ∞-sensitivity of the partition's multiplicity histogram.
//!
//! A case is a sequence `S` and one neighbour `S'`; its deviation is
//! `max_V |n_S(V) - n_S'(V)|`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::partition::{multiplicities, stable_partition, MultiplicityMap};
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborMode {
    /// Overwrite one position with a pool vector.
    Replace,
    /// Delete one position, or insert one pool vector anywhere.
    InsertDelete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub original: Vec<BitVec>,
    pub neighbor: Vec<BitVec>,
    pub deviation: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SensitivityReport {
    pub mode: NeighborMode,
    pub cases: usize,
    pub max_deviation: usize,
    /// Deviation value to number of cases.
    pub histogram: BTreeMap<usize, usize>,
    /// First case reaching `max_deviation`.
    pub witness: Option<Witness>,
}

impl SensitivityReport {
    fn new(mode: NeighborMode) -> Self {
        SensitivityReport {
            mode,
            cases: 0,
            max_deviation: 0,
            histogram: BTreeMap::new(),
            witness: None,
        }
    }

    fn record(&mut self, original: &[BitVec], neighbor: Vec<BitVec>, deviation: usize) {
        self.cases += 1;
        *self.histogram.entry(deviation).or_insert(0) += 1;
        if deviation > self.max_deviation || self.witness.is_none() {
            self.max_deviation = self.max_deviation.max(deviation);
            self.witness = Some(Witness {
                original: original.to_vec(),
                neighbor,
                deviation,
            });
        }
    }

    /// Number of cases whose deviation exceeds `bound`.
    pub fn violations(&self, bound: usize) -> usize {
        self.histogram.range(bound + 1..).map(|(_, n)| n).sum()
    }
}

fn histogram_of(d: usize, s: &[BitVec]) -> Result<MultiplicityMap> {
    Ok(multiplicities(&stable_partition(d, s)?))
}

/// Every neighbour of `s` under `mode` with entries drawn from `pool`.
fn check_all_neighbors(
    d: usize,
    s: &[BitVec],
    pool: &[BitVec],
    mode: NeighborMode,
    report: &mut SensitivityReport,
) -> Result<()> {
    let base = histogram_of(d, s)?;
    let eval = |neighbor: Vec<BitVec>, report: &mut SensitivityReport| -> Result<()> {
        let dev = base.linf_distance(&histogram_of(d, &neighbor)?);
        report.record(s, neighbor, dev);
        Ok(())
    };
    match mode {
        NeighborMode::Replace => {
            for i in 0..s.len() {
                for v in pool {
                    let mut n = s.to_vec();
                    n[i] = v.clone();
                    eval(n, report)?;
                }
            }
        }
        NeighborMode::InsertDelete => {
            for i in 0..s.len() {
                let mut n = s.to_vec();
                n.remove(i);
                eval(n, report)?;
            }
            for i in 0..=s.len() {
                for v in pool {
                    let mut n = s.to_vec();
                    n.insert(i, v.clone());
                    eval(n, report)?;
                }
            }
        }
    }
    Ok(())
}

fn check_pool(d: usize, pool: &[BitVec]) -> Result<()> {
    if pool.is_empty() {
        return Err(Error::EmptyInput("sensitivity pool is empty"));
    }
    for (index, v) in pool.iter().enumerate() {
        crate::error::check_dim(d, v.dim())?;
        if v.is_zero() {
            return Err(Error::ZeroVector { index });
        }
    }
    Ok(())
}

/// Draws `trials` random sequences of length `m` from `pool` and checks
/// every neighbour of each.
pub fn sensitivity_oracle(
    d: usize,
    m: usize,
    pool: &[BitVec],
    trials: usize,
    mode: NeighborMode,
    stream: &mut RandomStream,
) -> Result<SensitivityReport> {
    check_pool(d, pool)?;
    let mut report = SensitivityReport::new(mode);
    for _ in 0..trials {
        let s: Vec<BitVec> = (0..m).map(|_| pool[stream.index(pool.len())].clone()).collect();
        check_all_neighbors(d, &s, pool, mode, &mut report)?;
    }
    Ok(report)
}

/// Checks `cases` random (sequence, position, replacement) triples.
pub fn sensitivity_sampled(
    d: usize,
    m: usize,
    pool: &[BitVec],
    cases: usize,
    stream: &mut RandomStream,
) -> Result<SensitivityReport> {
    check_pool(d, pool)?;
    if m == 0 {
        return Err(Error::EmptyInput("sequence length must be positive"));
    }
    let mut report = SensitivityReport::new(NeighborMode::Replace);
    for _ in 0..cases {
        let s: Vec<BitVec> = (0..m).map(|_| pool[stream.index(pool.len())].clone()).collect();
        let i = stream.index(m);
        let mut n = s.clone();
        n[i] = pool[stream.index(pool.len())].clone();
        let dev = histogram_of(d, &s)?.linf_distance(&histogram_of(d, &n)?);
        report.record(&s, n, dev);
    }
    Ok(report)
}

/// Every sequence in `pool^m` and every neighbour of each.
pub fn sensitivity_exhaustive(
    d: usize,
    m: usize,
    pool: &[BitVec],
    mode: NeighborMode,
) -> Result<SensitivityReport> {
    check_pool(d, pool)?;
    let mut report = SensitivityReport::new(mode);
    let mut digits = vec![0usize; m];
    loop {
        let s: Vec<BitVec> = digits.iter().map(|&i| pool[i].clone()).collect();
        check_all_neighbors(d, &s, pool, mode, &mut report)?;
        // odometer over pool indices
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(report);
            }
            digits[pos] += 1;
            if digits[pos] < pool.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// All nonzero vectors of GF(2)^d in increasing integer order.
pub fn nonzero_vectors(d: usize) -> Vec<BitVec> {
    assert!(d < 64, "enumeration limited to d < 64");
    (1..1u64 << d)
        .map(|v| BitVec::from_u64(d, v).expect("fits"))
        .collect()
}
