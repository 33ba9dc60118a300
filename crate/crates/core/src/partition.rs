//! Greedy partition of a vector sequence into linearly independent sets.
//!
//! Each sweep walks the remaining vectors in their original order and keeps
//! every vector that is independent of what the current set already holds.
//! The collected set is removed and the sweep repeats until nothing is left.
//!
//! Two properties make the resulting multiplicity histogram useful for
//! replicable selection:
//!
//! * the distinct spans form a chain `V_1 ⊇ V_2 ⊇ ... ⊇ V_l` with `l <= d`;
//! * inserting or deleting one vector changes every multiplicity `n_S(V)`
//!   by at most one, so replacing one changes it by at most two.
//!
//! The partition depends on input order and is never computed on a
//! reordered sequence.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::gf2::{BitVec, EchelonBasis, Subspace};

/// One block of the partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependentSet {
    /// Positions in the input sequence, increasing.
    pub indices: Vec<usize>,
    pub span: Subspace,
}

impl IndependentSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    ambient: usize,
    sets: Vec<IndependentSet>,
}

impl Partition {
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn sets(&self) -> &[IndependentSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Runs the greedy sweep. Every vector must be nonzero.
pub fn stable_partition(ambient: usize, vectors: &[BitVec]) -> Result<Partition> {
    for (index, v) in vectors.iter().enumerate() {
        check_dim(ambient, v.dim())?;
        if v.is_zero() {
            return Err(Error::ZeroVector { index });
        }
    }

    // Later copies of a value lie in the span of its first remaining copy's
    // sweep, so each sweep only visits one head per distinct value.
    let mut ids: HashMap<&BitVec, usize> = HashMap::new();
    let mut queues: Vec<VecDeque<usize>> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let id = *ids.entry(v).or_insert_with(|| {
            queues.push(VecDeque::new());
            queues.len() - 1
        });
        queues[id].push_back(i);
    }
    let mut live: Vec<usize> = (0..queues.len()).collect();
    let mut sets = Vec::new();
    while !live.is_empty() {
        live.sort_unstable_by_key(|&id| queues[id][0]);
        let mut basis = EchelonBasis::new(ambient);
        let mut indices = Vec::new();
        for &id in &live {
            if basis.is_full() {
                break;
            }
            let head = queues[id][0];
            if basis.insert(&vectors[head])? {
                indices.push(head);
                queues[id].pop_front();
            }
        }
        sets.push(IndependentSet {
            indices,
            span: basis.to_subspace(),
        });
        live.retain(|&id| !queues[id].is_empty());
    }
    Ok(Partition { ambient, sets })
}

/// `n_S(V)` for every span occurring in a partition, keyed by canonical
/// subspace and listed in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiplicityMap {
    entries: Vec<(Subspace, usize)>,
}

impl MultiplicityMap {
    pub fn get(&self, v: &Subspace) -> usize {
        self.entries
            .iter()
            .find(|(s, _)| s == v)
            .map_or(0, |(_, n)| *n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Subspace, usize)> {
        self.entries.iter().map(|(s, n)| (s, *n))
    }

    /// Number of distinct spans.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all counts; equals the number of sets.
    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, n)| n).sum()
    }

    /// `max_V |n(V) - n'(V)|` over the union of keys.
    pub fn linf_distance(&self, other: &MultiplicityMap) -> usize {
        let one_way = |a: &MultiplicityMap, b: &MultiplicityMap| {
            a.entries
                .iter()
                .map(|(s, n)| n.abs_diff(b.get(s)))
                .max()
                .unwrap_or(0)
        };
        one_way(self, other).max(one_way(other, self))
    }
}

pub fn multiplicities(p: &Partition) -> MultiplicityMap {
    let mut entries: Vec<(Subspace, usize)> = Vec::new();
    for set in &p.sets {
        match entries.iter_mut().find(|(s, _)| *s == set.span) {
            Some((_, n)) => *n += 1,
            None => entries.push((set.span.clone(), 1)),
        }
    }
    MultiplicityMap { entries }
}
