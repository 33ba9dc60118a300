//! Exact linear algebra over GF(2).
//!
//! Vectors are bit-packed into 64-bit words; coordinate `i` lives in bit
//! `i % 64` of word `i / 64`. The textual form lists coordinates from index
//! 0 onwards, so `"110"` is `e1 + e2` in GF(2)^3.
//!
//! Subspaces are kept in reduced row echelon form with pivot columns
//! strictly increasing, which makes the basis a canonical key: two
//! [`Subspace`] values are equal exactly when they span the same set.

use std::cmp::Ordering;
use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{check_dim, Error, Result};
use crate::rng::RandomStream;

const WORD_BITS: usize = 64;

type Words = SmallVec<[u64; 2]>;

fn words_for(dim: usize) -> usize {
    dim.div_ceil(WORD_BITS)
}

/// A vector in GF(2)^d.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    dim: usize,
    // bits at positions >= dim are always zero
    words: Words,
}

impl BitVec {
    pub fn zeros(dim: usize) -> Self {
        BitVec {
            dim,
            words: smallvec![0; words_for(dim)],
        }
    }

    /// The standard basis vector with a one at coordinate `i`.
    pub fn unit(dim: usize, i: usize) -> Result<Self> {
        let mut v = Self::zeros(dim);
        v.set(i, true)?;
        Ok(v)
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        v
    }

    /// Coordinate `i` is bit `i` of `value`. Requires `dim <= 64` and no
    /// bits set at or above `dim`.
    pub fn from_u64(dim: usize, value: u64) -> Result<Self> {
        if dim > WORD_BITS {
            return Err(Error::IndexOutOfRange {
                index: dim,
                dim: WORD_BITS,
            });
        }
        if dim < WORD_BITS && value >> dim != 0 {
            return Err(Error::IndexOutOfRange {
                index: WORD_BITS - 1 - value.leading_zeros() as usize,
                dim,
            });
        }
        let mut v = Self::zeros(dim);
        if dim > 0 {
            v.words[0] = value;
        }
        Ok(v)
    }

    /// Uniform over GF(2)^dim; one word per 64 coordinates.
    pub fn random(dim: usize, stream: &mut RandomStream) -> Self {
        let mut v = Self::zeros(dim);
        for w in v.words.iter_mut() {
            *w = stream.next_u64();
        }
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.dim % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> Result<bool> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim,
            });
        }
        Ok(self.bit(i))
    }

    pub fn set(&mut self, i: usize, value: bool) -> Result<()> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim,
            });
        }
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn bit(&self, i: usize) -> bool {
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    fn flip_bit(&mut self, i: usize) {
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Lowest coordinate holding a one; the pivot column of a row.
    pub fn leading_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * WORD_BITS + w.trailing_zeros() as usize)
    }

    /// Coordinates holding a one, in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(k * WORD_BITS + tz)
            })
        })
    }

    pub fn xor(&self, other: &BitVec) -> Result<BitVec> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        out.xor_in_place(other);
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitVec) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        self.xor_in_place(other);
        Ok(())
    }

    #[inline]
    pub(crate) fn xor_in_place(&mut self, other: &BitVec) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitVec) -> Result<bool> {
        check_dim(self.dim, other.dim)?;
        Ok(self.dot_unchecked(other))
    }

    #[inline]
    pub(crate) fn dot_unchecked(&self, other: &BitVec) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    /// Appends one coordinate; used for augmented systems `[x | y]`.
    pub fn extended(&self, last: bool) -> BitVec {
        let mut out = BitVec::zeros(self.dim + 1);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        if last {
            out.flip_bit(self.dim);
        }
        out
    }

    /// Keeps the first `dim` coordinates.
    pub fn truncated(&self, dim: usize) -> BitVec {
        assert!(dim <= self.dim);
        let mut out = BitVec::zeros(dim);
        let n = out.words.len();
        out.words.copy_from_slice(&self.words[..n]);
        out.mask_tail();
        out
    }
}

impl BitXor for &BitVec {
    type Output = BitVec;

    /// Panics on mismatched dimensions; see [`BitVec::xor`] for the checked form.
    fn bitxor(self, rhs: &BitVec) -> BitVec {
        self.xor(rhs).expect("xor of vectors with different dimensions")
    }
}

/// Lexicographic order on the textual form, after dimension.
impl Ord for BitVec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim.cmp(&other.dim).then_with(|| {
            for (a, b) in self.words.iter().zip(&other.words) {
                let diff = a ^ b;
                if diff != 0 {
                    let low = diff.trailing_zeros();
                    return if (a >> low) & 1 == 1 {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    };
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut v = BitVec::zeros(s.len());
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => v.flip_bit(i),
                _ => return Err(Error::ParseBitVec(s.to_string())),
            }
        }
        Ok(v)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.dim)
            .map(|i| if self.bit(i) { '1' } else { '0' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl Serialize for BitVec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A linear subspace of GF(2)^d in canonical RREF.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<BitVec>,
}

impl Subspace {
    /// `{0}`.
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: (0..ambient)
                .map(|i| BitVec::unit(ambient, i).expect("in range"))
                .collect(),
        }
    }

    /// Canonical form of `span(rows)`.
    pub fn span(ambient: usize, rows: &[BitVec]) -> Result<Self> {
        rref(ambient, rows)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BitVec] {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.leading_one().expect("basis rows are nonzero"))
            .collect()
    }

    fn reduce(&self, v: &mut BitVec) {
        for row in &self.basis {
            let p = row.leading_one().expect("basis rows are nonzero");
            if v.bit(p) {
                v.xor_in_place(row);
            }
        }
    }

    pub fn contains(&self, v: &BitVec) -> Result<bool> {
        check_dim(self.ambient, v.dim())?;
        let mut r = v.clone();
        self.reduce(&mut r);
        Ok(r.is_zero())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        check_dim(other.ambient, self.ambient)?;
        for row in &self.basis {
            if !other.contains(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All `2^dim` members, in the order of the binary counter over basis
    /// coefficients. Intended for small subspaces.
    pub fn elements(&self) -> impl Iterator<Item = BitVec> + '_ {
        assert!(self.dim() < 32, "enumerating a subspace of dimension {}", self.dim());
        (0u64..1 << self.dim()).map(move |mask| {
            let mut v = BitVec::zeros(self.ambient);
            for (i, row) in self.basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v.xor_in_place(row);
                }
            }
            v
        })
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(d={}; ", self.ambient)?;
        f.debug_list().entries(self.basis.iter().map(|r| r.to_string())).finish()?;
        f.write_str(")")
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.basis.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", rows.join(", "))
    }
}

/// Incremental elimination state for a linearly independent set.
///
/// Every stored row has a one at its own pivot column and zeros at the
/// pivot columns of all other rows, so reducing a candidate costs one pass
/// over the rows in any order.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    ambient: usize,
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(ambient: usize) -> Self {
        EchelonBasis {
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ambient
    }

    #[inline]
    fn reduce_in_place(&self, v: &mut BitVec) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.bit(p) {
                v.xor_in_place(row);
            }
        }
    }

    /// Whether `v` lies outside the current span.
    pub fn is_independent(&self, v: &BitVec) -> Result<bool> {
        check_dim(self.ambient, v.dim())?;
        if self.is_full() {
            return Ok(false);
        }
        let mut r = v.clone();
        self.reduce_in_place(&mut r);
        Ok(!r.is_zero())
    }

    /// Adds `v` if it is independent of the current rows; returns whether
    /// it was added.
    pub fn insert(&mut self, v: &BitVec) -> Result<bool> {
        check_dim(self.ambient, v.dim())?;
        if self.is_full() {
            return Ok(false);
        }
        let mut r = v.clone();
        self.reduce_in_place(&mut r);
        let Some(p) = r.leading_one() else {
            return Ok(false);
        };
        for row in &mut self.rows {
            if row.bit(p) {
                row.xor_in_place(&r);
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        Ok(true)
    }

    /// Canonical RREF of the current span.
    pub fn to_subspace(&self) -> Subspace {
        let mut rows = self.rows.clone();
        let mut basis: Vec<BitVec> = Vec::with_capacity(rows.len());
        for col in 0..self.ambient {
            let Some(k) = rows.iter().position(|r| r.bit(col)) else {
                continue;
            };
            let pivot = rows.swap_remove(k);
            for r in rows.iter_mut() {
                if r.bit(col) {
                    r.xor_in_place(&pivot);
                }
            }
            for r in basis.iter_mut() {
                if r.bit(col) {
                    r.xor_in_place(&pivot);
                }
            }
            basis.push(pivot);
            if rows.is_empty() {
                break;
            }
        }
        Subspace {
            ambient: self.ambient,
            basis,
        }
    }
}

/// Reduced row echelon basis of `span(rows)`.
pub fn rref(ambient: usize, rows: &[BitVec]) -> Result<Subspace> {
    let mut eb = EchelonBasis::new(ambient);
    for r in rows {
        eb.insert(r)?;
    }
    Ok(eb.to_subspace())
}

pub fn rank(ambient: usize, rows: &[BitVec]) -> Result<usize> {
    let mut eb = EchelonBasis::new(ambient);
    for r in rows {
        eb.insert(r)?;
    }
    Ok(eb.rank())
}

/// Whether `candidate` is outside `span(current)`.
pub fn is_independent_with(ambient: usize, current: &[BitVec], candidate: &BitVec) -> Result<bool> {
    let mut eb = EchelonBasis::new(ambient);
    for r in current {
        eb.insert(r)?;
    }
    eb.is_independent(candidate)
}

/// `particular + span(null_basis)`: every solution of an affine system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolutionSet {
    particular: BitVec,
    null_basis: Subspace,
}

impl AffineSolutionSet {
    pub fn particular(&self) -> &BitVec {
        &self.particular
    }

    pub fn null_basis(&self) -> &Subspace {
        &self.null_basis
    }

    /// log2 of the number of solutions.
    pub fn log2_len(&self) -> usize {
        self.null_basis.dim()
    }

    pub fn contains(&self, w: &BitVec) -> Result<bool> {
        let diff = w.xor(&self.particular)?;
        self.null_basis.contains(&diff)
    }

    pub fn elements(&self) -> impl Iterator<Item = BitVec> + '_ {
        self.null_basis
            .elements()
            .map(move |k| &k ^ &self.particular)
    }

    /// Uniform member: one fair bit per kernel basis row, rows taken in
    /// canonical order.
    pub fn sample_uniform(&self, stream: &mut RandomStream) -> BitVec {
        let mut w = self.particular.clone();
        for row in self.null_basis.basis() {
            if stream.fair_bit() {
                w.xor_in_place(row);
            }
        }
        w
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffineSolution {
    Feasible(AffineSolutionSet),
    Infeasible,
}

impl AffineSolution {
    pub fn feasible(self) -> Option<AffineSolutionSet> {
        match self {
            AffineSolution::Feasible(s) => Some(s),
            AffineSolution::Infeasible => None,
        }
    }
}

/// Solves `<w, x_i> = y_i` for all equations over GF(2)^ambient.
pub fn solve_affine(ambient: usize, equations: &[(BitVec, bool)]) -> Result<AffineSolution> {
    let mut eb = EchelonBasis::new(ambient + 1);
    for (x, y) in equations {
        check_dim(ambient, x.dim())?;
        eb.insert(&x.extended(*y))?;
    }
    let system = eb.to_subspace();

    let mut particular = BitVec::zeros(ambient);
    let mut is_pivot = vec![false; ambient];
    let pivots = system.pivots();
    for (row, &p) in system.basis().iter().zip(&pivots) {
        if p == ambient {
            // 0 = 1
            return Ok(AffineSolution::Infeasible);
        }
        is_pivot[p] = true;
        if row.bit(ambient) {
            particular.flip_bit(p);
        }
    }

    let mut kernel = Vec::new();
    for free in (0..ambient).filter(|&c| !is_pivot[c]) {
        let mut n = BitVec::zeros(ambient);
        n.flip_bit(free);
        for (row, &p) in system.basis().iter().zip(&pivots) {
            if row.bit(free) {
                n.flip_bit(p);
            }
        }
        kernel.push(n);
    }

    Ok(AffineSolution::Feasible(AffineSolutionSet {
        particular,
        null_basis: rref(ambient, &kernel)?,
    }))
}

/// Convenience for `sample_uniform` on a solved system.
pub fn sample_uniform(sols: &AffineSolutionSet, stream: &mut RandomStream) -> BitVec {
    sols.sample_uniform(stream)
}
