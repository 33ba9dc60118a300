//! Shared internal randomness.
//!
//! A [`RandomnessHandle`] names a substream: a 256-bit master seed plus a
//! path of labeled segments such as `trial-7/round-2/base`. Every consumer
//! of randomness derives its own substream from a handle, so two executions
//! that share a handle see exactly the same coin tosses regardless of how
//! much randomness other components consumed.
//!
//! Substream keys are SHA-256 digests of a length-prefixed encoding of the
//! seed and the path, and each key drives a ChaCha20 generator. Both are
//! fully specified algorithms, so streams are identical on every platform.
//! Every draw procedure consumes a fixed number of 64-bit words.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const DOMAIN: &[u8] = b"repar/substream/v1";

/// 256-bit master seed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed([u8; 32]);

impl Seed {
    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        Seed(bytes)
    }

    /// Embeds a `u64` little-endian in the first eight bytes.
    pub fn from_u64(value: u64) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&value.to_le_bytes());
        Seed(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl FromStr for Seed {
    type Err = Error;

    /// Accepts a decimal `u64` or exactly 64 hex digits.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Seed::from_u64(v));
        }
        let hex = s.strip_prefix("0x").unwrap_or(s);
        if hex.len() != 64 || !hex.is_ascii() {
            return Err(Error::Seed(s.to_string()));
        }
        let mut bytes = [0u8; 32];
        for (i, byte) in bytes.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
                .map_err(|_| Error::Seed(s.to_string()))?;
        }
        Ok(Seed(bytes))
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({self})")
    }
}

impl Serialize for Seed {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(v) => Ok(Seed::from_u64(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Segment {
    label: String,
    index: Option<u64>,
}

impl Segment {
    fn encode(&self, out: &mut Vec<u8>) {
        let tag = if self.index.is_some() { 2u8 } else { 1u8 };
        out.push(tag);
        out.extend_from_slice(&(self.label.len() as u64).to_be_bytes());
        out.extend_from_slice(self.label.as_bytes());
        if let Some(i) = self.index {
            out.extend_from_slice(&i.to_be_bytes());
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}-{}", self.label, i),
            None => f.write_str(&self.label),
        }
    }
}

/// A named, seed-derived source of randomness.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RandomnessHandle {
    seed: Seed,
    path: Vec<Segment>,
}

impl RandomnessHandle {
    pub fn new(seed: Seed) -> Self {
        RandomnessHandle {
            seed,
            path: Vec::new(),
        }
    }

    pub fn from_u64(seed: u64) -> Self {
        Self::new(Seed::from_u64(seed))
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn child(&self, label: &str) -> Self {
        self.extend(Segment {
            label: label.to_string(),
            index: None,
        })
    }

    pub fn child_index(&self, label: &str, index: u64) -> Self {
        self.extend(Segment {
            label: label.to_string(),
            index: Some(index),
        })
    }

    fn extend(&self, segment: Segment) -> Self {
        let mut path = self.path.clone();
        path.push(segment);
        RandomnessHandle {
            seed: self.seed,
            path,
        }
    }

    /// Opens the generator for this exact path.
    pub fn stream(&self) -> RandomStream {
        let mut encoded = Vec::with_capacity(DOMAIN.len() + 32 + 16 * self.path.len());
        encoded.extend_from_slice(DOMAIN);
        encoded.extend_from_slice(&self.seed.0);
        encoded.extend_from_slice(&(self.path.len() as u64).to_be_bytes());
        for seg in &self.path {
            seg.encode(&mut encoded);
        }
        let key: [u8; 32] = Sha256::digest(&encoded).into();
        RandomStream {
            rng: ChaCha20Rng::from_seed(key),
        }
    }

    /// Shorthand for `self.child(label).stream()`.
    pub fn substream(&self, label: &str) -> RandomStream {
        self.child(label).stream()
    }

    /// Slash-separated path, e.g. `trial-3/algorithm`. Empty at the root.
    pub fn path(&self) -> String {
        self.path
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("/")
    }
}

impl fmt::Debug for RandomnessHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RandomnessHandle({}:/{})", self.seed, self.path())
    }
}

/// Deterministic generator for one substream.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha20Rng,
}

impl RandomStream {
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision. One word.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform real in `[lo, hi]`. One word.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_f64();
        (lo + (hi - lo) * u).clamp(lo, hi)
    }

    /// Integer in `[0, n)` via a widening multiply. One word; the bias is
    /// below `n / 2^64`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Index into a slice of length `n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// Fair coin from the top bit of one word.
    pub fn fair_bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// `true` with probability `p`. One word.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}
