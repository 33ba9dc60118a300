//! Deterministic inputs shared by the criterion benches.

use repar_core::harness::{generate, DistributionSpec, ParitySpec};
use repar_core::{BitVec, LabeledSample, RandomnessHandle};

/// `m` vectors drawn uniformly from GF(2)^d, zero included.
pub fn uniform_vectors(d: usize, m: usize, seed: u64) -> Vec<BitVec> {
    let mut s = RandomnessHandle::from_u64(seed).stream();
    (0..m).map(|_| BitVec::random(d, &mut s)).collect()
}

/// `m` vectors from a random `k`-dimensional subspace of GF(2)^d.
pub fn planted_vectors(d: usize, k: usize, m: usize, seed: u64) -> Vec<BitVec> {
    labeled(DistributionSpec::planted(d, k, 0.0), m, seed)
        .into_iter()
        .map(|s| s.x)
        .collect()
}

/// `m` uniform points labeled by a random hidden parity.
pub fn parity_samples(d: usize, m: usize, seed: u64) -> Vec<LabeledSample> {
    labeled(DistributionSpec::uniform(d), m, seed)
}

fn labeled(spec: DistributionSpec, m: usize, seed: u64) -> Vec<LabeledSample> {
    let spec = spec.with_parity(ParitySpec::Random);
    generate(&spec, m, &RandomnessHandle::from_u64(seed)).expect("valid bench distribution")
}

/// Linear systems `<w, x_i> = y_i` with a planted solution.
pub fn consistent_system(d: usize, n: usize, seed: u64) -> Vec<(BitVec, bool)> {
    parity_samples(d, n, seed).into_iter().map(|s| (s.x, s.y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_reproducible() {
        assert_eq!(uniform_vectors(40, 10, 3), uniform_vectors(40, 10, 3));
        assert_eq!(planted_vectors(16, 4, 50, 1), planted_vectors(16, 4, 50, 1));
        let r = repar_core::rank(16, &planted_vectors(16, 4, 200, 1)).unwrap();
        assert!(r <= 4);
    }
}
