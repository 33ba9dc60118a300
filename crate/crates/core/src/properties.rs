//! Randomized invariants checked against independent u64-mask oracles.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use crate::gf2::{rank, rref, solve_affine, AffineSolution, BitVec, Subspace};
use crate::heavy_hitters::{r_heavy_hitters_detailed, HHParams};
use crate::parity::{learn_parity_detailed, LabeledSample, LearnOutcome, LearnerParams};
use crate::partition::{multiplicities, stable_partition};
use crate::rng::RandomnessHandle;
use crate::span::{rep_linear_span_detailed, SpanParams};

fn mask(v: &BitVec) -> u64 {
    v.ones().fold(0, |a, i| a | 1 << i)
}

fn vecs(d: usize, xs: &[u64]) -> Vec<BitVec> {
    xs.iter().map(|&x| BitVec::from_u64(d, x).unwrap()).collect()
}

fn rank_oracle(rows: &[u64]) -> usize {
    // xor basis indexed by leading bit
    let mut lead = [0u64; 64];
    let mut r = 0;
    for &x in rows {
        let mut v = x;
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if lead[top] == 0 {
                lead[top] = v;
                r += 1;
                break;
            }
            v ^= lead[top];
        }
    }
    r
}

fn subspace_masks(s: &Subspace) -> Vec<u64> {
    s.basis().iter().map(mask).collect()
}

/// Sweeps over all remaining positions, straight from the definition.
fn greedy_oracle(xs: &[u64]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..xs.len()).collect();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let mut chosen: Vec<usize> = Vec::new();
        let mut rest = Vec::new();
        for &i in &remaining {
            let mut with: Vec<u64> = chosen.iter().map(|&j| xs[j]).collect();
            let before = rank_oracle(&with);
            with.push(xs[i]);
            if rank_oracle(&with) > before {
                chosen.push(i);
            } else {
                rest.push(i);
            }
        }
        out.push(chosen);
        remaining = rest;
    }
    out
}

/// Histogram keyed by the sorted set of all elements of each span.
fn histogram_oracle(xs: &[u64]) -> BTreeMap<Vec<u64>, usize> {
    let mut h = BTreeMap::new();
    for set in greedy_oracle(xs) {
        let gens: Vec<u64> = set.iter().map(|&i| xs[i]).collect();
        let mut elems: BTreeSet<u64> = BTreeSet::from([0]);
        for g in gens {
            let shifted: Vec<u64> = elems.iter().map(|e| e ^ g).collect();
            elems.extend(shifted);
        }
        *h.entry(elems.into_iter().collect()).or_insert(0) += 1;
    }
    h
}

fn linf(a: &BTreeMap<Vec<u64>, usize>, b: &BTreeMap<Vec<u64>, usize>) -> usize {
    a.keys()
        .chain(b.keys())
        .map(|k| a.get(k).copied().unwrap_or(0).abs_diff(b.get(k).copied().unwrap_or(0)))
        .max()
        .unwrap_or(0)
}

/// Dimension and a list of vectors in GF(2)^d; nonzero when `nonzero`.
fn system(max_d: usize, max_len: usize, nonzero: bool) -> impl Strategy<Value = (usize, Vec<u64>)> {
    (1..=max_d).prop_flat_map(move |d| {
        let lo = u64::from(nonzero);
        (Just(d), prop::collection::vec(lo..1u64 << d, 0..=max_len))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rref_is_idempotent_and_rank_matches((d, xs) in system(8, 12, false)) {
        let s = rref(d, &vecs(d, &xs)).unwrap();
        prop_assert_eq!(rref(d, s.basis()).unwrap(), s.clone());
        prop_assert_eq!(s.dim(), rank_oracle(&xs));
        prop_assert_eq!(rank(d, &vecs(d, &xs)).unwrap(), rank_oracle(&xs));
    }

    #[test]
    fn membership_agrees_with_rank((d, xs) in system(8, 8, false), probe in any::<u64>()) {
        let probe = probe & ((1u64 << d) - 1);
        let s = Subspace::span(d, &vecs(d, &xs)).unwrap();
        let mut with = xs.clone();
        with.push(probe);
        let inside = rank_oracle(&with) == rank_oracle(&xs);
        prop_assert_eq!(s.contains(&BitVec::from_u64(d, probe).unwrap()).unwrap(), inside);
    }

    #[test]
    fn affine_solutions_match_brute_force(
        (d, xs) in system(6, 8, false),
        labels in prop::collection::vec(any::<bool>(), 8),
        seed in any::<u64>(),
    ) {
        let eqs: Vec<(BitVec, bool)> = vecs(d, &xs).into_iter().zip(labels).collect();
        let brute: BTreeSet<u64> = (0..1u64 << d)
            .filter(|w| eqs.iter().all(|(x, y)| ((w & mask(x)).count_ones() % 2 == 1) == *y))
            .collect();
        match solve_affine(d, &eqs).unwrap() {
            AffineSolution::Infeasible => prop_assert!(brute.is_empty()),
            AffineSolution::Feasible(set) => {
                let got: BTreeSet<u64> = set.elements().map(|w| mask(&w)).collect();
                prop_assert_eq!(&got, &brute);
                let mut s = RandomnessHandle::from_u64(seed).stream();
                prop_assert!(brute.contains(&mask(&set.sample_uniform(&mut s))));
            }
        }
    }

    #[test]
    fn partition_matches_greedy_oracle((d, xs) in system(6, 40, true)) {
        let p = stable_partition(d, &vecs(d, &xs)).unwrap();
        let got: Vec<Vec<usize>> = p.sets().iter().map(|s| s.indices.clone()).collect();
        prop_assert_eq!(got, greedy_oracle(&xs));
        let every: BTreeSet<usize> = p.sets().iter().flat_map(|s| s.indices.clone()).collect();
        prop_assert_eq!(every.len(), xs.len());
    }

    #[test]
    fn distinct_spans_form_a_chain((d, xs) in system(6, 60, true)) {
        let m = multiplicities(&stable_partition(d, &vecs(d, &xs)).unwrap());
        let spans: Vec<Vec<u64>> = m.iter().map(|(s, _)| subspace_masks(s)).collect();
        prop_assert!(spans.len() <= d);
        prop_assert_eq!(m.total(), greedy_oracle(&xs).len());
        for i in 0..spans.len() {
            for j in i + 1..spans.len() {
                // listed from largest to smallest
                let union: Vec<u64> = spans[i].iter().chain(&spans[j]).copied().collect();
                prop_assert_eq!(rank_oracle(&union), rank_oracle(&spans[i]));
                prop_assert!(rank_oracle(&spans[i]) > rank_oracle(&spans[j]));
            }
        }
    }

    #[test]
    fn replacement_moves_histogram_by_at_most_two(
        (d, xs) in system(4, 12, true),
        pos in any::<prop::sample::Index>(),
        new in any::<u64>(),
    ) {
        prop_assume!(!xs.is_empty());
        let new = 1 + new % ((1u64 << d) - 1);
        let mut ys = xs.clone();
        ys[pos.index(xs.len())] = new;
        let got = multiplicities(&stable_partition(d, &vecs(d, &xs)).unwrap())
            .linf_distance(&multiplicities(&stable_partition(d, &vecs(d, &ys)).unwrap()));
        let expect = linf(&histogram_oracle(&xs), &histogram_oracle(&ys));
        prop_assert_eq!(got, expect);
        prop_assert!(got <= 2);
    }

    #[test]
    fn insertion_and_deletion_move_histogram_by_at_most_one(
        (d, xs) in system(4, 12, true),
        pos in any::<prop::sample::Index>(),
        new in any::<u64>(),
    ) {
        let new = 1 + new % ((1u64 << d) - 1);
        let mut inserted = xs.clone();
        inserted.insert(pos.index(xs.len() + 1), new);
        prop_assert!(linf(&histogram_oracle(&xs), &histogram_oracle(&inserted)) <= 1);
        let hist = |v: &[u64]| multiplicities(&stable_partition(d, &vecs(d, v)).unwrap());
        prop_assert!(hist(&xs).linf_distance(&hist(&inserted)) <= 1);
        if !xs.is_empty() {
            let mut deleted = xs.clone();
            deleted.remove(pos.index(xs.len()));
            prop_assert!(hist(&xs).linf_distance(&hist(&deleted)) <= 1);
        }
    }

    #[test]
    fn span_output_lies_in_input_span_and_covers(
        (d, xs) in system(5, 300, false),
        lo in 0.05f64..0.45,
        width in 0.1f64..1.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(!xs.is_empty());
        let m = xs.len();
        let unit = m as f64 / (d * d) as f64;
        let hi = lo * unit + (0.99 * unit - lo * unit) * width;
        let params = SpanParams::new(d, m, 0.1, 0.1).unwrap().with_thresholds(lo * unit, hi);
        let rnd = RandomnessHandle::from_u64(seed);
        let out = rep_linear_span_detailed(&vecs(d, &xs), &params, &rnd).unwrap();
        let mut both = xs.clone();
        both.extend(subspace_masks(&out.subspace));
        prop_assert_eq!(rank_oracle(&both), rank_oracle(&xs));
        let uncovered = xs.iter().filter(|&&x| {
            let mut with = subspace_masks(&out.subspace);
            let r = rank_oracle(&with);
            with.push(x);
            rank_oracle(&with) > r
        }).count();
        prop_assert_eq!(out.uncovered, uncovered);
        prop_assert!(uncovered as f64 <= (d * d) as f64 * hi);
        let again = rep_linear_span_detailed(&vecs(d, &xs), &params, &rnd).unwrap();
        prop_assert_eq!(again.subspace, out.subspace);
    }

    #[test]
    fn learned_parity_fits_covered_samples(
        (d, xs) in system(5, 200, false),
        hidden in any::<u64>(),
        seed in any::<u64>(),
    ) {
        prop_assume!(!xs.is_empty());
        let z = BitVec::from_u64(d, hidden & ((1u64 << d) - 1)).unwrap();
        let samples: Vec<LabeledSample> = vecs(d, &xs)
            .into_iter()
            .map(|x| { let y = z.dot(&x).unwrap(); LabeledSample::new(x, y) })
            .collect();
        let unit = xs.len() as f64 / (d * d) as f64;
        let params = LearnerParams::new(d, xs.len(), 0.1, 0.1, 0.1).unwrap().with_thresholds(0.2 * unit, 0.6 * unit);
        let r = learn_parity_detailed(&samples, &params, &RandomnessHandle::from_u64(seed)).unwrap();
        // realizable input is never infeasible
        let LearnOutcome::Parity(h) = r.outcome else { return Err(TestCaseError::fail("infeasible")) };
        for s in &samples {
            if r.span.contains(&s.x).unwrap() {
                prop_assert_eq!(h.predict(&s.x).unwrap(), s.y);
            }
        }
    }

    #[test]
    fn heavy_hitters_sorted_and_above_floor(
        items in prop::collection::vec(0u8..6, 1..400),
        seed in any::<u64>(),
    ) {
        let params = HHParams::new(1.0 / 12.0, 2.0 / 3.0, 0.1).unwrap();
        let r = r_heavy_hitters_detailed(&items, &params, &RandomnessHandle::from_u64(seed)).unwrap();
        prop_assert!(r.items.windows(2).all(|w| w[0] < w[1]));
        let (lo, hi) = params.cutoff_range();
        prop_assert!(lo <= r.cutoff && r.cutoff <= hi);
        for v in 0u8..6 {
            let f = items.iter().filter(|&&x| x == v).count() as f64 / items.len() as f64;
            prop_assert_eq!(r.items.contains(&v), f >= r.cutoff);
        }
    }

    #[test]
    fn substreams_are_deterministic_and_separated(seed in any::<u64>(), a in "[a-z]{1,6}", b in "[a-z]{1,6}") {
        let root = RandomnessHandle::from_u64(seed);
        let draw = |label: &str| root.child(label).stream().next_u64();
        prop_assert_eq!(draw(&a), draw(&a));
        if a != b {
            prop_assert_ne!(draw(&a), draw(&b));
        }
    }
}
