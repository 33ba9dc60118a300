//! Agreement estimators and confidence intervals.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RandomnessHandle;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // keep the point estimate inside despite rounding
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// The handles one paired trial uses. Both runs share `algorithm`; their
/// datasets come from the independent `sample_a` and `sample_b`.
#[derive(Clone, Debug)]
pub struct TrialHandles {
    pub index: usize,
    pub trial: RandomnessHandle,
    pub distribution: RandomnessHandle,
    pub sample_a: RandomnessHandle,
    pub sample_b: RandomnessHandle,
    pub algorithm: RandomnessHandle,
}

impl TrialHandles {
    pub fn new(root: &RandomnessHandle, index: usize) -> Self {
        let trial = root.child_index("trial", index as u64);
        TrialHandles {
            index,
            distribution: trial.child("distribution"),
            sample_a: trial.child("sample-a"),
            sample_b: trial.child("sample-b"),
            algorithm: trial.child("algorithm"),
            trial,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialTranscript {
    pub index: usize,
    /// Substream path of the trial, for replay.
    pub path: String,
    pub output_a: String,
    pub output_b: String,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementReport {
    pub trials: usize,
    pub agreements: usize,
    pub rate: f64,
    pub wilson_interval: (f64, f64),
    pub transcripts: Vec<TrialTranscript>,
}

impl AgreementReport {
    pub fn from_transcripts(transcripts: Vec<TrialTranscript>) -> Self {
        let trials = transcripts.len();
        let agreements = transcripts.iter().filter(|t| t.agree).count();
        AgreementReport {
            trials,
            agreements,
            rate: if trials == 0 { 0.0 } else { agreements as f64 / trials as f64 },
            wilson_interval: wilson_interval(agreements, trials, Z_95),
            transcripts,
        }
    }

    pub fn lower(&self) -> f64 {
        self.wilson_interval.0
    }

    pub fn upper(&self) -> f64 {
        self.wilson_interval.1
    }
}

/// Runs `trials` paired trials in parallel and folds them in index order.
/// `run` returns the two outputs of one trial.
pub fn estimate_agreement<O, F>(root: &RandomnessHandle, trials: usize, run: F) -> Result<AgreementReport>
where
    O: PartialEq + ToString + Send,
    F: Fn(&TrialHandles) -> Result<(O, O)> + Sync,
{
    let transcripts: Vec<TrialTranscript> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let h = TrialHandles::new(root, i);
            let (a, b) = run(&h)?;
            Ok(TrialTranscript {
                index: i,
                path: h.trial.path(),
                agree: a == b,
                output_a: a.to_string(),
                output_b: b.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(AgreementReport::from_transcripts(transcripts))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedMass {
    pub seed_index: usize,
    pub path: String,
    pub modal_output: String,
    pub modal_mass: f64,
}

/// Per-seed concentration of the output distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoParamReport {
    pub trials_per_seed: usize,
    pub eta: f64,
    pub seeds: Vec<SeedMass>,
    /// Fraction of seeds whose modal mass is at least `1 - eta`.
    pub good_fraction: f64,
}

impl TwoParamReport {
    /// `nu` estimate: fraction of seeds that are not `eta`-good.
    pub fn bad_fraction(&self) -> f64 {
        1.0 - self.good_fraction
    }
}

/// For each of `seeds` fixed handles `seed-j`, runs the algorithm on
/// `trials_per_seed` fresh datasets and records the modal output's mass.
/// `run(seed_handle, data_handle)` performs one run.
pub fn estimate_two_param<O, F>(
    root: &RandomnessHandle,
    seeds: usize,
    trials_per_seed: usize,
    eta: f64,
    run: F,
) -> Result<TwoParamReport>
where
    O: Eq + Hash + Ord + ToString + Send,
    F: Fn(&RandomnessHandle, &RandomnessHandle) -> Result<O> + Sync,
{
    if trials_per_seed == 0 {
        return Err(Error::EmptyInput("trials per seed must be positive"));
    }
    let masses: Vec<SeedMass> = (0..seeds)
        .into_par_iter()
        .map(|j| {
            let seed = root.child_index("seed", j as u64);
            let algorithm = seed.child("algorithm");
            let mut counts: HashMap<O, usize> = HashMap::new();
            for i in 0..trials_per_seed {
                let data = seed.child_index("data", i as u64);
                *counts.entry(run(&algorithm, &data)?).or_insert(0) += 1;
            }
            // ties go to the smallest output so the report is deterministic
            let (modal, n) = counts
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
                .expect("at least one trial");
            Ok(SeedMass {
                seed_index: j,
                path: seed.path(),
                modal_output: modal.to_string(),
                modal_mass: n as f64 / trials_per_seed as f64,
            })
        })
        .collect::<Result<_>>()?;
    let good = masses.iter().filter(|m| m.modal_mass >= 1.0 - eta).count();
    Ok(TwoParamReport {
        trials_per_seed,
        eta,
        good_fraction: if seeds == 0 { 0.0 } else { good as f64 / seeds as f64 },
        seeds: masses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        // p = 0.5, n = 100: center 0.5, half-width ~0.0962
        let (lo, hi) = wilson_interval(50, 100, Z_95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3, "{lo} {hi}");
        let (lo, hi) = wilson_interval(400, 400, Z_95);
        assert!((lo - 0.99049).abs() < 1e-4, "{lo}");
        assert_eq!(hi, 1.0);
        let (lo, _) = wilson_interval(0, 10, Z_95);
        assert_eq!(lo, 0.0);
        assert_eq!(wilson_interval(0, 0, Z_95), (0.0, 1.0));
    }

    #[test]
    fn interval_contains_rate() {
        for n in [1usize, 7, 50, 333] {
            for k in 0..=n {
                let (lo, hi) = wilson_interval(k, n, Z_95);
                let p = k as f64 / n as f64;
                assert!(lo <= p && p <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
            }
        }
    }

    #[test]
    fn constant_algorithm_always_agrees() {
        let r = estimate_agreement(&RandomnessHandle::from_u64(0), 50, |_| Ok((1u8, 1u8))).unwrap();
        assert_eq!(r.rate, 1.0);
        assert_eq!(r.trials, 50);
        assert_eq!(r.transcripts[3].path, "trial-3");
    }

    #[test]
    fn independent_samples_differ_and_shared_algorithm_handle_matches() {
        let r = estimate_agreement(&RandomnessHandle::from_u64(1), 20, |h| {
            Ok((h.sample_a.stream().next_u64(), h.sample_b.stream().next_u64()))
        })
        .unwrap();
        assert_eq!(r.agreements, 0);
        let r = estimate_agreement(&RandomnessHandle::from_u64(1), 20, |h| {
            let a = h.algorithm.clone();
            Ok((a.stream().next_u64(), h.algorithm.stream().next_u64()))
        })
        .unwrap();
        assert_eq!(r.agreements, 20);
    }

    #[test]
    fn two_param_constant_and_fresh() {
        let root = RandomnessHandle::from_u64(2);
        let r = estimate_two_param(&root, 5, 20, 0.1, |_, _| Ok(7u8)).unwrap();
        assert!(r.seeds.iter().all(|s| s.modal_mass == 1.0));
        assert_eq!(r.good_fraction, 1.0);
        let r = estimate_two_param(&root, 5, 20, 0.1, |_, d| Ok(d.stream().next_u64())).unwrap();
        assert!(r.seeds.iter().all(|s| s.modal_mass == 0.05));
        assert_eq!(r.good_fraction, 0.0);
    }
}
