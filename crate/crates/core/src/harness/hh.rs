//! Heavy-hitter agreement on planted frequencies.
//!
//! Items `0..r` occur with the planted frequencies; every other draw is a
//! fresh 64-bit value with the top bit set, so it never collides with a
//! planted item and collides with another fresh one with probability about
//! `2^-63`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::stats::{estimate_agreement, AgreementReport};
use crate::heavy_hitters::{r_heavy_hitters_detailed, HHParams};
use crate::rng::{RandomStream, RandomnessHandle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyHitterSpec {
    pub frequencies: Vec<f64>,
    /// Items per run; the advisory size when absent.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "eps_default")]
    pub eps_hh: f64,
    #[serde(default = "nu_default")]
    pub nu_hh: f64,
    #[serde(default = "rho_default")]
    pub rho: f64,
    pub trials: usize,
}

fn eps_default() -> f64 {
    1.0 / 12.0
}

fn nu_default() -> f64 {
    2.0 / 3.0
}

fn rho_default() -> f64 {
    0.1
}

impl HeavyHitterSpec {
    pub fn params(&self) -> Result<HHParams> {
        HHParams::new(self.eps_hh, self.nu_hh, self.rho)
    }

    pub fn items_per_run(&self) -> Result<usize> {
        Ok(match self.k {
            Some(k) => k,
            None => self.params()?.advisory_sample_size(),
        })
    }

    fn validate(&self) -> Result<()> {
        let total: f64 = self.frequencies.iter().sum();
        if self.frequencies.iter().any(|f| !(f.is_finite() && *f >= 0.0)) || total > 1.0 + 1e-9 {
            return Err(Error::Distribution(format!(
                "planted frequencies must be non-negative with sum at most 1, got {:?}",
                self.frequencies
            )));
        }
        if self.items_per_run()? == 0 {
            return Err(Error::EmptyInput("heavy hitter runs need at least one item"));
        }
        self.params().map(|_| ())
    }

    fn draw(&self, s: &mut RandomStream) -> u64 {
        let u = s.next_f64();
        let mut acc = 0.0;
        for (i, f) in self.frequencies.iter().enumerate() {
            acc += f;
            if u < acc {
                return i as u64;
            }
        }
        s.next_u64() | 1 << 63
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeavyHitterReport {
    pub k: usize,
    pub agreement: AgreementReport,
    /// Runs that returned an item with frequency below `nu - eps`.
    pub soundness_violations: usize,
}

pub fn heavy_hitter_bench(spec: &HeavyHitterSpec, root: &RandomnessHandle) -> Result<HeavyHitterReport> {
    spec.validate()?;
    let params = spec.params()?;
    let k = spec.items_per_run()?;
    let floor = params.nu_hh - params.eps_hh;
    let violations = std::sync::atomic::AtomicUsize::new(0);
    let agreement = estimate_agreement(root, spec.trials, |h| {
        let run = |data: &RandomnessHandle| -> Result<String> {
            let mut s = data.stream();
            let items: Vec<u64> = (0..k).map(|_| spec.draw(&mut s)).collect();
            let r = r_heavy_hitters_detailed(&items, &params, &h.algorithm)?;
            if r.frequencies.iter().any(|&f| f < floor) {
                violations.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            }
            Ok(format!("{:?}", r.items))
        };
        Ok((run(&h.sample_a)?, run(&h.sample_b)?))
    })?;
    Ok(HeavyHitterReport {
        k,
        agreement,
        soundness_violations: violations.into_inner(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(freqs: &[f64], k: usize) -> HeavyHitterSpec {
        HeavyHitterSpec {
            frequencies: freqs.to_vec(),
            k: Some(k),
            eps_hh: 1.0 / 12.0,
            nu_hh: 2.0 / 3.0,
            rho: 0.1,
            trials: 50,
        }
    }

    #[test]
    fn margins_on_both_sides_agree() {
        for f in [0.5, 0.9] {
            let r = heavy_hitter_bench(&spec(&[f], 2000), &RandomnessHandle::from_u64(0)).unwrap();
            assert_eq!(r.agreement.rate, 1.0, "frequency {f}");
            assert_eq!(r.soundness_violations, 0);
            let expect = if f > 0.75 { "[0]" } else { "[]" };
            assert!(r.agreement.transcripts.iter().all(|t| t.output_a == expect));
        }
    }

    #[test]
    fn advisory_default() {
        let mut s = spec(&[0.9], 1);
        s.k = None;
        assert_eq!(s.items_per_run().unwrap(), 42_319);
    }

    #[test]
    fn invalid_frequencies() {
        assert!(heavy_hitter_bench(&spec(&[0.7, 0.7], 10), &RandomnessHandle::from_u64(0)).is_err());
    }
}
