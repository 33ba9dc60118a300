//! Config-driven benches and their reports.
//!
//! An [`ExperimentConfig`] names the master seed, the output path and one
//! bench with its parameters. [`run_bench`] is a pure function of the
//! config, so rendering its report twice gives identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::harness::coverage::{coverage_bench, CoverageReport, CoverageSpec};
use crate::harness::experiment::{
    accuracy_bench, estimate_replicability, estimate_two_param_replicability, AccuracyReport, Experiment,
};
use crate::harness::hh::{heavy_hitter_bench, HeavyHitterReport, HeavyHitterSpec};
use crate::harness::sensitivity::{
    nonzero_vectors, sensitivity_exhaustive, sensitivity_oracle, sensitivity_sampled, NeighborMode,
    SensitivityReport,
};
use crate::harness::stats::{wilson_interval, AgreementReport, TwoParamReport, Z_95};
use crate::rng::{RandomnessHandle, Seed};

fn tenth() -> f64 {
    0.1
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityMethod {
    /// Every sequence in `pool^m`.
    Exhaustive,
    /// Random sequences, every neighbour of each.
    #[default]
    AllNeighbors,
    /// Random (sequence, position, replacement) triples.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySpec {
    pub d: usize,
    pub m: usize,
    /// Sequences for `all-neighbors`, cases for `sampled`.
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub method: SensitivityMethod,
    #[serde(default = "replace")]
    pub mode: NeighborMode,
    /// Pool of nonzero vectors; all of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<Vec<BitVec>>,
    #[serde(default = "one")]
    pub claimed_bound: usize,
}

fn replace() -> NeighborMode {
    NeighborMode::Replace
}

/// One bench and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bench", rename_all = "kebab-case")]
pub enum BenchSpec {
    Replicability {
        trials: usize,
        /// Claimed disagreement probability.
        #[serde(default = "tenth")]
        rho_budget: f64,
        #[serde(flatten)]
        experiment: Experiment,
    },
    TwoParam {
        seeds: usize,
        trials_per_seed: usize,
        #[serde(default = "tenth")]
        eta: f64,
        #[serde(default = "tenth")]
        nu: f64,
        #[serde(flatten)]
        experiment: Experiment,
    },
    Accuracy {
        trials: usize,
        holdout: usize,
        #[serde(default = "tenth")]
        eps: f64,
        #[serde(default = "tenth")]
        delta: f64,
        #[serde(flatten)]
        experiment: Experiment,
    },
    Coverage(CoverageSpec),
    Sensitivity(SensitivitySpec),
    HeavyHitters(HeavyHitterSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: Seed,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub bench: BenchSpec,
}

impl ExperimentConfig {
    pub fn new(seed: Seed, bench: BenchSpec) -> Self {
        ExperimentConfig {
            seed,
            out: None,
            bench,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn bench_name(&self) -> &'static str {
        match self.bench {
            BenchSpec::Replicability { .. } => "replicability",
            BenchSpec::TwoParam { .. } => "two-param",
            BenchSpec::Accuracy { .. } => "accuracy",
            BenchSpec::Coverage(_) => "coverage",
            BenchSpec::Sensitivity(_) => "sensitivity",
            BenchSpec::HeavyHitters(_) => "heavy-hitters",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BenchResult {
    Replicability(AgreementReport),
    TwoParam(TwoParamReport),
    Accuracy(AccuracyReport),
    Coverage(CoverageReport),
    Sensitivity(SensitivityReport),
    HeavyHitters(HeavyHitterReport),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub bench: &'static str,
    pub seed: Seed,
    pub passed: bool,
    /// Why the bench passed or failed, in one line.
    pub verdict: String,
    pub config: ExperimentConfig,
    pub result: BenchResult,
}

/// Pass when the claimed lower bound is not above the Wilson interval.
fn claim_holds(successes: usize, trials: usize, claimed: f64) -> (bool, (f64, f64)) {
    let ci = wilson_interval(successes, trials, Z_95);
    (ci.1 >= claimed, ci)
}

pub fn run_bench(config: &ExperimentConfig) -> Result<BenchReport> {
    let root = RandomnessHandle::new(config.seed);
    let (passed, verdict, result) = match &config.bench {
        BenchSpec::Replicability {
            trials,
            rho_budget,
            experiment,
        } => {
            let r = estimate_replicability(experiment, *trials, &root)?;
            let claimed = 1.0 - rho_budget;
            let passed = r.upper() >= claimed;
            let verdict = format!(
                "agreement {}/{} = {:.4}, 95% CI [{:.4}, {:.4}], claimed >= {:.4}",
                r.agreements,
                r.trials,
                r.rate,
                r.lower(),
                r.upper(),
                claimed
            );
            (passed, verdict, BenchResult::Replicability(r))
        }
        BenchSpec::TwoParam {
            seeds,
            trials_per_seed,
            eta,
            nu,
            experiment,
        } => {
            let r = estimate_two_param_replicability(experiment, *seeds, *trials_per_seed, *eta, &root)?;
            let good = r.seeds.iter().filter(|s| s.modal_mass >= 1.0 - eta).count();
            let (passed, ci) = claim_holds(good, *seeds, 1.0 - nu);
            let verdict = format!(
                "{good}/{seeds} seeds have modal mass >= {:.4}, 95% CI [{:.4}, {:.4}], claimed >= {:.4}",
                1.0 - eta,
                ci.0,
                ci.1,
                1.0 - nu
            );
            (passed, verdict, BenchResult::TwoParam(r))
        }
        BenchSpec::Accuracy {
            trials,
            holdout,
            eps,
            delta,
            experiment,
        } => {
            let r = accuracy_bench(experiment, *trials, *holdout, &root)?;
            let good = r.within(*eps);
            let (passed, ci) = claim_holds(good, *trials, 1.0 - delta);
            let verdict = format!(
                "{good}/{trials} trials with holdout error <= {eps}, {} exact, {} without output, 95% CI [{:.4}, {:.4}], claimed >= {:.4}",
                r.exact(),
                r.no_output(),
                ci.0,
                ci.1,
                1.0 - delta
            );
            (passed, verdict, BenchResult::Accuracy(r))
        }
        BenchSpec::Coverage(spec) => {
            let r = coverage_bench(spec, &root)?;
            let broken = r.rows.iter().filter(|row| !row.holds).count();
            let verdict = format!("{} rows, {broken} above the bound d^2 T_max / m", r.rows.len());
            (r.passed(), verdict, BenchResult::Coverage(r))
        }
        BenchSpec::Sensitivity(spec) => {
            let pool = match &spec.pool {
                Some(p) => p.clone(),
                None => nonzero_vectors(spec.d),
            };
            let r = match spec.method {
                SensitivityMethod::Exhaustive => sensitivity_exhaustive(spec.d, spec.m, &pool, spec.mode)?,
                SensitivityMethod::AllNeighbors => {
                    sensitivity_oracle(spec.d, spec.m, &pool, spec.trials, spec.mode, &mut root.substream("sequences"))?
                }
                SensitivityMethod::Sampled => {
                    if spec.mode != NeighborMode::Replace {
                        return Err(Error::Config("sampled sensitivity supports mode = replace only".into()));
                    }
                    sensitivity_sampled(spec.d, spec.m, &pool, spec.trials, &mut root.substream("sequences"))?
                }
            };
            let passed = r.max_deviation <= spec.claimed_bound;
            let verdict = format!(
                "{} cases, max deviation {}, {} cases above the claimed bound {}",
                r.cases,
                r.max_deviation,
                r.violations(spec.claimed_bound),
                spec.claimed_bound
            );
            (passed, verdict, BenchResult::Sensitivity(r))
        }
        BenchSpec::HeavyHitters(spec) => {
            let r = heavy_hitter_bench(spec, &root)?;
            let claimed = 1.0 - spec.rho;
            let passed = r.agreement.upper() >= claimed && r.soundness_violations == 0;
            let verdict = format!(
                "k = {}, agreement {}/{}, 95% CI [{:.4}, {:.4}], claimed >= {:.4}, {} soundness violations",
                r.k,
                r.agreement.agreements,
                r.agreement.trials,
                r.agreement.lower(),
                r.agreement.upper(),
                claimed,
                r.soundness_violations
            );
            (passed, verdict, BenchResult::HeavyHitters(r))
        }
    };
    Ok(BenchReport {
        bench: config.bench_name(),
        seed: config.seed,
        passed,
        verdict,
        config: config.clone(),
        result,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BenchReport {
    /// Table rows behind the report, header first.
    pub fn table(&self) -> Vec<Vec<String>> {
        let s = |x: &dyn ToString| x.to_string();
        let mut rows: Vec<Vec<String>> = Vec::new();
        match &self.result {
            BenchResult::Replicability(r) | BenchResult::HeavyHitters(HeavyHitterReport { agreement: r, .. }) => {
                rows.push(["trial", "path", "output_a", "output_b", "agree"].map(String::from).to_vec());
                for t in &r.transcripts {
                    rows.push(vec![s(&t.index), t.path.clone(), t.output_a.clone(), t.output_b.clone(), s(&t.agree)]);
                }
            }
            BenchResult::TwoParam(r) => {
                rows.push(["seed", "path", "modal_output", "modal_mass"].map(String::from).to_vec());
                for m in &r.seeds {
                    rows.push(vec![s(&m.seed_index), m.path.clone(), m.modal_output.clone(), s(&m.modal_mass)]);
                }
            }
            BenchResult::Accuracy(r) => {
                rows.push(["trial", "path", "output", "holdout_error", "exact"].map(String::from).to_vec());
                for a in &r.rows {
                    rows.push(vec![s(&a.index), a.path.clone(), a.output.clone(), opt(a.holdout_error), s(&a.exact)]);
                }
            }
            BenchResult::Coverage(r) => {
                rows.push(
                    ["m", "t_max", "trials", "mean_uncovered_fraction", "max_uncovered_fraction", "bound", "holds"]
                        .map(String::from)
                        .to_vec(),
                );
                for c in &r.rows {
                    rows.push(vec![
                        s(&c.m),
                        s(&c.t_max),
                        s(&c.trials),
                        s(&c.mean_uncovered_fraction),
                        s(&c.max_uncovered_fraction),
                        s(&c.bound),
                        s(&c.holds),
                    ]);
                }
            }
            BenchResult::Sensitivity(r) => {
                rows.push(["deviation", "cases"].map(String::from).to_vec());
                for (dev, n) in &r.histogram {
                    rows.push(vec![s(dev), s(n)]);
                }
            }
        }
        rows
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in self.table() {
                    w.write_record(&row)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
            }
            Format::Text => {
                let mut out = String::new();
                let status = if self.passed { "PASS" } else { "FAIL" };
                writeln!(out, "bench {} seed {}: {status}", self.bench, self.seed).expect("string");
                writeln!(out, "{}", self.verdict).expect("string");
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REPLICABILITY: &str = r#"
        seed = 7
        bench = "replicability"
        trials = 20
        rho_budget = 0.1

        [distribution]
        kind = "planted-subspace"
        d = 5
        k = 2
        leak = 0.02

        [algorithm]
        kind = "span"
        m = 2000
        thresholds = { kind = "scaled", lo = 0.25, hi = 0.5 }
    "#;

    #[test]
    fn config_parses_and_round_trips() {
        let c = ExperimentConfig::from_toml(REPLICABILITY).unwrap();
        assert_eq!(c.seed, Seed::from_u64(7));
        assert_eq!(c.bench_name(), "replicability");
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn reports_are_reproducible() {
        let c = ExperimentConfig::from_toml(REPLICABILITY).unwrap();
        let a = run_bench(&c).unwrap();
        let b = run_bench(&c).unwrap();
        for f in [Format::Json, Format::Csv, Format::Text] {
            assert_eq!(a.render(f).unwrap(), b.render(f).unwrap());
        }
        assert!(a.passed, "{}", a.verdict);
        assert_eq!(a.table().len(), 21);
    }

    #[test]
    fn sensitivity_bench_fails_on_bound_one() {
        let c = ExperimentConfig::from_toml(
            r#"
            seed = 1
            bench = "sensitivity"
            d = 2
            m = 4
            method = "exhaustive"
        "#,
        )
        .unwrap();
        let r = run_bench(&c).unwrap();
        assert!(!r.passed);
        assert_eq!(r.table(), vec![
            vec!["deviation".to_string(), "cases".into()],
            vec!["0".into(), "588".into()],
            vec!["2".into(), "384".into()],
        ]);
    }

    #[test]
    fn unknown_bench_is_a_config_error() {
        assert!(matches!(
            ExperimentConfig::from_toml("seed = 1\nbench = \"nope\"\n"),
            Err(Error::Config(_))
        ));
    }
}
