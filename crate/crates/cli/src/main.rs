mod args;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use repar_core::harness::bench::{SensitivityMethod, SensitivitySpec};
use repar_core::harness::hh::HeavyHitterSpec;
use repar_core::harness::{
    run_bench, AlgorithmSpec, BenchSpec, CoverageSpec, Dataset, DistributionSpec, Experiment, ExperimentConfig, Format,
    ParitySpec, ThresholdRule,
};
use repar_core::parity::learn_parity_detailed;
use repar_core::partition::{multiplicities, stable_partition};
use repar_core::span::{rep_linear_span_detailed, threshold_formulas};
use repar_core::wrapper::{make_replicable, ParityBase, VecSource};
use repar_core::{
    empirical_error, recommended_sample_size, BitVec, Error, LearnerParams, RandomnessHandle, Seed, SpanParams,
    Subspace, WrapperParams,
};
use serde::Serialize;

use args::{AlgorithmKind, Cli, Command, DistributionArgs, Method, OutputFormat, ThresholdArgs};

const SUCCESS: u8 = 0;
const BENCH_FAILED: u8 = 1;
const USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE)
        }
    }
}

type CliResult<T> = Result<T, Error>;

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn run(cli: &Cli) -> CliResult<u8> {
    let seed = cli.seed.unwrap_or_else(|| Seed::from_u64(0));
    match &cli.command {
        Command::Learn(a) => learn(cli, seed, a),
        Command::Span(a) => span(cli, seed, a),
        Command::Partition(a) => partition(cli, &a.input),
        Command::CalcParams(a) => calc_params(cli, a),
        Command::BenchReplicability(a) => bench(cli, "replicability", || {
            let experiment = Experiment::new(distribution(&a.dist)?, algorithm(a)?);
            Ok(BenchSpec::Replicability {
                trials: a.trials,
                rho_budget: a.rho,
                experiment,
            })
        }),
        Command::BenchCoverage(a) => bench(cli, "coverage", || {
            Ok(BenchSpec::Coverage(CoverageSpec {
                distribution: distribution(&a.dist)?,
                ms: a.ms.clone(),
                rho: a.rho,
                eps: 0.1,
                thresholds: scaled(&a.scaled_thresholds)?,
                trials: a.trials,
            }))
        }),
        Command::BenchSensitivity(a) => bench(cli, "sensitivity", || {
            Ok(BenchSpec::Sensitivity(SensitivitySpec {
                d: a.d,
                m: a.m,
                trials: a.trials,
                method: match a.method {
                    Method::Exhaustive => SensitivityMethod::Exhaustive,
                    Method::AllNeighbors => SensitivityMethod::AllNeighbors,
                    Method::Sampled => SensitivityMethod::Sampled,
                },
                mode: a.mode.into(),
                pool: None,
                claimed_bound: a.claimed_bound,
            }))
        }),
        Command::BenchHh(a) => bench(cli, "heavy-hitters", || {
            Ok(BenchSpec::HeavyHitters(HeavyHitterSpec {
                frequencies: a.frequencies.clone(),
                k: a.k,
                eps_hh: 1.0 / 12.0,
                nu_hh: 2.0 / 3.0,
                rho: a.rho,
                trials: a.trials,
            }))
        }),
    }
}

fn core_format(f: OutputFormat) -> Format {
    match f {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Text => Format::Text,
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Renders a command result in the chosen format.
fn render<T: Serialize>(format: OutputFormat, value: &T, table: Vec<Vec<String>>, text: String) -> CliResult<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in table {
                w.write_record(&row)?;
            }
            let bytes = w.into_inner().map_err(|e| usage(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("utf-8 fields"))
        }
        OutputFormat::Text => Ok(text),
    }
}

fn strings<const N: usize>(row: [&str; N]) -> Vec<String> {
    row.iter().map(|s| s.to_string()).collect()
}

fn basis_strings(s: &Subspace) -> Vec<String> {
    s.basis().iter().map(BitVec::to_string).collect()
}

fn bench(cli: &Cli, name: &str, from_flags: impl FnOnce() -> CliResult<BenchSpec>) -> CliResult<u8> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::read(path)?,
        None => ExperimentConfig::new(Seed::from_u64(0), from_flags()?),
    };
    let fits = config.bench_name() == name
        || (name == "replicability" && matches!(config.bench, BenchSpec::TwoParam { .. } | BenchSpec::Accuracy { .. }));
    if !fits {
        return Err(usage(format!(
            "config describes a {} bench, this command runs {name}",
            config.bench_name()
        )));
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let report = run_bench(&config)?;
    let out = cli.out.as_deref().or(config.out.as_deref());
    emit(out, &report.render(core_format(cli.format))?)?;
    Ok(if report.passed { SUCCESS } else { BENCH_FAILED })
}

fn distribution(a: &DistributionArgs) -> CliResult<DistributionSpec> {
    let mut spec = match a.planted {
        Some(k) => DistributionSpec::planted(a.d, k, a.leak),
        None if a.leak > 0.0 => return Err(usage("--leak needs --planted")),
        None => DistributionSpec::uniform(a.d),
    };
    if a.labels || a.label_noise.is_some() {
        spec = spec.with_parity(ParitySpec::Random);
    }
    if let Some(p) = a.label_noise {
        spec = spec.with_label_noise(p);
    }
    spec.validate()?;
    Ok(spec)
}

fn scaled(v: &Option<Vec<f64>>) -> CliResult<ThresholdRule> {
    match v.as_deref() {
        None => Ok(ThresholdRule::Derived),
        Some([lo, hi]) => Ok(ThresholdRule::Scaled { lo: *lo, hi: *hi }),
        Some(other) => Err(usage(format!("--scaled-thresholds takes lo,hi, got {other:?}"))),
    }
}

fn algorithm(a: &args::ReplicabilityArgs) -> CliResult<AlgorithmSpec> {
    let thresholds = scaled(&a.scaled_thresholds)?;
    Ok(match a.algorithm {
        AlgorithmKind::Span => AlgorithmSpec::Span {
            m: a.m,
            rho: a.rho,
            eps: 0.1,
            thresholds,
        },
        AlgorithmKind::Parity => AlgorithmSpec::Parity {
            m: a.m,
            rho: a.rho,
            eps: 0.1,
            delta: 0.1,
            thresholds,
        },
        AlgorithmKind::WrappedParity => AlgorithmSpec::WrappedParity {
            m: a.m,
            rho: a.rho,
            eps: 0.1,
            delta: 0.1,
            thresholds,
            wrapper_rho: 0.1,
            wrapper_delta: 0.1,
            c_t: 4.0,
            c_k: 1.0,
            c_delta: 1.0,
        },
    })
}

fn with_overrides(t: &ThresholdArgs, p: SpanParams) -> SpanParams {
    match (t.t_min, t.t_max) {
        (Some(lo), Some(hi)) => p.with_thresholds(lo, hi),
        _ => p,
    }
}

#[derive(Serialize)]
struct SpanOut {
    d: usize,
    m: usize,
    t_min: f64,
    t_max: f64,
    chosen_t: f64,
    dim: usize,
    basis: Vec<String>,
    heavy: Vec<(Vec<String>, usize)>,
    uncovered: usize,
    uncovered_bound: f64,
}

fn span(cli: &Cli, seed: Seed, a: &args::SpanArgs) -> CliResult<u8> {
    let ds = Dataset::read(&a.input.input)?;
    let t = &a.thresholds;
    let params = with_overrides(t, SpanParams::new(ds.d, ds.len(), t.rho, t.eps)?);
    let o = rep_linear_span_detailed(&ds.points, &params, &RandomnessHandle::new(seed))?;
    let out = SpanOut {
        d: ds.d,
        m: ds.len(),
        t_min: o.thresholds.t_min,
        t_max: o.thresholds.t_max,
        chosen_t: o.heavy.chosen_t,
        dim: o.subspace.dim(),
        basis: basis_strings(&o.subspace),
        heavy: o.heavy.subspaces.iter().map(|(s, n)| (basis_strings(s), *n)).collect(),
        uncovered: o.uncovered,
        uncovered_bound: o.thresholds.uncovered_bound(ds.d),
    };
    let mut table = vec![strings(["basis_vector"])];
    table.extend(out.basis.iter().map(|b| vec![b.clone()]));
    let text = format!(
        "subspace dim {} basis [{}]\nthresholds T_min {:.4} T_max {:.4}, chosen t {:.4}\nuncovered {} of {} (bound {:.4})\n",
        out.dim,
        out.basis.join(", "),
        out.t_min,
        out.t_max,
        out.chosen_t,
        out.uncovered,
        out.m,
        out.uncovered_bound
    );
    emit(cli.out.as_deref(), &render(cli.format, &out, table, text)?)?;
    Ok(SUCCESS)
}

#[derive(Serialize)]
struct SetOut {
    indices: Vec<usize>,
    span: Vec<String>,
}

#[derive(Serialize)]
struct PartitionOut {
    d: usize,
    sets: Vec<SetOut>,
    multiplicities: Vec<(Vec<String>, usize)>,
}

fn partition(cli: &Cli, input: &Path) -> CliResult<u8> {
    let ds = Dataset::read(input)?;
    let p = stable_partition(ds.d, &ds.points)?;
    let mults = multiplicities(&p);
    let out = PartitionOut {
        d: ds.d,
        sets: p
            .sets()
            .iter()
            .map(|s| SetOut {
                indices: s.indices.clone(),
                span: basis_strings(&s.span),
            })
            .collect(),
        multiplicities: mults.iter().map(|(s, n)| (basis_strings(s), n)).collect(),
    };
    let join = |v: &[String]| v.join(" ");
    let mut table = vec![strings(["set", "indices", "span_basis"])];
    for (i, s) in out.sets.iter().enumerate() {
        let idx: Vec<String> = s.indices.iter().map(usize::to_string).collect();
        table.push(vec![i.to_string(), join(&idx), join(&s.span)]);
    }
    let mut text = format!("{} sets\n", out.sets.len());
    for (i, s) in out.sets.iter().enumerate() {
        text += &format!("set {i}: indices {:?} span [{}]\n", s.indices, s.span.join(", "));
    }
    for (basis, n) in &out.multiplicities {
        text += &format!("multiplicity {n}: span [{}]\n", basis.join(", "));
    }
    emit(cli.out.as_deref(), &render(cli.format, &out, table, text)?)?;
    Ok(SUCCESS)
}

#[derive(Serialize)]
struct LearnOut {
    d: usize,
    m: usize,
    output: String,
    training_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    span_basis: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    covered: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds_executed: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples_consumed: Option<usize>,
}

fn learn(cli: &Cli, seed: Seed, a: &args::LearnArgs) -> CliResult<u8> {
    let ds = Dataset::read(&a.input.input)?;
    let samples = ds.samples()?;
    let t = &a.thresholds;
    let handle = RandomnessHandle::new(seed);
    let build = |m: usize| -> CliResult<LearnerParams> {
        let mut p = LearnerParams::new(ds.d, m, t.rho, t.eps, a.delta)?;
        p.span = with_overrides(t, p.span);
        Ok(p)
    };
    let mut out = LearnOut {
        d: ds.d,
        m: samples.len(),
        output: String::new(),
        training_error: None,
        span_basis: None,
        covered: None,
        rounds_executed: None,
        samples_consumed: None,
    };
    let hypothesis = if a.wrap {
        let batch = a.batch.ok_or_else(|| usage("--wrap needs --batch"))?;
        let base = ParityBase::new(build(batch)?);
        let wp = WrapperParams::new(a.wrapper_rho, a.wrapper_delta)?.with_constants(a.c_t, a.c_k, a.c_delta)?;
        let mut source = VecSource::new(samples.clone());
        let r = make_replicable(&base, &wp, &mut source, &handle)?;
        out.output = r.output.to_string();
        out.rounds_executed = Some(r.rounds_executed);
        out.samples_consumed = Some(r.samples_consumed);
        r.output.hypothesis().and_then(|o| o.hypothesis()).cloned()
    } else {
        let r = learn_parity_detailed(&samples, &build(samples.len())?, &handle)?;
        out.output = r.outcome.to_string();
        out.span_basis = Some(basis_strings(&r.span));
        out.covered = Some(r.covered);
        r.outcome.hypothesis().cloned()
    };
    if let Some(h) = &hypothesis {
        out.training_error = Some(empirical_error(h, &samples)?);
    }
    let table = vec![strings(["output", "training_error"]), vec![
        out.output.clone(),
        out.training_error.map(|e| e.to_string()).unwrap_or_default(),
    ]];
    let mut text = format!("{}\n", out.output);
    if let Some(e) = out.training_error {
        text += &format!("training error {e}\n");
    }
    emit(cli.out.as_deref(), &render(cli.format, &out, table, text)?)?;
    Ok(SUCCESS)
}

#[derive(Serialize)]
struct CalcOut {
    d: usize,
    m: usize,
    rho: f64,
    t_min: f64,
    t_max: f64,
    limit: f64,
    valid: bool,
    verdict: String,
    coverage_bound: f64,
    recommended_sample_size: f64,
}

fn calc_params(cli: &Cli, a: &args::CalcArgs) -> CliResult<u8> {
    let t = threshold_formulas(a.d, a.m, a.rho)?;
    let verdict = match t.validate(a.d, a.m) {
        Ok(()) => "valid".to_string(),
        Err(e) => e.to_string(),
    };
    let out = CalcOut {
        d: a.d,
        m: a.m,
        rho: a.rho,
        t_min: t.t_min,
        t_max: t.t_max,
        limit: a.m as f64 / (a.d * a.d) as f64,
        valid: verdict == "valid",
        verdict,
        coverage_bound: t.uncovered_bound(a.d) / a.m as f64,
        recommended_sample_size: recommended_sample_size(a.d, a.rho, a.eps, a.delta)?,
    };
    let table = vec![
        strings(["t_min", "t_max", "limit", "valid", "coverage_bound", "recommended_sample_size"]),
        vec![
            out.t_min.to_string(),
            out.t_max.to_string(),
            out.limit.to_string(),
            out.valid.to_string(),
            out.coverage_bound.to_string(),
            out.recommended_sample_size.to_string(),
        ],
    ];
    let text = format!(
        "T_min = {:.4}\nT_max = {:.4}\nm/d^2 = {:.4}\nthresholds: {}\ncoverage bound d^2 T_max / m = {:.4}\nrecommended sample size = {:.6e}\n",
        out.t_min, out.t_max, out.limit, out.verdict, out.coverage_bound, out.recommended_sample_size
    );
    emit(cli.out.as_deref(), &render(cli.format, &out, table, text)?)?;
    Ok(SUCCESS)
}
