//! Synthetic sample distributions.
//!
//! A [`DistributionSpec`] is the serializable description; resolving it
//! against a handle fixes every random choice (planted basis, hidden parity)
//! and yields a [`Distribution`] that can be sampled repeatedly.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitVec, EchelonBasis, Subspace};
use crate::harness::dataset::Dataset;
use crate::parity::LabeledSample;
use crate::rng::{RandomStream, RandomnessHandle};

/// Either a fixed parity or one drawn at resolution time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParitySpec {
    Fixed(BitVec),
    Random,
}

impl FromStr for ParitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "random" => Ok(ParitySpec::Random),
            bits => bits.parse().map(ParitySpec::Fixed),
        }
    }
}

impl fmt::Display for ParitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParitySpec::Fixed(z) => z.fmt(f),
            ParitySpec::Random => f.write_str("random"),
        }
    }
}

impl Serialize for ParitySpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParitySpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Support {
    UniformFull,
    /// A `k`-dimensional subspace; with probability `leak` the point is
    /// drawn uniformly from outside it instead.
    PlantedSubspace {
        k: usize,
        #[serde(default)]
        leak: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis: Option<Vec<BitVec>>,
    },
    PointMassMixture {
        points: Vec<BitVec>,
        weights: Vec<f64>,
    },
    /// Uniform over the records of a dataset file.
    FromFile { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub d: usize,
    #[serde(flatten)]
    pub support: Support,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_parity: Option<ParitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<f64>,
}

impl DistributionSpec {
    pub fn uniform(d: usize) -> Self {
        DistributionSpec {
            d,
            support: Support::UniformFull,
            hidden_parity: None,
            label_noise: None,
        }
    }

    pub fn planted(d: usize, k: usize, leak: f64) -> Self {
        DistributionSpec {
            d,
            support: Support::PlantedSubspace {
                k,
                leak,
                basis: None,
            },
            hidden_parity: None,
            label_noise: None,
        }
    }

    pub fn mixture(d: usize, points: Vec<BitVec>, weights: Vec<f64>) -> Self {
        DistributionSpec {
            d,
            support: Support::PointMassMixture { points, weights },
            hidden_parity: None,
            label_noise: None,
        }
    }

    pub fn with_parity(mut self, parity: ParitySpec) -> Self {
        self.hidden_parity = Some(parity);
        self
    }

    pub fn with_label_noise(mut self, p: f64) -> Self {
        self.label_noise = Some(p);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Distribution(msg));
        let d = self.d;
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(p) = self.label_noise {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("label_noise {p} outside [0, 1]"));
            }
        }
        if let Some(ParitySpec::Fixed(z)) = &self.hidden_parity {
            if z.dim() != d {
                return bad(format!("hidden parity has {} bits, d = {d}", z.dim()));
            }
        }
        match &self.support {
            Support::UniformFull | Support::FromFile { .. } => Ok(()),
            Support::PlantedSubspace { k, leak, basis } => {
                if *k > d {
                    return bad(format!("planted dimension k = {k} exceeds d = {d}"));
                }
                if !(0.0..=1.0).contains(leak) {
                    return bad(format!("leak {leak} outside [0, 1]"));
                }
                if *k == d && *leak > 0.0 {
                    return bad("leak needs a proper subspace (k < d)".into());
                }
                if let Some(b) = basis {
                    if b.len() != *k {
                        return bad(format!("basis has {} vectors, k = {k}", b.len()));
                    }
                    if b.iter().any(|v| v.dim() != d) {
                        return bad("basis vector of the wrong dimension".into());
                    }
                    if crate::gf2::rank(d, b)? != *k {
                        return bad("planted basis is not independent".into());
                    }
                }
                Ok(())
            }
            Support::PointMassMixture { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return bad("mixture needs one weight per point and at least one point".into());
                }
                if points.iter().any(|p| p.dim() != d) {
                    return bad("mixture point of the wrong dimension".into());
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return bad("mixture weights must be non-negative".into());
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("mixture weights sum to {total}, not 1"));
                }
                Ok(())
            }
        }
    }

    /// Fixes every random choice using children of `rnd`.
    pub fn resolve(&self, rnd: &RandomnessHandle) -> Result<Distribution> {
        self.validate()?;
        let d = self.d;
        let support = match &self.support {
            Support::UniformFull => Resolved::Uniform,
            Support::PlantedSubspace { k, leak, basis } => {
                let subspace = match basis {
                    Some(b) => Subspace::span(d, b)?,
                    None => random_subspace(d, *k, &mut rnd.substream("subspace")),
                };
                Resolved::Planted {
                    subspace,
                    leak: *leak,
                }
            }
            Support::PointMassMixture { points, weights } => {
                let mut acc = 0.0;
                let cumulative = weights
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                Resolved::Mixture {
                    points: points.clone(),
                    cumulative,
                }
            }
            Support::FromFile { path } => {
                let ds = Dataset::read(path)?;
                if ds.d != d {
                    return Err(Error::Distribution(format!(
                        "{} has d = {}, spec says {d}",
                        path.display(),
                        ds.d
                    )));
                }
                if ds.is_empty() {
                    return Err(Error::EmptyInput("dataset file has no records"));
                }
                Resolved::Empirical {
                    points: ds.points,
                    labels: ds.labels,
                }
            }
        };
        let parity = match &self.hidden_parity {
            None => None,
            Some(ParitySpec::Fixed(z)) => Some(z.clone()),
            Some(ParitySpec::Random) => Some(BitVec::random(d, &mut rnd.substream("hidden-parity"))),
        };
        Ok(Distribution {
            d,
            support,
            parity,
            noise: self.label_noise.unwrap_or(0.0),
        })
    }
}

/// Uniformly random `k`-dimensional subspace, by rejection.
pub fn random_subspace(d: usize, k: usize, stream: &mut RandomStream) -> Subspace {
    let mut basis = EchelonBasis::new(d);
    while basis.rank() < k {
        let v = BitVec::random(d, stream);
        basis.insert(&v).expect("dimensions agree");
    }
    basis.to_subspace()
}

#[derive(Clone, Debug)]
enum Resolved {
    Uniform,
    Planted { subspace: Subspace, leak: f64 },
    Mixture { points: Vec<BitVec>, cumulative: Vec<f64> },
    Empirical { points: Vec<BitVec>, labels: Option<Vec<bool>> },
}

/// A sampleable distribution over labeled points.
#[derive(Clone, Debug)]
pub struct Distribution {
    d: usize,
    support: Resolved,
    parity: Option<BitVec>,
    noise: f64,
}

impl Distribution {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn hidden_parity(&self) -> Option<&BitVec> {
        self.parity.as_ref()
    }

    pub fn planted_subspace(&self) -> Option<&Subspace> {
        match &self.support {
            Resolved::Planted { subspace, .. } => Some(subspace),
            _ => None,
        }
    }

    pub fn label_noise(&self) -> f64 {
        self.noise
    }

    fn draw_point(&self, s: &mut RandomStream) -> (BitVec, Option<bool>) {
        match &self.support {
            Resolved::Uniform => (BitVec::random(self.d, s), None),
            Resolved::Planted { subspace, leak } => {
                if *leak > 0.0 && s.bernoulli(*leak) {
                    loop {
                        let x = BitVec::random(self.d, s);
                        if !subspace.contains(&x).expect("dimensions agree") {
                            return (x, None);
                        }
                    }
                }
                let coeffs = BitVec::random(subspace.dim(), s);
                let mut x = BitVec::zeros(self.d);
                for i in coeffs.ones() {
                    x.xor_in_place(&subspace.basis()[i]);
                }
                (x, None)
            }
            Resolved::Mixture { points, cumulative } => {
                let u = s.next_f64();
                let i = cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(points.len() - 1);
                (points[i].clone(), None)
            }
            Resolved::Empirical { points, labels } => {
                let i = s.index(points.len());
                (points[i].clone(), labels.as_ref().map(|l| l[i]))
            }
        }
    }

    /// Label is the hidden parity if set, else the file label, else 0;
    /// then flipped with probability `label_noise`.
    pub fn sample(&self, s: &mut RandomStream) -> LabeledSample {
        let (x, file_label) = self.draw_point(s);
        let mut y = match &self.parity {
            Some(z) => z.dot_unchecked(&x),
            None => file_label.unwrap_or(false),
        };
        if self.noise > 0.0 && s.bernoulli(self.noise) {
            y = !y;
        }
        LabeledSample::new(x, y)
    }

    pub fn generate(&self, n: usize, s: &mut RandomStream) -> Vec<LabeledSample> {
        (0..n).map(|_| self.sample(s)).collect()
    }
}

/// Resolves `spec` at `rnd/distribution` and draws `n` samples from
/// `rnd/samples`.
pub fn generate(spec: &DistributionSpec, n: usize, rnd: &RandomnessHandle) -> Result<Vec<LabeledSample>> {
    let dist = spec.resolve(&rnd.child("distribution"))?;
    Ok(dist.generate(n, &mut rnd.substream("samples")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(seed: u64) -> RandomnessHandle {
        RandomnessHandle::from_u64(seed)
    }

    #[test]
    fn zero_parity_labels_everything_zero() {
        let spec = DistributionSpec::uniform(3).with_parity("000".parse().unwrap());
        let s = generate(&spec, 200, &h(0)).unwrap();
        assert!(s.iter().all(|s| !s.y));
    }

    #[test]
    fn labels_follow_hidden_parity() {
        let spec = DistributionSpec::uniform(6).with_parity(ParitySpec::Random);
        let dist = spec.resolve(&h(1)).unwrap();
        let z = dist.hidden_parity().unwrap().clone();
        let s = dist.generate(500, &mut h(1).stream());
        assert!(s.iter().all(|s| s.y == z.dot(&s.x).unwrap()));
    }

    #[test]
    fn planted_full_dimension_is_uniform_full() {
        let spec = DistributionSpec::planted(4, 4, 0.0);
        let dist = spec.resolve(&h(2)).unwrap();
        assert_eq!(dist.planted_subspace().unwrap(), &Subspace::full(4));
        let mut seen = std::collections::HashSet::new();
        for s in dist.generate(2000, &mut h(3).stream()) {
            seen.insert(s.x);
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn planted_leak_fraction_concentrates() {
        let spec = DistributionSpec::planted(6, 2, 0.1);
        let dist = spec.resolve(&h(4)).unwrap();
        let v = dist.planted_subspace().unwrap().clone();
        assert_eq!(v.dim(), 2);
        let s = dist.generate(10_000, &mut h(5).stream());
        let off = s.iter().filter(|s| !v.contains(&s.x).unwrap()).count() as f64 / 1e4;
        assert!((off - 0.1).abs() <= 0.01, "{off}");
    }

    #[test]
    fn explicit_basis_is_respected() {
        let basis: Vec<BitVec> = vec!["1100".parse().unwrap(), "0011".parse().unwrap()];
        let spec = DistributionSpec {
            d: 4,
            support: Support::PlantedSubspace {
                k: 2,
                leak: 0.0,
                basis: Some(basis.clone()),
            },
            hidden_parity: None,
            label_noise: None,
        };
        let v = Subspace::span(4, &basis).unwrap();
        let dist = spec.resolve(&h(0)).unwrap();
        for s in dist.generate(200, &mut h(6).stream()) {
            assert!(v.contains(&s.x).unwrap());
        }
    }

    #[test]
    fn mixture_frequencies() {
        let pts: Vec<BitVec> = vec!["10".parse().unwrap(), "01".parse().unwrap()];
        let spec = DistributionSpec::mixture(2, pts.clone(), vec![0.25, 0.75]);
        let s = generate(&spec, 20_000, &h(7)).unwrap();
        let first = s.iter().filter(|s| s.x == pts[0]).count() as f64 / 2e4;
        // 5 sigma of Binomial(20000, 1/4)
        assert!((first - 0.25).abs() < 0.016, "{first}");
    }

    #[test]
    fn label_noise_flips() {
        let spec = DistributionSpec::uniform(5)
            .with_parity("00000".parse().unwrap())
            .with_label_noise(0.5);
        let s = generate(&spec, 10_000, &h(8)).unwrap();
        let ones = s.iter().filter(|s| s.y).count() as f64 / 1e4;
        assert!((ones - 0.5).abs() < 0.025, "{ones}");
    }

    #[test]
    fn invalid_specs() {
        assert!(DistributionSpec::planted(3, 4, 0.0).validate().is_err());
        assert!(DistributionSpec::planted(3, 2, 1.5).validate().is_err());
        assert!(DistributionSpec::planted(3, 3, 0.1).validate().is_err());
        let p: BitVec = "10".parse().unwrap();
        assert!(DistributionSpec::mixture(2, vec![p.clone()], vec![0.5]).validate().is_err());
        assert!(DistributionSpec::mixture(2, vec![p], vec![1.0]).validate().is_ok());
        assert!(DistributionSpec::uniform(3).with_label_noise(-0.1).validate().is_err());
        assert!(DistributionSpec::uniform(3)
            .with_parity("10".parse().unwrap())
            .validate()
            .is_err());
    }

    #[test]
    fn missing_file_is_an_error() {
        let spec = DistributionSpec {
            d: 3,
            support: Support::FromFile {
                path: "/nonexistent/data.txt".into(),
            },
            hidden_parity: None,
            label_noise: None,
        };
        assert!(matches!(spec.resolve(&h(0)), Err(Error::Io { .. })));
    }

    #[test]
    fn from_file_uses_file_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        std::fs::write(&path, "#d=2\n10,1\n01,0\n").unwrap();
        let spec = DistributionSpec {
            d: 2,
            support: Support::FromFile { path },
            hidden_parity: None,
            label_noise: None,
        };
        for s in generate(&spec, 100, &h(9)).unwrap() {
            assert_eq!(s.y, s.x.to_string() == "10");
        }
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            kind = "planted-subspace"
            d = 5
            k = 2
            leak = 0.02
            hidden_parity = "random"
        "#;
        let spec: DistributionSpec = toml::from_str(text).unwrap();
        assert_eq!(spec.d, 5);
        assert_eq!(spec.hidden_parity, Some(ParitySpec::Random));
        assert!(matches!(spec.support, Support::PlantedSubspace { k: 2, .. }));
        let back: DistributionSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
