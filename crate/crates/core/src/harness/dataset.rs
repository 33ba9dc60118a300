//! Plain-text datasets.
//!
//! ```text
//! #d=4
//! 1010,1
//! 0111,0
//! ```
//!
//! The header is mandatory. Each record is a `d`-character bit string with
//! coordinate 0 first, optionally followed by `,` and a label bit. Either
//! every record carries a label or none does. Blank lines and further `#`
//! lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::parity::LabeledSample;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub d: usize,
    pub points: Vec<BitVec>,
    /// Aligned with `points` when present.
    pub labels: Option<Vec<bool>>,
}

impl Dataset {
    pub fn unlabeled(d: usize, points: Vec<BitVec>) -> Self {
        Dataset {
            d,
            points,
            labels: None,
        }
    }

    pub fn labeled(d: usize, samples: &[LabeledSample]) -> Self {
        Dataset {
            d,
            points: samples.iter().map(|s| s.x.clone()).collect(),
            labels: Some(samples.iter().map(|s| s.y).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Labeled view; fails on an unlabeled dataset.
    pub fn samples(&self) -> Result<Vec<LabeledSample>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::Distribution("dataset has no labels".into()))?;
        Ok(self
            .points
            .iter()
            .zip(labels)
            .map(|(x, &y)| LabeledSample::new(x.clone(), y))
            .collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("#d={}\n", self.d);
        for (i, x) in self.points.iter().enumerate() {
            match &self.labels {
                Some(l) => writeln!(out, "{},{}", x, u8::from(l[i])),
                None => writeln!(out, "{x}"),
            }
            .expect("writing to a String");
        }
        out
    }

    /// `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Dataset {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (n, header) = lines
            .by_ref()
            .find(|(_, l)| !l.is_empty())
            .ok_or_else(|| err(1, "missing #d=<d> header".into()))?;
        let d: usize = header
            .strip_prefix("#d=")
            .and_then(|v| v.trim().parse().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| err(n, format!("expected #d=<d> header, found {header:?}")))?;

        let mut points = Vec::new();
        let mut labels = Vec::new();
        let mut labeled: Option<bool> = None;
        for (n, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (bits, label) = match line.split_once(',') {
                Some((b, l)) => (b.trim(), Some(l.trim())),
                None => (line, None),
            };
            let x: BitVec = bits.parse().map_err(|e: Error| err(n, e.to_string()))?;
            if x.dim() != d {
                return Err(err(n, format!("record has {} bits, header says {d}", x.dim())));
            }
            if *labeled.get_or_insert(label.is_some()) != label.is_some() {
                return Err(err(n, "records mix labeled and unlabeled lines".into()));
            }
            if let Some(l) = label {
                labels.push(match l {
                    "0" => false,
                    "1" => true,
                    other => return Err(err(n, format!("label must be 0 or 1, found {other:?}"))),
                });
            }
            points.push(x);
        }
        Ok(Dataset {
            d,
            points,
            labels: labeled.unwrap_or(false).then_some(labels),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
