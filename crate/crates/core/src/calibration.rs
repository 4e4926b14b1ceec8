//! Frozen empirical constants.
//!
//! Bounds whose constants are only known to exist are measured once by a
//! calibration run and written to `data/calibration.txt` as `key = value`
//! lines. Ordinary runs read the embedded copy and regress against it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

const EMBEDDED: &str = include_str!("../data/calibration.txt");

/// Path of the source copy of the constants file, rewritten by calibration.
pub fn default_path() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/calibration.txt"))
}

/// Relative slack allowed when comparing a fresh measurement with its frozen value.
pub const REGRESSION_SLACK: f64 = 1e-9;

/// Whether a frozen value bounds future measurements from above or below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Upper,
    Lower,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        }
    }

    /// Whether `measured` respects the frozen bound.
    pub fn admits(&self, measured: f64, frozen: f64) -> bool {
        let slack = REGRESSION_SLACK * frozen.abs() + f64::MIN_POSITIVE;
        match self {
            Direction::Upper => measured <= frozen + slack,
            Direction::Lower => measured >= frozen - slack,
        }
    }
}

/// A parsed constants file.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    entries: BTreeMap<String, f64>,
    hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Calibration {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Calibration(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Calibration(format!("line {}: `{}` is not a number", i + 1, value.trim())))?;
            if entries.insert(key.to_string(), value).is_some() {
                return Err(Error::Calibration(format!("line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Self {
            entries,
            hash: sha256_hex(text.as_bytes()),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The constants compiled into the library.
    pub fn embedded() -> &'static Calibration {
        static CELL: OnceLock<Calibration> = OnceLock::new();
        CELL.get_or_init(|| Calibration::parse(EMBEDDED).expect("embedded constants file parses"))
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.entries
            .get(key)
            .copied()
            .ok_or_else(|| Error::Calibration(format!("missing key {key}")))
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.entries
    }

    /// SHA-256 of the file contents.
    pub fn hash(&self) -> &str {
        &self.hash
    }
}

/// One measured constant, ready to be frozen.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub key: String,
    pub value: f64,
    pub direction: Direction,
    pub note: String,
}

/// Renders measurements in the constants file format.
pub fn render(version: &str, measurements: &[Measurement]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# frozen calibration constants (dspheres {version})");
    let _ = writeln!(out, "# regenerate with: dspheres sweep --calibrate");
    for m in measurements {
        let _ = writeln!(out, "# {} bound: {}", m.direction.as_str(), m.note);
        let _ = writeln!(out, "{} = {:.17e}", m.key, m.value);
    }
    out
}

/// Build identifier: version plus a short prefix of the constants hash.
pub fn build_id() -> String {
    format!("{}+{}", crate::VERSION, &Calibration::embedded().hash()[..12])
}

/// Comment lines opening every CSV report: tool version, build id, hash of
/// the embedded constants file and the seed.
pub fn csv_preamble(kind: &str, seed: u64) -> String {
    format!(
        "# dspheres {}\n# build: {}\n# report: {kind}\n# constants sha256: {}\n# seed: {seed}\n",
        crate::VERSION,
        build_id(),
        Calibration::embedded().hash()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let ms = vec![
            Measurement {
                key: "a".into(),
                value: 1.5,
                direction: Direction::Upper,
                note: "first".into(),
            },
            Measurement {
                key: "b".into(),
                value: -2e-30,
                direction: Direction::Lower,
                note: "second".into(),
            },
        ];
        let text = render("0.0.0", &ms);
        let cal = Calibration::parse(&text).unwrap();
        assert_eq!(cal.get("a").unwrap(), 1.5);
        assert_eq!(cal.get("b").unwrap(), -2e-30);
        assert!(cal.get("c").is_err());
        assert_eq!(cal.hash().len(), 64);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(Calibration::parse("x 1").is_err());
        assert!(Calibration::parse("x = y").is_err());
        assert!(Calibration::parse("x = 1\nx = 2").is_err());
    }

    #[test]
    fn directions() {
        assert!(Direction::Upper.admits(1.0, 1.0));
        assert!(!Direction::Upper.admits(1.001, 1.0));
        assert!(Direction::Lower.admits(1.0, 1.0));
        assert!(!Direction::Lower.admits(0.999, 1.0));
    }

    #[test]
    fn embedded_file_parses() {
        let cal = Calibration::embedded();
        assert_eq!(cal.hash().len(), 64);
    }
}
