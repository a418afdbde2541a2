//! Experiment configuration: a flat `key=value` file with an optional
//! `[experiment]` section, overridden key by key from the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Stationarity,
    MixingScan,
    TripleScaling,
    DriftCurve,
    Occupation,
    Collisions,
    CoalescenceMeeting,
    CorrectedCount,
    TraceCheck,
    SepCheck,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Stationarity,
        Kind::MixingScan,
        Kind::TripleScaling,
        Kind::DriftCurve,
        Kind::Occupation,
        Kind::Collisions,
        Kind::CoalescenceMeeting,
        Kind::CorrectedCount,
        Kind::TraceCheck,
        Kind::SepCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Stationarity => "stationarity",
            Kind::MixingScan => "mixing-scan",
            Kind::TripleScaling => "triple-scaling",
            Kind::DriftCurve => "drift-curve",
            Kind::Occupation => "occupation",
            Kind::Collisions => "collisions",
            Kind::CoalescenceMeeting => "coalescence-meeting",
            Kind::CorrectedCount => "corrected-count",
            Kind::TraceCheck => "trace-check",
            Kind::SepCheck => "sep-check",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| LabError::config(format!("unknown experiment kind {s:?}")))
    }
}

/// Raw settings in the order they should take effect; later layers win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize_key(key), value.into().trim().to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Applies every entry of `other` on top of `self`.
    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    /// Parses `key=value` lines. Blank lines and lines starting with `#`
    /// are skipped; only the `[experiment]` section header is accepted.
    pub fn parse(text: &str) -> LabResult<Self> {
        let mut out = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(section) = line.strip_prefix('[') {
                if section.strip_suffix(']').map(str::trim) != Some("experiment") {
                    return Err(LabError::config(format!("line {}: unknown section {line}", i + 1)));
                }
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::config(format!("line {}: expected key=value, got {line:?}", i + 1)))?;
            let key = normalize_key(k);
            if key.is_empty() {
                return Err(LabError::config(format!("line {}: empty key", i + 1)));
            }
            if out.values.contains_key(&key) {
                return Err(LabError::config(format!("line {}: duplicate key {key}", i + 1)));
            }
            out.set(&key, v);
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

const RESERVED: [&str; 9] = ["kind", "graph", "c", "seed", "reps", "horizon", "k_max", "out", "workers"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub graph: Option<String>,
    pub c: f64,
    pub seed: u64,
    pub reps: u64,
    pub horizon: Option<u64>,
    pub k_max: usize,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Experiment-specific keys.
    pub params: BTreeMap<String, String>,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> LabResult<T> {
    raw.parse()
        .map_err(|_| LabError::config(format!("bad value {raw:?} for {key}")))
}

impl ExperimentConfig {
    pub fn from_settings(kind: Kind, s: &Settings) -> LabResult<Self> {
        if let Some(k) = s.get("kind") {
            if k.parse::<Kind>()? != kind {
                return Err(LabError::config(format!("config is for {k}, but {kind} was requested")));
            }
        }
        let opt = |key: &str| s.get(key).filter(|v| !v.is_empty());
        let c = opt("c").map(|v| parse_value::<f64>("c", v)).transpose()?.unwrap_or(1.0);
        if !(c > 0.0 && c.is_finite()) {
            return Err(LabError::config(format!("c must be positive, got {c}")));
        }
        let reps = opt("reps").map(|v| parse_value("reps", v)).transpose()?.unwrap_or(1);
        if reps == 0 {
            return Err(LabError::config("reps must be at least 1"));
        }
        let workers = opt("workers").map(|v| parse_value::<usize>("workers", v)).transpose()?;
        if workers == Some(0) {
            return Err(LabError::config("workers must be at least 1"));
        }
        let k_max = opt("k_max").map(|v| parse_value("k_max", v)).transpose()?.unwrap_or(2);
        if k_max == 0 {
            return Err(LabError::config("k_max must be at least 1"));
        }
        let params = s
            .values
            .iter()
            .filter(|(k, _)| !RESERVED.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Ok(ExperimentConfig {
            kind,
            graph: opt("graph").map(str::to_string),
            c,
            seed: opt("seed").map(|v| parse_value("seed", v)).transpose()?.unwrap_or(0),
            reps,
            horizon: opt("horizon").map(|v| parse_value("horizon", v)).transpose()?,
            k_max,
            out: opt("out").map(PathBuf::from),
            workers,
            params,
        })
    }

    /// Canonical `key=value` lines covering everything that affects results
    /// (so `out` and `workers` are left out).
    pub fn canonical(&self) -> String {
        let mut lines = vec![
            format!("kind={}", self.kind),
            format!("graph={}", self.graph.as_deref().unwrap_or("")),
            format!("c={}", self.c),
            format!("seed={}", self.seed),
            format!("reps={}", self.reps),
            format!("horizon={}", self.horizon.map(|h| h.to_string()).unwrap_or_default()),
            format!("k_max={}", self.k_max),
        ];
        lines.extend(self.params.iter().map(|(k, v)| format!("{k}={v}")));
        lines.join("\n") + "\n"
    }

    /// SHA-256 of [`Self::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn param<T: FromStr>(&self, key: &str, default: T) -> LabResult<T> {
        match self.params.get(key) {
            Some(raw) => parse_value(key, raw),
            None => Ok(default),
        }
    }

    pub fn param_str(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// Comma-separated list parameter.
    pub fn param_list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> LabResult<Vec<T>> {
        match self.params.get(key) {
            Some(raw) => parse_list(key, raw),
            None => Ok(default.to_vec()),
        }
    }

    /// Rejects experiment parameters the kind does not understand.
    pub fn check_params(&self, allowed: &[&str]) -> LabResult<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(LabError::config(format!(
                "{} does not accept parameter {k:?} (accepted: {})",
                self.kind,
                if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
            ))),
            None => Ok(()),
        }
    }
}

pub fn parse_list<T: FromStr>(key: &str, raw: &str) -> LabResult<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}
