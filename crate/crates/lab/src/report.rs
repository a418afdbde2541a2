//! CSV reports with a `#`-prefixed metadata header.
//!
//! ```text
//! # tool=kcip-lab
//! # version=0.1.0
//! # schema=1
//! # kind=drift-curve
//! # config_hash=…
//! # seed=7
//! # generator=chacha8
//! t,mean,stderr
//! 0,25,0
//! ```
//!
//! Censored values are written as empty fields next to a `censored` column.

use std::io::{BufRead, Write};

use kcip_core::rng::GENERATOR_NAME;

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

pub const SCHEMA: &str = "1";
pub const TOOL: &str = "kcip-lab";

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig, header: &[&str]) -> Self {
        let meta = [
            ("tool", TOOL.to_string()),
            ("version", env!("CARGO_PKG_VERSION").to_string()),
            ("schema", SCHEMA.to_string()),
            ("kind", cfg.kind.to_string()),
            ("config_hash", cfg.hash()),
            ("seed", cfg.seed.to_string()),
            ("generator", GENERATOR_NAME.to_string()),
        ];
        Report {
            meta: meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(cfg: &ExperimentConfig, header: Vec<String>) -> Self {
        let mut r = Report::new(cfg, &[]);
        r.header = header;
        r
    }

    /// Adds a derived summary value to the metadata block.
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> LabResult<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> LabResult<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    /// Parses a report, requiring `schema=1`.
    pub fn read_from<R: BufRead>(input: R) -> LabResult<Self> {
        let mut meta = Vec::new();
        let mut body = String::new();
        let mut in_meta = true;
        for line in input.lines() {
            let line = line?;
            match line.strip_prefix('#') {
                Some(m) if in_meta => {
                    let (k, v) = m
                        .trim()
                        .split_once('=')
                        .ok_or_else(|| LabError::config(format!("bad metadata line {line:?}")))?;
                    meta.push((k.to_string(), v.to_string()));
                }
                _ => {
                    in_meta = false;
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        match meta.iter().find(|(k, _)| k == "schema") {
            Some((_, v)) if v == SCHEMA => {}
            Some((_, v)) => return Err(LabError::config(format!("unsupported schema {v}"))),
            None => return Err(LabError::config("report has no schema field")),
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Report { meta, header, rows })
    }
}

/// Shortest round-trip form, switching to exponent notation for very large
/// or small magnitudes.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_int(x: Option<u64>) -> String {
    x.map(|t| t.to_string()).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Kind, Settings};

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::from_settings(Kind::Collisions, &Settings::parse("seed=3").unwrap()).unwrap()
    }

    #[test]
    fn round_trip() {
        let mut r = Report::new(&cfg(), &["run_id", "tau_col", "censored"]);
        r.note("mean", float(0.1 + 0.2));
        r.push(vec!["0".into(), opt_int(Some(12)), flag(false)]);
        r.push(vec!["1".into(), opt_int(None), flag(true)]);
        let bytes = r.to_bytes().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("# schema=1\n") && text.contains("1,,1\n"));
        let back = Report::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.meta("mean").unwrap().parse::<f64>().unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn schema_is_enforced() {
        assert!(Report::read_from("# schema=2\na\n1\n".as_bytes()).is_err());
        assert!(Report::read_from("a\n1\n".as_bytes()).is_err());
    }
}
