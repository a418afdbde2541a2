use std::io::{BufRead, Write};

use super::kernel::TransitionKernel;
use crate::error::{Error, Result};

/// Writes `states=<N>` followed by one `i j p` line per nonzero entry.
pub fn write_kernel<W: Write>(kernel: &TransitionKernel, mut out: W) -> std::io::Result<()> {
    writeln!(out, "states={}", kernel.n_states())?;
    for i in 0..kernel.n_states() {
        for (j, p) in kernel.row(i) {
            writeln!(out, "{i} {j} {p:e}")?;
        }
    }
    Ok(())
}

pub fn read_kernel<R: BufRead>(input: R) -> Result<TransitionKernel> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::invalid(e.to_string()))?
        .ok_or_else(|| Error::invalid("empty kernel file"))?;
    let n: usize = header
        .trim()
        .strip_prefix("states=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::invalid(format!("bad kernel header {header:?}")))?;
    let mut rows = vec![Vec::new(); n];
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::invalid(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::invalid(format!("line {}: expected `i j p`, got {line:?}", lineno + 2));
        let mut parts = line.split_whitespace();
        let i: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let j: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let p: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() || i >= n {
            return Err(bad());
        }
        rows[i].push((j, p));
    }
    TransitionKernel::from_rows(rows)
}

/// Probability vector as CSV with columns `state,probability`.
pub fn write_distribution<W: Write>(pi: &[f64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "state,probability")?;
    for (i, p) in pi.iter().enumerate() {
        writeln!(out, "{i},{p:e}")?;
    }
    Ok(())
}

pub fn read_distribution<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut pi = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::invalid(e.to_string()))?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = || Error::invalid(format!("line {}: bad distribution row {line:?}", lineno + 1));
        let (i, p) = line.split_once(',').ok_or_else(bad)?;
        if i.trim().parse::<usize>().ok() != Some(pi.len()) {
            return Err(bad());
        }
        pi.push(p.trim().parse::<f64>().map_err(|_| bad())?);
    }
    Ok(pi)
}
