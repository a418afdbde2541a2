use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kcip::{Density, KcipChain, SpinConfig};
use crate::rng::replicate_rng;
use crate::stats::mean_stderr;

/// One-step rates of the particle count started from a single particle
/// on an `m`-regular triangle-free graph, while `V ≤ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleRates {
    /// `1 → 2`: a neighbour of the lone particle flips up, `cm/n²`.
    pub grow: f64,
    /// `2 → 1`: either particle of the pair flips down, `(2/n)(1 − c/n)`.
    pub shrink: f64,
    /// `2 → 3`: one of the `2(m − 1)` outer neighbours flips up, `2c(m − 1)/n²`.
    pub triple: f64,
}

impl TripleRates {
    pub fn new(n: u64, c: f64, m: u64) -> Result<Self> {
        if m <= 1 {
            return Err(Error::invalid(format!("degree m = {m} must exceed 1")));
        }
        let nf = n as f64;
        if !(c > 0.0) || nf <= c {
            return Err(Error::invalid(format!("need 0 < c < n, got c = {c}, n = {n}")));
        }
        let mf = m as f64;
        let rates = TripleRates {
            grow: c * mf / (nf * nf),
            shrink: 2.0 / nf * (1.0 - c / nf),
            triple: 2.0 * c * (mf - 1.0) / (nf * nf),
        };
        if rates.grow > 1.0 || rates.shrink + rates.triple > 1.0 {
            return Err(Error::invalid(format!("rates exceed 1 for n = {n}, c = {c}, m = {m}")));
        }
        Ok(rates)
    }

    /// Transition matrix on `V ∈ {1, 2, ≥3}` with `≥3` absorbing.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [1.0 - self.grow, self.grow, 0.0],
            [self.shrink, 1.0 - self.shrink - self.triple, self.triple],
            [0.0, 0.0, 1.0],
        ]
    }
}

pub fn small_matrix(n: u64, c: f64, m: u64) -> Result<[[f64; 3]; 3]> {
    Ok(TripleRates::new(n, c, m)?.matrix())
}

/// `(E_1[ζ_triple], E_2[ζ_triple])`, from
/// `E_1 = 1/grow + E_2` and `(shrink + triple) E_2 = 1 + shrink E_1`.
pub fn triple_times(n: u64, c: f64, m: u64) -> Result<(f64, f64)> {
    let r = TripleRates::new(n, c, m)?;
    // (I − Q) over the transient states {1, 2}
    let (a11, a12, a21, a22) = (r.grow, -r.grow, -r.shrink, r.shrink + r.triple);
    let det = a11 * a22 - a12 * a21;
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::numeric("degenerate triple-time system", det));
    }
    Ok(((a22 - a12) / det, (a11 - a21) / det))
}

pub fn triple_time_exact(n: u64, c: f64, m: u64) -> Result<f64> {
    Ok(triple_times(n, c, m)?.0)
}

/// Leading-order value `n³/(c² m (m − 1))`.
pub fn triple_time_asymptote(n: u64, c: f64, m: u64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    nf.powi(3) / (c * c * mf * (mf - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleSamples {
    pub mean: f64,
    pub stderr: f64,
    /// Per replicate; `None` when `V < 3` throughout the cutoff.
    pub samples: Vec<Option<u64>>,
    pub censored: usize,
}

/// First time `V_t ≥ 3` from a single particle at vertex 0, or `None` if
/// not reached within `cutoff` steps.
pub fn triple_time_sample(g: &Graph, density: Density, seed: u64, replicate: u64, cutoff: u64) -> Option<u64> {
    let mut chain = KcipChain::with_rng(g, SpinConfig::from_vertices(g.n(), [0]), density, replicate_rng(seed, replicate));
    while chain.time() < cutoff {
        chain.step();
        if chain.state().count() >= 3 {
            return Some(chain.time());
        }
    }
    None
}

/// Monte Carlo `ζ_triple` over `reps` replicates. The mean and standard
/// error cover uncensored samples only.
pub fn triple_time_mc(g: &Graph, c: f64, seed: u64, reps: u64, cutoff: u64) -> Result<TripleSamples> {
    if reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    let density = Density::for_graph(c, g)?;
    let samples: Vec<Option<u64>> = (0..reps)
        .into_par_iter()
        .map(|r| triple_time_sample(g, density, seed, r, cutoff))
        .collect();
    let done: Vec<f64> = samples.iter().flatten().map(|&t| t as f64).collect();
    let (mean, stderr) = if done.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        mean_stderr(&done)
    };
    Ok(TripleSamples {
        mean,
        stderr,
        censored: samples.len() - done.len(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_stochastic() {
        for (n, c, m) in [(10, 1.0, 2), (100, 2.0, 6), (1000, 0.5, 4), (9, 3.0, 4)] {
            for row in small_matrix(n, c, m).unwrap() {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
                assert!(row.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn c8_value() {
        // grow = 1/32, shrink = 7/32, triple = 1/32: E_1 = (8 + 1) * 32
        assert!((triple_time_exact(8, 1.0, 2).unwrap() - 288.0).abs() < 1e-9);
    }

    #[test]
    fn first_step_analysis() {
        let (n, c, m) = (50, 1.5, 4);
        let r = TripleRates::new(n, c, m).unwrap();
        let (e1, e2) = triple_times(n, c, m).unwrap();
        assert!((e1 - (1.0 / r.grow + e2)).abs() < 1e-9 * e1);
        assert!(((r.shrink + r.triple) * e2 - (1.0 + r.shrink * e1)).abs() < 1e-9 * e1);
    }

    #[test]
    fn invalid_inputs() {
        assert!(triple_time_exact(10, 1.0, 1).is_err());
        assert!(triple_time_exact(2, 2.0, 2).is_err());
        assert!(triple_time_exact(10, 0.0, 2).is_err());
    }

    #[test]
    fn sample_replay_is_deterministic() {
        let g = Graph::cycle(8).unwrap();
        let a = triple_time_mc(&g, 1.0, 17, 1, 1_000_000).unwrap();
        let b = triple_time_mc(&g, 1.0, 17, 1, 1_000_000).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.stderr, 0.0);
    }

    #[test]
    fn hitting_definition_on_torus() {
        let g = Graph::torus(4, 2).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        for r in 0..20 {
            let t = triple_time_sample(&g, d, 3, r, 10_000_000).unwrap();
            let mut chain = KcipChain::with_rng(&g, SpinConfig::from_vertices(16, [0]), d, replicate_rng(3, r));
            for _ in 0..t - 1 {
                chain.step();
                assert!((1..=2).contains(&chain.state().count()));
            }
            chain.step();
            assert_eq!(chain.state().count(), 3);
        }
    }
}
