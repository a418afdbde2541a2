use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use super::functional::{dirichlet_form, entropy_form, l2_norm_sq};
use super::kernel::{TransitionKernel, DENSE_CAP};
use crate::error::{Error, Result};
use crate::rng::replicate_rng;

/// Detailed-balance slack accepted as reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-10;
/// Largest state space handed to the log-Sobolev minimization by default.
pub const LOG_SOBOLEV_CAP: usize = 64;

fn symmetrized(kernel: &TransitionKernel, pi: &[f64]) -> Result<DMatrix<f64>> {
    let n = kernel.n_states();
    if n > DENSE_CAP {
        return Err(Error::size("states for dense eigendecomposition", n, DENSE_CAP));
    }
    let violation = kernel.detailed_balance_violation(pi);
    if violation > REVERSIBILITY_TOL {
        return Err(Error::invalid(format!(
            "kernel is not reversible: detailed balance violated by {violation:e}"
        )));
    }
    if pi.iter().any(|&p| p <= 0.0) {
        return Err(Error::invalid("stationary distribution must be strictly positive"));
    }
    let sq: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for (j, p) in kernel.row(i) {
            s[(i, j)] = sq[i] * p / sq[j];
        }
    }
    // average away rounding asymmetry
    Ok((&s + s.transpose()) * 0.5)
}

/// Eigenvalues (descending) and eigenvectors of `D^{1/2} P D^{-1/2}`.
fn eigen(kernel: &TransitionKernel, pi: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(symmetrized(kernel, pi)?);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    Ok((values, vectors))
}

/// `1 − λ₂` for a reversible kernel, using its stationary distribution.
pub fn spectral_gap(kernel: &TransitionKernel) -> Result<f64> {
    let pi = kernel.stationary()?;
    if kernel.n_states() < 2 {
        return Err(Error::invalid("spectral gap needs at least two states"));
    }
    let (values, _) = eigen(kernel, pi)?;
    Ok(1.0 - values[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSobolevConfig {
    pub starts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub max_states: usize,
}

impl Default for LogSobolevConfig {
    fn default() -> Self {
        LogSobolevConfig {
            starts: 32,
            max_iterations: 2000,
            tolerance: 1e-10,
            seed: 0,
            max_states: LOG_SOBOLEV_CAP,
        }
    }
}

/// Smallest ratio `E(f,f)/L(f)` found. This is an upper bound on α, not a
/// certified value; `converged` is false if any start hit the iteration
/// limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogSobolevEstimate {
    pub alpha_upper: f64,
    pub converged: bool,
    pub iterations: usize,
    pub config: LogSobolevConfig,
}

fn ratio(kernel: &TransitionKernel, pi: &[f64], f: &[f64]) -> Option<f64> {
    let ent = entropy_form(pi, f).ok()?;
    (ent > 1e-14).then(|| dirichlet_form(kernel, pi, f) / ent)
}

fn gradient(kernel: &TransitionKernel, pi: &[f64], f: &[f64], value: f64) -> Vec<f64> {
    let norm = l2_norm_sq(pi, f);
    let ent = entropy_form(pi, f).unwrap_or(0.0);
    (0..f.len())
        .map(|x| {
            let de = 2.0 * pi[x] * kernel.row(x).map(|(y, p)| (f[x] - f[y]) * p).sum::<f64>();
            let dl = if f[x] > 0.0 {
                2.0 * f[x] * pi[x] * (f[x] * f[x] / norm).ln()
            } else {
                0.0
            };
            (de - value * dl) / ent
        })
        .collect()
}

fn normalize(pi: &[f64], f: &mut [f64]) -> bool {
    let norm = l2_norm_sq(pi, f).sqrt();
    if !(norm > 0.0) {
        return false;
    }
    f.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Projected gradient descent from one start; returns the best ratio
/// reached, the iteration count, and whether it stopped on tolerance.
fn descend(kernel: &TransitionKernel, pi: &[f64], mut f: Vec<f64>, cfg: &LogSobolevConfig) -> Option<(f64, usize, bool)> {
    if !normalize(pi, &mut f) {
        return None;
    }
    let mut value = ratio(kernel, pi, &f)?;
    let mut step = 1.0;
    for it in 0..cfg.max_iterations {
        let grad = gradient(kernel, pi, &f, value);
        let mut improved = false;
        while step > 1e-14 {
            let mut trial: Vec<f64> = f.iter().zip(&grad).map(|(a, g)| (a - step * g).max(0.0)).collect();
            if normalize(pi, &mut trial) {
                if let Some(v) = ratio(kernel, pi, &trial) {
                    if v < value {
                        let gain = value - v;
                        f = trial;
                        value = v;
                        step *= 2.0;
                        improved = true;
                        if gain <= cfg.tolerance * value.max(1e-300) {
                            return Some((value, it + 1, true));
                        }
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !improved {
            return Some((value, it + 1, true));
        }
    }
    Some((value, cfg.max_iterations, false))
}

/// Multi-start estimate of the log-Sobolev constant of a reversible kernel.
///
/// Half the starts perturb the constant function along the second
/// eigenvector, where the ratio tends to `gap/2`; the rest are random
/// nonnegative vectors.
pub fn log_sobolev_estimate(kernel: &TransitionKernel, pi: &[f64], cfg: LogSobolevConfig) -> Result<LogSobolevEstimate> {
    let n = kernel.n_states();
    if n > cfg.max_states {
        return Err(Error::size("states for log-Sobolev minimization", n, cfg.max_states));
    }
    if pi.len() != n || n < 2 {
        return Err(Error::invalid("log-Sobolev estimate needs a stationary vector over at least two states"));
    }
    if cfg.starts == 0 {
        return Err(Error::invalid("log-Sobolev estimate needs at least one start"));
    }
    let (_, vectors) = eigen(kernel, pi)?;
    let v2: DVector<f64> = vectors.column(1).component_div(&DVector::from_iterator(n, pi.iter().map(|p| p.sqrt())));
    let scale = v2.amax().max(1e-300);
    let mut best = f64::INFINITY;
    let mut converged = true;
    let mut iterations = 0;
    for s in 0..cfg.starts {
        let f: Vec<f64> = if s % 2 == 0 {
            let eps = 10f64.powi(-1 - ((s / 2) % 4) as i32) / scale;
            v2.iter().map(|v| 1.0 + eps * v).collect()
        } else {
            let mut rng = replicate_rng(cfg.seed, s as u64);
            (0..n).map(|_| rng.random::<f64>()).collect()
        };
        if let Some((value, its, ok)) = descend(kernel, pi, f, &cfg) {
            best = best.min(value);
            converged &= ok;
            iterations += its;
        }
    }
    if !best.is_finite() {
        return Err(Error::numeric("no start produced a nonconstant function", f64::NAN));
    }
    Ok(LogSobolevEstimate {
        alpha_upper: best,
        converged,
        iterations,
        config: cfg,
    })
}
