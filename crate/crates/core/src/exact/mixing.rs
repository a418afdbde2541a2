use rayon::prelude::*;
use serde::Serialize;

use super::kernel::TransitionKernel;
use crate::error::{Error, Result};

/// Slack allowed before a rise in the worst-start distance counts as a
/// violation of monotonicity.
const MONOTONE_SLACK: f64 = 1e-12;

/// Total-variation distance, computed as half the L1 distance.
pub fn tv_distance(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::invalid(format!(
            "distributions have different lengths {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    Ok(0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Worst-start distances `d(0), d(1), ...` and the first `t` with `d(t) < ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingProfile {
    pub epsilon: f64,
    pub tau: usize,
    pub distances: Vec<f64>,
}

/// Scans `t = 0, 1, ...` until `max_x TV(δ_x P^t, π) < ε`, failing with a
/// horizon error if that does not happen by `horizon`.
pub fn mixing_profile(kernel: &TransitionKernel, pi: &[f64], epsilon: f64, horizon: usize) -> Result<MixingProfile> {
    let n = kernel.n_states();
    if pi.len() != n {
        return Err(Error::invalid("stationary vector length does not match kernel"));
    }
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            let mut r = vec![0.0; n];
            r[x] = 1.0;
            r
        })
        .collect();
    let mut scratch: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
    let worst = |rows: &[Vec<f64>]| -> f64 {
        rows.par_iter()
            .map(|r| 0.5 * r.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .reduce(|| 0.0, f64::max)
    };
    let mut distances = vec![worst(&rows)];
    loop {
        let t = distances.len() - 1;
        let d = distances[t];
        if d < epsilon {
            return Ok(MixingProfile {
                epsilon,
                tau: t,
                distances,
            });
        }
        if t >= horizon {
            return Err(Error::Horizon { horizon, distance: d });
        }
        rows.par_iter()
            .zip(scratch.par_iter_mut())
            .for_each(|(r, out)| kernel.left_multiply_into(r, out));
        std::mem::swap(&mut rows, &mut scratch);
        let next = worst(&rows);
        if next > d + MONOTONE_SLACK {
            return Err(Error::numeric(
                format!("worst-start distance rose at t={}: {d} -> {next}", t + 1),
                next - d,
            ));
        }
        distances.push(next);
    }
}

/// `δ_start P^t`.
pub fn distribution_at(kernel: &TransitionKernel, start: usize, t: usize) -> Vec<f64> {
    let n = kernel.n_states();
    let mut mu = vec![0.0; n];
    mu[start] = 1.0;
    let mut next = vec![0.0; n];
    for _ in 0..t {
        kernel.left_multiply_into(&mu, &mut next);
        std::mem::swap(&mut mu, &mut next);
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subsets_sup(mu: &[f64], nu: &[f64]) -> f64 {
        (0u32..1 << mu.len())
            .map(|a| (0..mu.len()).filter(|i| a >> i & 1 == 1).map(|i| mu[i] - nu[i]).sum::<f64>())
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let (mu, nu) = ([0.5, 0.5, 0.0], [0.0, 0.5, 0.5]);
        assert_eq!(subsets_sup(&mu, &nu), 0.5);
        assert_eq!(tv_distance(&mu, &nu).unwrap(), 0.5);
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn large_epsilon_is_immediate() {
        let k = TransitionKernel::from_rows(vec![vec![(0, 0.9), (1, 0.1)], vec![(0, 0.1), (1, 0.9)]]).unwrap();
        let prof = mixing_profile(&k, &[0.5, 0.5], 1.0, 0).unwrap();
        assert_eq!(prof.tau, 0);
    }

    #[test]
    fn two_state_decay_and_horizon() {
        let k = TransitionKernel::from_rows(vec![vec![(0, 0.9), (1, 0.1)], vec![(0, 0.1), (1, 0.9)]]).unwrap();
        // d(t) = 0.5 * 0.8^t
        let prof = mixing_profile(&k, &[0.5, 0.5], 0.25, 100).unwrap();
        assert_eq!(prof.tau, 4);
        for (t, d) in prof.distances.iter().enumerate() {
            assert!((d - 0.5 * 0.8f64.powi(t as i32)).abs() < 1e-15);
        }
        assert!(matches!(
            mixing_profile(&k, &[0.5, 0.5], 1e-6, 10),
            Err(Error::Horizon { horizon: 10, .. })
        ));
    }
}
