use serde::Serialize;

use super::kernel::TransitionKernel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalForms {
    pub l2_norm_sq: f64,
    pub variance: f64,
    pub dirichlet: f64,
    pub entropy: f64,
}

fn check(kernel: &TransitionKernel, pi: &[f64], f: &[f64]) -> Result<()> {
    if pi.len() != kernel.n_states() || f.len() != kernel.n_states() {
        return Err(Error::invalid("vector lengths do not match the kernel"));
    }
    Ok(())
}

/// `‖f‖²_{2,π}`.
pub fn l2_norm_sq(pi: &[f64], f: &[f64]) -> f64 {
    f.iter().zip(pi).map(|(x, p)| x * x * p).sum()
}

/// `½ Σ_{x,y} |f(x) − f(y)|² π(x) π(y)`, evaluated as `E[f²] − E[f]²`.
pub fn variance(pi: &[f64], f: &[f64]) -> f64 {
    let mean: f64 = f.iter().zip(pi).map(|(x, p)| x * p).sum();
    (l2_norm_sq(pi, f) - mean * mean).max(0.0)
}

/// `½ Σ_{x,y} |f(x) − f(y)|² P(x,y) π(x)`.
pub fn dirichlet_form(kernel: &TransitionKernel, pi: &[f64], f: &[f64]) -> f64 {
    0.5 * (0..kernel.n_states())
        .map(|x| pi[x] * kernel.row(x).map(|(y, p)| (f[x] - f[y]).powi(2) * p).sum::<f64>())
        .sum::<f64>()
}

/// `Σ_x |f(x)|² log(f(x)² / ‖f‖²) π(x)`, with `0 log 0 = 0`.
pub fn entropy_form(pi: &[f64], f: &[f64]) -> Result<f64> {
    let norm = l2_norm_sq(pi, f);
    if norm == 0.0 {
        return Err(Error::invalid("entropy form is undefined for f = 0"));
    }
    Ok(f.iter()
        .zip(pi)
        .filter(|(x, _)| **x != 0.0)
        .map(|(x, p)| x * x * (x * x / norm).ln() * p)
        .sum::<f64>()
        .max(0.0))
}

/// All four functionals of `f`; fails when `f` vanishes on the support of π.
pub fn functional_forms(kernel: &TransitionKernel, pi: &[f64], f: &[f64]) -> Result<FunctionalForms> {
    check(kernel, pi, f)?;
    Ok(FunctionalForms {
        l2_norm_sq: l2_norm_sq(pi, f),
        variance: variance(pi, f),
        dirichlet: dirichlet_form(kernel, pi, f),
        entropy: entropy_form(pi, f)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn two_state(q: f64) -> TransitionKernel {
        TransitionKernel::from_rows(vec![vec![(0, 1.0 - q), (1, q)], vec![(0, q), (1, 1.0 - q)]]).unwrap()
    }

    fn variance_double_sum(pi: &[f64], f: &[f64]) -> f64 {
        let mut s = 0.0;
        for x in 0..f.len() {
            for y in 0..f.len() {
                s += (f[x] - f[y]).powi(2) * pi[x] * pi[y];
            }
        }
        0.5 * s
    }

    #[test]
    fn two_state_values() {
        let q = 0.3;
        let f = [0.0, 1.0];
        let pi = [0.5, 0.5];
        let forms = functional_forms(&two_state(q), &pi, &f).unwrap();
        assert!((forms.dirichlet - q / 2.0).abs() < 1e-15);
        assert!((forms.variance - 0.25).abs() < 1e-15);
        assert_eq!(forms.l2_norm_sq, 0.5);
        // f² / ‖f‖² = 2 on the second state
        assert!((forms.entropy - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn constant_functions_vanish() {
        let forms = functional_forms(&two_state(0.2), &[0.5, 0.5], &[3.0, 3.0]).unwrap();
        assert_eq!(forms.variance, 0.0);
        assert_eq!(forms.dirichlet, 0.0);
        assert!(forms.entropy.abs() < 1e-15);
    }

    #[test]
    fn zero_function_entropy_is_an_error() {
        assert!(matches!(
            functional_forms(&two_state(0.2), &[0.5, 0.5], &[0.0, 0.0]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn forms_are_nonnegative() {
        let rows = (0..6)
            .map(|i| vec![(i, 0.4), ((i + 1) % 6, 0.3), ((i + 5) % 6, 0.3)])
            .collect();
        let k = TransitionKernel::from_rows(rows).unwrap();
        let pi = vec![1.0 / 6.0; 6];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let f: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
            let forms = functional_forms(&k, &pi, &f).unwrap();
            assert!(forms.dirichlet >= 0.0 && forms.variance >= 0.0 && forms.entropy >= 0.0);
            assert!((forms.variance - variance_double_sum(&pi, &f)).abs() < 1e-12);
        }
    }
}
