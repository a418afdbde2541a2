use nalgebra::DMatrix;

use super::kernel::{TransitionKernel, DENSE_CAP};
use crate::error::{Error, Result};

/// Row-sum tolerance for trace kernels, which go through a linear solve.
pub const TRACE_ROW_TOL: f64 = 1e-10;

/// Kernel of the chain watched only while it is in `subset`:
/// `P_AA + P_AB (I − P_BB)⁻¹ P_BA`.
///
/// `subset` lists state ordinals; the result is indexed by position in
/// `subset`. The complement is eliminated with a dense LU when it has at
/// most [`DENSE_CAP`] states and by fixed-point iteration otherwise.
pub fn trace_kernel(kernel: &TransitionKernel, subset: &[usize]) -> Result<TransitionKernel> {
    let n = kernel.n_states();
    if subset.is_empty() {
        return Err(Error::invalid("trace subset is empty"));
    }
    // position of each state in A or B
    let mut slot: Vec<Option<(bool, usize)>> = vec![None; n];
    for (a, &s) in subset.iter().enumerate() {
        if s >= n {
            return Err(Error::invalid(format!("state {s} out of range")));
        }
        if slot[s].replace((true, a)).is_some() {
            return Err(Error::invalid(format!("state {s} repeated in subset")));
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&s| slot[s].is_none()).collect();
    for (b, &s) in rest.iter().enumerate() {
        slot[s] = Some((false, b));
    }
    let (na, nb) = (subset.len(), rest.len());
    let mut out = DMatrix::<f64>::zeros(na, na);
    for (a, &s) in subset.iter().enumerate() {
        for (j, p) in kernel.row(s) {
            if let Some((true, a2)) = slot[j] {
                out[(a, a2)] += p;
            }
        }
    }
    if nb > 0 {
        let mut p_ba = DMatrix::<f64>::zeros(nb, na);
        for (b, &s) in rest.iter().enumerate() {
            for (j, p) in kernel.row(s) {
                if let Some((true, a)) = slot[j] {
                    p_ba[(b, a)] += p;
                }
            }
        }
        // absorption probabilities X = (I − P_BB)⁻¹ P_BA
        let x = if nb <= DENSE_CAP {
            let mut m = DMatrix::<f64>::identity(nb, nb);
            for (b, &s) in rest.iter().enumerate() {
                for (j, p) in kernel.row(s) {
                    if let Some((false, b2)) = slot[j] {
                        m[(b, b2)] -= p;
                    }
                }
            }
            m.lu()
                .solve(&p_ba)
                .ok_or_else(|| Error::numeric("I - P_BB is singular; complement has an absorbing class", f64::INFINITY))?
        } else {
            iterate_absorption(kernel, &rest, &slot, &p_ba)?
        };
        for (a, &s) in subset.iter().enumerate() {
            for (j, p) in kernel.row(s) {
                if let Some((false, b)) = slot[j] {
                    for a2 in 0..na {
                        out[(a, a2)] += p * x[(b, a2)];
                    }
                }
            }
        }
    }
    for v in out.iter_mut() {
        if *v < 0.0 && *v > -TRACE_ROW_TOL {
            *v = 0.0;
        }
    }
    TransitionKernel::from_dense(&out, TRACE_ROW_TOL)
}

fn iterate_absorption(
    kernel: &TransitionKernel,
    rest: &[usize],
    slot: &[Option<(bool, usize)>],
    p_ba: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    const MAX_SWEEPS: usize = 1_000_000;
    let nb = rest.len();
    let mut x = p_ba.clone();
    // Gauss-Seidel on X = P_BA + P_BB X; each row of X sums to at most 1.
    for _ in 0..MAX_SWEEPS {
        let mut change = 0.0f64;
        for b in 0..nb {
            let mut row = p_ba.row(b).into_owned();
            for (j, p) in kernel.row(rest[b]) {
                if let Some((false, b2)) = slot[j] {
                    if b2 != b {
                        row += p * x.row(b2);
                    }
                }
            }
            let stay = match slot[rest[b]] {
                Some((false, _)) => kernel.get(rest[b], rest[b]),
                _ => 0.0,
            };
            if stay >= 1.0 {
                return Err(Error::numeric("absorbing state outside the trace subset", f64::INFINITY));
            }
            row /= 1.0 - stay;
            change = change.max((&row - x.row(b)).abs().max());
            x.set_row(b, &row);
        }
        if change < 1e-15 {
            return Ok(x);
        }
    }
    Err(Error::numeric("absorption iteration did not converge", f64::NAN))
}
