use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on row sums for kernels built from exact transition rules.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Maximum-norm residual accepted from a stationary solve.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Largest state space solved with dense factorization.
pub const DENSE_CAP: usize = 4096;

/// Sparse row-stochastic matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    stationary: OnceLock<Vec<f64>>,
}

impl PartialEq for TransitionKernel {
    fn eq(&self, other: &Self) -> bool {
        self.row_ptr == other.row_ptr && self.cols == other.cols && self.vals == other.vals
    }
}

impl TransitionKernel {
    /// Builds from per-row `(column, probability)` lists. Duplicate columns
    /// are summed and exact zeros dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        Self::from_rows_with_tolerance(rows, ROW_SUM_TOL)
    }

    pub fn from_rows_with_tolerance(rows: Vec<Vec<(usize, f64)>>, tol: f64) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable_by_key(|&(j, _)| j);
            let mut sum = 0.0;
            let start = cols.len();
            for (j, p) in row {
                if j >= n {
                    return Err(Error::invalid(format!("row {i} has column {j} >= {n}")));
                }
                if !(p >= 0.0) {
                    return Err(Error::invalid(format!("entry ({i},{j}) = {p} is negative")));
                }
                sum += p;
                if p == 0.0 {
                    continue;
                }
                if cols.len() > start && *cols.last().unwrap() as usize == j {
                    *vals.last_mut().unwrap() += p;
                } else {
                    cols.push(j as u32);
                    vals.push(p);
                }
            }
            if (sum - 1.0).abs() > tol {
                return Err(Error::numeric(format!("row {i} sums to {sum}"), (sum - 1.0).abs()));
            }
            row_ptr.push(cols.len());
        }
        Ok(TransitionKernel {
            row_ptr,
            cols,
            vals,
            stationary: OnceLock::new(),
        })
    }

    pub fn from_dense(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid("kernel matrix must be square"));
        }
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| (j, m[(i, j)])).filter(|&(_, p)| p != 0.0).collect())
            .collect();
        Self::from_rows_with_tolerance(rows, tol)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows((0..n).map(|i| vec![(i, 1.0)]).collect()).expect("identity is stochastic")
    }

    /// Attaches a known stationary vector, skipping the solve.
    pub fn with_stationary(self, pi: Vec<f64>) -> Self {
        assert_eq!(pi.len(), self.n_states());
        let k = TransitionKernel {
            stationary: OnceLock::new(),
            ..self
        };
        let _ = k.stationary.set(pi);
        k
    }

    pub fn n_states(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().map(|&j| j as usize).zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(pos) => self.vals[r.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n_states();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, p) in self.row(i) {
                m[(i, j)] = p;
            }
        }
        m
    }

    /// `out = mu P`.
    pub fn left_multiply_into(&self, mu: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (j, p) in self.row(i) {
                out[j] += m * p;
            }
        }
    }

    pub fn left_multiply(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states()];
        self.left_multiply_into(mu, &mut out);
        out
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.n_states())
            .map(|i| (self.row(i).map(|(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|π(x)P(x,y) − π(y)P(y,x)|` over all pairs.
    pub fn detailed_balance_violation(&self, pi: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n_states() {
            for (j, p) in self.row(i) {
                worst = worst.max((pi[i] * p - pi[j] * self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Stationary distribution, solved once and cached.
    pub fn stationary(&self) -> Result<&[f64]> {
        if let Some(pi) = self.stationary.get() {
            return Ok(pi);
        }
        let pi = stationary_solve(self)?;
        Ok(self.stationary.get_or_init(|| pi))
    }

    /// Max-norm of `πP − π`.
    pub fn stationary_residual(&self, pi: &[f64]) -> f64 {
        self.left_multiply(pi)
            .iter()
            .zip(pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Iteration limits for the sparse stationary solver.
#[derive(Debug, Clone, Copy)]
pub struct StationaryOptions {
    pub dense_cap: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            dense_cap: DENSE_CAP,
            max_iterations: 1_000_000,
            tolerance: STATIONARY_TOL,
        }
    }
}

/// Left fixed point of an irreducible kernel with default options.
pub fn stationary_solve(kernel: &TransitionKernel) -> Result<Vec<f64>> {
    stationary_solve_with(kernel, StationaryOptions::default())
}

/// Dense LU on `(Pᵀ − I)π = 0, Σπ = 1` up to `dense_cap` states, lazy power
/// iteration above it.
pub fn stationary_solve_with(kernel: &TransitionKernel, opts: StationaryOptions) -> Result<Vec<f64>> {
    let n = kernel.n_states();
    if n == 0 {
        return Err(Error::invalid("empty kernel"));
    }
    let mut pi = if n <= opts.dense_cap {
        let mut a = kernel.to_dense().transpose();
        for i in 0..n {
            a[(i, i)] -= 1.0;
        }
        a.row_mut(n - 1).fill(1.0);
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::numeric("singular system: kernel is not irreducible", f64::INFINITY))?;
        x.iter().copied().collect::<Vec<f64>>()
    } else {
        let mut pi = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for _ in 0..opts.max_iterations {
            kernel.left_multiply_into(&pi, &mut next);
            residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            for (p, q) in pi.iter_mut().zip(&next) {
                *p = 0.5 * (*p + q);
            }
            if residual <= opts.tolerance * 0.5 {
                break;
            }
        }
        if residual > opts.tolerance * 0.5 {
            return Err(Error::numeric("power iteration did not converge", residual));
        }
        pi
    };
    for p in pi.iter_mut() {
        if *p < 0.0 && *p > -opts.tolerance {
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let residual = kernel.stationary_residual(&pi);
    if residual > opts.tolerance || pi.iter().any(|&p| p < 0.0) {
        return Err(Error::numeric("stationary residual above tolerance", residual));
    }
    Ok(pi)
}
