use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use super::{component_stats, components_of_set};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::kcip::SpinConfig;
use crate::rng;
use crate::stats::mean_stderr;

/// Largest component handled by the exact recursion by default.
pub const DEFAULT_EXACT_CAP: usize = 14;

/// Exact corrected component counts with a memo shared across calls.
///
/// `N_H` is the expected number of vertices left when vertices having a
/// neighbour in the current set are deleted uniformly at random until only
/// isolated vertices remain. It is additive over components, so each
/// component is evaluated on its own, keyed by its induced adjacency in
/// sorted-vertex order.
#[derive(Debug, Clone)]
pub struct CorrectedCounter {
    cap: usize,
    memo: HashMap<Vec<u32>, BigRational>,
}

impl Default for CorrectedCounter {
    fn default() -> Self {
        Self::new(DEFAULT_EXACT_CAP)
    }
}

impl CorrectedCounter {
    pub fn new(cap: usize) -> Self {
        assert!(cap <= 32, "exact cap is limited to 32 vertices per component");
        CorrectedCounter {
            cap,
            memo: HashMap::new(),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn exact(&mut self, g: &Graph, h: &[Vertex]) -> Result<BigRational> {
        validate_set(g, h)?;
        let comps = components_of_set(g, h);
        if let Some(big) = comps.iter().map(Vec::len).max().filter(|&m| m > self.cap) {
            return Err(Error::size("component of H", big, self.cap));
        }
        let mut total = BigRational::zero();
        for comp in comps {
            total += self.component(g, &comp);
        }
        Ok(total)
    }

    fn component(&mut self, g: &Graph, comp: &[Vertex]) -> BigRational {
        if comp.len() == 1 {
            return BigRational::one();
        }
        let adj: Vec<u32> = comp
            .iter()
            .map(|&v| {
                comp.iter()
                    .enumerate()
                    .filter(|&(_, &u)| g.has_edge(u, v))
                    .fold(0u32, |m, (j, _)| m | 1 << j)
            })
            .collect();
        if let Some(v) = self.memo.get(&adj) {
            return v.clone();
        }
        let full = if comp.len() == 32 { u32::MAX } else { (1u32 << comp.len()) - 1 };
        let mut sub = HashMap::new();
        let value = shrink(&adj, full, &mut sub);
        self.memo.insert(adj, value.clone());
        value
    }
}

fn shrink(adj: &[u32], mask: u32, memo: &mut HashMap<u32, BigRational>) -> BigRational {
    if let Some(v) = memo.get(&mask) {
        return v.clone();
    }
    let mut sum = BigRational::zero();
    let mut removable = 0u32;
    let mut bits = mask;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        if adj[i] & mask != 0 {
            removable += 1;
            sum += shrink(adj, mask & !(1 << i), memo);
        }
    }
    let value = if removable == 0 {
        BigRational::from_integer(BigInt::from(mask.count_ones()))
    } else {
        sum / BigRational::from_integer(BigInt::from(removable))
    };
    memo.insert(mask, value.clone());
    value
}

fn validate_set(g: &Graph, h: &[Vertex]) -> Result<()> {
    let mut seen = vec![false; g.n()];
    for &v in h {
        if v >= g.n() {
            return Err(Error::invalid(format!("vertex {v} out of range")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::invalid(format!("vertex {v} repeated in H")));
        }
    }
    Ok(())
}

/// `N_H` as an exact rational with the default component cap.
pub fn corrected_count_exact(g: &Graph, h: &[Vertex]) -> Result<BigRational> {
    CorrectedCounter::default().exact(g, h)
}

/// Monte Carlo estimate of `N_H` from `reps` runs of the deletion chain.
/// Returns the mean and its standard error.
pub fn corrected_count_mc(g: &Graph, h: &[Vertex], reps: u64, seed: u64) -> Result<(f64, f64)> {
    validate_set(g, h)?;
    if reps == 0 {
        return Err(Error::invalid("reps must be >= 1"));
    }
    let mut member = vec![false; g.n()];
    let samples: Vec<f64> = (0..reps)
        .map(|r| {
            let mut rng = rng::replicate_rng(seed, r);
            let mut alive: Vec<Vertex> = h.to_vec();
            for &v in &alive {
                member[v] = true;
            }
            loop {
                let candidates: Vec<usize> = (0..alive.len())
                    .filter(|&i| g.neighbors(alive[i]).iter().any(|&u| member[u]))
                    .collect();
                if candidates.is_empty() {
                    break;
                }
                let i = candidates[rng.random_range(0..candidates.len())];
                member[alive[i]] = false;
                alive.swap_remove(i);
            }
            for &v in &alive {
                member[v] = false;
            }
            alive.len() as f64
        })
        .collect();
    Ok(mean_stderr(&samples))
}

/// Corrected total `Ỹ = Σ_H N_H` over the components of the occupied subgraph.
pub fn corrected_total(g: &Graph, x: &SpinConfig) -> Result<BigRational> {
    let mut counter = CorrectedCounter::default();
    let mut total = BigRational::zero();
    for comp in component_stats(g, x).comps {
        total += counter.exact(g, &comp)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn small_shapes() {
        let g = Graph::torus(5, 2).unwrap();
        assert_eq!(corrected_count_exact(&g, &[0]).unwrap(), q(1, 1));
        assert_eq!(corrected_count_exact(&g, &[0, 1]).unwrap(), q(1, 1));
        assert_eq!(corrected_count_exact(&g, &[0, 1, 2]).unwrap(), q(4, 3));
        // star with 3 leaves around vertex 6
        assert_eq!(corrected_count_exact(&g, &[6, 5, 7, 1]).unwrap(), q(7, 4));
    }

    #[test]
    fn stars_follow_closed_form() {
        for k in 1..=8usize {
            let g = Graph::star(k).unwrap();
            let h: Vec<_> = (0..=k).collect();
            let expect = q(k as i64, 2) + q(1, k as i64 + 1);
            assert_eq!(corrected_count_exact(&g, &h).unwrap(), expect, "k={k}");
        }
    }

    #[test]
    fn disconnected_sets_add() {
        let g = Graph::cycle(10).unwrap();
        assert_eq!(corrected_count_exact(&g, &[0, 1, 2, 5, 7]).unwrap(), q(4, 3) + q(2, 1));
    }

    #[test]
    fn cap_and_validation() {
        let g = Graph::cycle(40).unwrap();
        let h: Vec<_> = (0..15).collect();
        assert!(matches!(corrected_count_exact(&g, &h), Err(Error::SizeLimit { .. })));
        assert!(CorrectedCounter::new(15).exact(&g, &h).is_ok());
        assert!(corrected_count_exact(&g, &[1, 1]).is_err());
        assert!(corrected_count_exact(&g, &[40]).is_err());
    }

    #[test]
    fn mc_singleton_is_exact() {
        let g = Graph::cycle(5).unwrap();
        assert_eq!(corrected_count_mc(&g, &[2], 50, 0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn mc_star_three() {
        let g = Graph::star(3).unwrap();
        let (m, se) = corrected_count_mc(&g, &[0, 1, 2, 3], 100_000, 7).unwrap();
        assert!((m - 1.75).abs() < 3.0 * se, "m={m} se={se}");
    }

    #[test]
    fn corrected_total_examples() {
        let g = Graph::cycle(9).unwrap();
        let singles = SpinConfig::from_vertices(9, [0, 3, 6]);
        assert_eq!(corrected_total(&g, &singles).unwrap(), q(3, 1));
        let pair_plus_one = SpinConfig::from_vertices(9, [0, 1, 5]);
        assert_eq!(corrected_total(&g, &pair_plus_one).unwrap(), q(2, 1));
    }
}
