use serde::Serialize;

use super::kernel::TransitionKernel;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kcip::{stationary_prob, Density, SpinConfig};

/// Largest vertex count accepted by [`build_kernel`] by default.
pub const DEFAULT_MAX_VERTICES: usize = 20;

/// Partition class of a configuration.
///
/// `Omega(k)` holds `k` particles with no two adjacent, for `1 <= k <= n/2`;
/// everything else (including the empty configuration) is `Residual`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StateClass {
    Omega(usize),
    Residual,
}

impl StateClass {
    pub fn omega(self) -> Option<usize> {
        match self {
            StateClass::Omega(k) => Some(k),
            StateClass::Residual => None,
        }
    }
}

/// Number of edges with both endpoints occupied.
pub fn occupied_edges(g: &Graph, x: &SpinConfig) -> usize {
    x.occupied()
        .map(|v| g.neighbors(v).iter().filter(|&&u| u > v && x.get(u)).count())
        .sum()
}

pub fn classify(g: &Graph, x: &SpinConfig) -> StateClass {
    class_from_counts(g.n(), x.count(), occupied_edges(g, x))
}

pub(crate) fn class_from_counts(n: usize, count: usize, occupied_edges: usize) -> StateClass {
    if count >= 1 && 2 * count <= n && occupied_edges == 0 {
        StateClass::Omega(count)
    } else {
        StateClass::Residual
    }
}

/// All non-empty configurations of a small graph. Ordinal `i` is the
/// configuration with bit mask `i + 1`.
#[derive(Debug, Clone)]
pub struct StateSpace {
    n: usize,
    classes: Vec<StateClass>,
}

impl StateSpace {
    pub fn new(g: &Graph, max_vertices: usize) -> Result<Self> {
        let n = g.n();
        if n > max_vertices || n > 30 {
            return Err(Error::size("vertex count for exact state space", n, max_vertices.min(30)));
        }
        let adj: Vec<u32> = (0..n)
            .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
            .collect();
        let classes = (1u32..1 << n)
            .map(|mask| {
                let mut edges = 0;
                let mut bits = mask;
                while bits != 0 {
                    let v = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    edges += (adj[v] & mask).count_ones() as usize;
                }
                class_from_counts(n, mask.count_ones() as usize, edges / 2)
            })
            .collect();
        Ok(StateSpace { n, classes })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn mask(&self, i: usize) -> u32 {
        (i + 1) as u32
    }

    pub fn config(&self, i: usize) -> SpinConfig {
        SpinConfig::from_mask(self.n, self.mask(i) as u64)
    }

    pub fn index(&self, x: &SpinConfig) -> Option<usize> {
        let m = x.to_mask()? as usize;
        (x.len() == self.n && m >= 1).then(|| m - 1)
    }

    pub fn class(&self, i: usize) -> StateClass {
        self.classes[i]
    }

    /// Ordinals of `Ω_k`, ascending.
    pub fn omega(&self, k: usize) -> Vec<usize> {
        self.members(StateClass::Omega(k))
    }

    pub fn members(&self, class: StateClass) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.classes[i] == class).collect()
    }

    /// Closed-form stationary vector over the space.
    pub fn stationary(&self, density: Density) -> Vec<f64> {
        (0..self.len()).map(|i| stationary_prob(&self.config(i), density)).collect()
    }
}

/// Exact KCIP kernel together with its state space.
#[derive(Debug, Clone)]
pub struct KcipKernel {
    pub space: StateSpace,
    pub kernel: TransitionKernel,
}

/// Exact transition kernel of the KCIP on `g`, up to
/// [`DEFAULT_MAX_VERTICES`] vertices.
pub fn build_kernel(g: &Graph, density: Density) -> Result<KcipKernel> {
    build_kernel_with_cap(g, density, DEFAULT_MAX_VERTICES)
}

pub fn build_kernel_with_cap(g: &Graph, density: Density, max_vertices: usize) -> Result<KcipKernel> {
    let space = StateSpace::new(g, max_vertices)?;
    let n = g.n();
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let w = 1.0 / n as f64;
    let (up, down) = (density.p() * w, (1.0 - density.p()) * w);
    let rows = (0..space.len())
        .map(|i| {
            let mask = space.mask(i);
            let mut row = Vec::with_capacity(n + 1);
            let mut stay = 0.0;
            for v in 0..n {
                let bit = 1u32 << v;
                if adj[v] & mask == 0 {
                    stay += w;
                } else if mask & bit != 0 {
                    stay += up;
                    row.push(((mask & !bit) as usize - 1, down));
                } else {
                    stay += down;
                    row.push(((mask | bit) as usize - 1, up));
                }
            }
            row.push((i, stay));
            row
        })
        .collect();
    let kernel = TransitionKernel::from_rows(rows)?.with_stationary(space.stationary(density));
    Ok(KcipKernel { space, kernel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kcip::{kcip_step, UpdateDraw};

    #[test]
    fn partition_classes() {
        let g = Graph::cycle(6).unwrap();
        let s = StateSpace::new(&g, 20).unwrap();
        assert_eq!(s.len(), 63);
        assert_eq!(s.omega(1).len(), 6);
        assert_eq!(s.omega(2).len(), 9);
        assert_eq!(s.omega(3).len(), 2);
        assert!(s.omega(4).is_empty());
        for i in 0..s.len() {
            assert_eq!(s.index(&s.config(i)), Some(i));
            assert_eq!(s.class(i), classify(&g, &s.config(i)));
        }
        assert_eq!(classify(&g, &SpinConfig::empty(6)), StateClass::Residual);
    }

    #[test]
    fn independent_sets_above_half_are_residual() {
        let g = Graph::star(4).unwrap();
        let leaves = SpinConfig::from_vertices(5, [1, 2, 3, 4]);
        assert_eq!(classify(&g, &leaves), StateClass::Residual);
        assert_eq!(classify(&g, &SpinConfig::from_vertices(5, [1, 2])), StateClass::Omega(2));
    }

    #[test]
    fn size_cap() {
        let g = Graph::cycle(21).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        assert!(matches!(build_kernel(&g, d), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn holding_probability_on_c4() {
        // Enumerate the four vertex draws; the p-threshold splits each
        // unfrozen draw into an "up" branch (prob 1/4) and a "down" branch.
        let g = Graph::cycle(4).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let x = SpinConfig::from_vertices(4, [0]);
        let mut hold = 0.0;
        for v in 0..4 {
            for (threshold, weight) in [(0.1, 0.25), (0.9, 0.75)] {
                if kcip_step(&g, &x, UpdateDraw::new(v, threshold), d) == x {
                    hold += 0.25 * weight;
                }
            }
        }
        assert_eq!(hold, 7.0 / 8.0);
        let k = build_kernel(&g, d).unwrap();
        let i = k.space.index(&x).unwrap();
        assert!((k.kernel.get(i, i) - 7.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_matches_step_rule() {
        let g = Graph::torus(3, 2).unwrap();
        let d = Density::for_graph(1.5, &g).unwrap();
        let k = build_kernel(&g, d).unwrap();
        assert!(k.kernel.max_row_sum_error() < 1e-12);
        for i in (0..k.space.len()).step_by(37) {
            let x = k.space.config(i);
            let mut row = vec![0.0; k.space.len()];
            for v in 0..9 {
                for (threshold, weight) in [(0.0, d.p()), (0.999, 1.0 - d.p())] {
                    let y = kcip_step(&g, &x, UpdateDraw::new(v, threshold), d);
                    row[k.space.index(&y).unwrap()] += weight / 9.0;
                }
            }
            for (j, p) in row.iter().enumerate() {
                assert!((k.kernel.get(i, j) - p).abs() < 1e-15);
            }
        }
    }
}
