use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::TransitionKernel;
use crate::graph::{Graph, Vertex};
use crate::kcip::SpinConfig;
use crate::rng::SimRng;

/// Largest vertex count for which exclusion kernels are enumerated.
pub const EXCLUSION_MAX_VERTICES: usize = 24;

/// `k` particles on distinct vertices; `k` never changes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExclusionState {
    occupied: SpinConfig,
}

impl ExclusionState {
    pub fn new(n: usize, sites: &[Vertex]) -> Result<Self> {
        let mut occupied = SpinConfig::empty(n);
        for &v in sites {
            if v >= n || occupied.get(v) {
                return Err(Error::invalid(format!("site {v} is out of range or repeated")));
            }
            occupied.set(v, true);
        }
        Ok(ExclusionState { occupied })
    }

    pub fn from_config(occupied: SpinConfig) -> Self {
        ExclusionState { occupied }
    }

    pub fn k(&self) -> usize {
        self.occupied.count()
    }

    pub fn config(&self) -> &SpinConfig {
        &self.occupied
    }

    pub fn is_occupied(&self, v: Vertex) -> bool {
        self.occupied.get(v)
    }

    /// Whether some edge has both endpoints occupied.
    pub fn has_adjacent_pair(&self, g: &Graph) -> bool {
        self.occupied
            .occupied()
            .any(|v| g.neighbors(v).iter().any(|&u| self.occupied.get(u)))
    }
}

/// Uniform edge index and a fair orientation coin, drawn in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeDraw {
    pub edge: usize,
    pub reversed: bool,
}

impl EdgeDraw {
    pub fn sample(rng: &mut SimRng, edge_count: usize) -> Self {
        let edge = rng.random_range(0..edge_count);
        EdgeDraw {
            edge,
            reversed: rng.random(),
        }
    }

    pub fn endpoints(&self, edges: &[(Vertex, Vertex)]) -> (Vertex, Vertex) {
        let (u, v) = edges[self.edge];
        if self.reversed {
            (v, u)
        } else {
            (u, v)
        }
    }
}

/// Exchanges the labels at the ends of the drawn edge.
pub fn sep_step(edges: &[(Vertex, Vertex)], z: &mut ExclusionState, draw: EdgeDraw) {
    let (u, v) = draw.endpoints(edges);
    let (a, b) = (z.occupied.get(u), z.occupied.get(v));
    z.occupied.set(u, b);
    z.occupied.set(v, a);
}

/// SEP proposal accepted only if it keeps the particles pairwise
/// non-adjacent. Returns whether the state changed.
pub fn mh_sep_step(g: &Graph, edges: &[(Vertex, Vertex)], z: &mut ExclusionState, draw: EdgeDraw) -> Result<bool> {
    if z.has_adjacent_pair(g) {
        return Err(Error::InvalidState("exclusion state has two adjacent particles".into()));
    }
    let (u, v) = draw.endpoints(edges);
    let (from, to) = match (z.occupied.get(u), z.occupied.get(v)) {
        (true, false) => (u, v),
        (false, true) => (v, u),
        // swapping equal labels changes nothing
        _ => return Ok(false),
    };
    // the moved particle is the only one that can acquire an occupied neighbour
    if g.neighbors(to).iter().any(|&w| w != from && z.occupied.get(w)) {
        return Ok(false);
    }
    z.occupied.set(from, false);
    z.occupied.set(to, true);
    Ok(true)
}

/// Kernel over an enumerated set of exclusion states.
#[derive(Debug, Clone)]
pub struct ExclusionKernel {
    pub states: Vec<SpinConfig>,
    pub kernel: TransitionKernel,
}

impl ExclusionKernel {
    pub fn index(&self, x: &SpinConfig) -> Option<usize> {
        self.states.iter().position(|s| s == x)
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<u64> {
    (0u64..1 << n).filter(|m| m.count_ones() as usize == k).collect()
}

fn enumerate_kernel(
    g: &Graph,
    k: usize,
    keep: impl Fn(&ExclusionState) -> bool,
    step: impl Fn(&mut ExclusionState, EdgeDraw) -> Result<()>,
) -> Result<ExclusionKernel> {
    let n = g.n();
    if n > EXCLUSION_MAX_VERTICES {
        return Err(Error::size("vertices for exclusion kernel", n, EXCLUSION_MAX_VERTICES));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("particle count {k} must be in 1..={n}")));
    }
    let edges = g.edges();
    if edges.is_empty() {
        return Err(Error::invalid("graph has no edges"));
    }
    let states: Vec<SpinConfig> = k_subsets(n, k)
        .into_iter()
        .map(|m| SpinConfig::from_mask(n, m))
        .filter(|x| keep(&ExclusionState::from_config(x.clone())))
        .collect();
    let index: HashMap<&SpinConfig, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let w = 0.5 / edges.len() as f64;
    let mut rows = Vec::with_capacity(states.len());
    for s in &states {
        let mut row = Vec::with_capacity(2 * edges.len());
        for e in 0..edges.len() {
            for reversed in [false, true] {
                let mut z = ExclusionState::from_config(s.clone());
                step(&mut z, EdgeDraw { edge: e, reversed })?;
                let j = *index
                    .get(z.config())
                    .ok_or_else(|| Error::InvalidState("step left the enumerated state set".into()))?;
                row.push((j, w));
            }
        }
        rows.push(row);
    }
    Ok(ExclusionKernel {
        kernel: TransitionKernel::from_rows(rows)?,
        states,
    })
}

/// Exact SEP kernel on all `k`-subsets.
pub fn sep_kernel(g: &Graph, k: usize) -> Result<ExclusionKernel> {
    let edges = g.edges();
    enumerate_kernel(g, k, |_| true, |z, d| {
        sep_step(&edges, z, d);
        Ok(())
    })
}

/// Exact MH-SEP kernel on `k`-subsets with no two adjacent particles.
pub fn mh_sep_kernel(g: &Graph, k: usize) -> Result<ExclusionKernel> {
    let edges = g.edges();
    enumerate_kernel(g, k, |z| !z.has_adjacent_pair(g), |z, d| mh_sep_step(g, &edges, z, d).map(|_| ()))
}
