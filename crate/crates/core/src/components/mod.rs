//! Connected components of the occupied subgraph, collision bookkeeping and
//! the corrected component count.

mod corrected;
mod tracker;

pub use corrected::{
    corrected_count_exact, corrected_count_mc, corrected_total, CorrectedCounter, DEFAULT_EXACT_CAP,
};
pub use tracker::{CollisionObserver, ComponentTracker};

use std::collections::VecDeque;

use crate::graph::{Graph, Vertex};
use crate::kcip::SpinConfig;

/// Batch decomposition of the occupied subgraph `G_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentView {
    /// Component index per vertex, `None` for empty vertices.
    pub comp_id: Vec<Option<usize>>,
    /// Vertex sets, each sorted, ordered by smallest member.
    pub comps: Vec<Vec<Vertex>>,
}

impl ComponentView {
    /// Particle count `V`.
    pub fn vertex_count(&self) -> usize {
        self.comps.iter().map(Vec::len).sum()
    }

    /// Component count `Y`.
    pub fn component_count(&self) -> usize {
        self.comps.len()
    }

    /// Excess particles `δ = V - Y`.
    pub fn excess(&self) -> usize {
        self.vertex_count() - self.component_count()
    }

    /// Multiset of component sizes, sorted.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<_> = self.comps.iter().map(Vec::len).collect();
        s.sort_unstable();
        s
    }
}

/// Breadth-first decomposition of the subgraph induced by occupied vertices.
pub fn component_stats(g: &Graph, x: &SpinConfig) -> ComponentView {
    components_of(g, g.n(), x.occupied(), |v| x.get(v))
}

/// Components of the subgraph induced by an arbitrary vertex set.
pub fn components_of_set(g: &Graph, set: &[Vertex]) -> Vec<Vec<Vertex>> {
    let mut member = vec![false; g.n()];
    for &v in set {
        member[v] = true;
    }
    components_of(g, g.n(), set.iter().copied(), |v| member[v]).comps
}

fn components_of(
    g: &Graph,
    n: usize,
    vertices: impl Iterator<Item = Vertex>,
    member: impl Fn(Vertex) -> bool,
) -> ComponentView {
    let mut comp_id = vec![None; n];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    let mut starts: Vec<Vertex> = vertices.collect();
    starts.sort_unstable();
    for s in starts {
        if comp_id[s].is_some() {
            continue;
        }
        let id = comps.len();
        let mut comp = vec![s];
        comp_id[s] = Some(id);
        queue.push_back(s);
        while let Some(w) = queue.pop_front() {
            for &u in g.neighbors(w) {
                if member(u) && comp_id[u].is_none() {
                    comp_id[u] = Some(id);
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    ComponentView { comp_id, comps }
}

/// Smallest graph distance between two occupied vertices, `None` (infinity)
/// with fewer than two particles or when no pair is connected.
pub fn min_pair_distance(g: &Graph, x: &SpinConfig) -> Option<usize> {
    let occ: Vec<Vertex> = x.occupied().collect();
    min_pair_distance_of(g, &occ)
}

pub fn min_pair_distance_of(g: &Graph, sites: &[Vertex]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &a) in sites.iter().enumerate() {
        for &b in &sites[i + 1..] {
            if let Some(d) = g.distance_unchecked(a, b) {
                best = Some(best.map_or(d, |m| m.min(d)));
            }
        }
    }
    best
}

/// All particles pairwise further apart than `zeta`.
pub fn is_separated(g: &Graph, x: &SpinConfig, zeta: usize) -> bool {
    min_pair_distance(g, x).is_none_or(|d| d > zeta)
}
