use rand::Rng;
use serde::Serialize;

use crate::components::component_stats;
use crate::graph::{Graph, Vertex};
use crate::kcip::{Density, SpinConfig, UpdateDraw};
use crate::rng::{seeded, SimRng};

/// Per-vertex colors; 0 is empty and colors `1..=k` are fixed at
/// construction, one per initial component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredConfig {
    labels: Vec<u32>,
    colors: u32,
}

impl ColoredConfig {
    /// Colors component `i` (ordered by smallest vertex) with `i + 1`.
    pub fn from_components(g: &Graph, x: &SpinConfig) -> Self {
        let view = component_stats(g, x);
        let mut labels = vec![0; g.n()];
        for (i, comp) in view.comps.iter().enumerate() {
            for &v in comp {
                labels[v] = i as u32 + 1;
            }
        }
        ColoredConfig {
            labels,
            colors: view.comps.len() as u32,
        }
    }

    pub fn from_labels(labels: Vec<u32>) -> Self {
        let colors = labels.iter().copied().max().unwrap_or(0);
        ColoredConfig { labels, colors }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: Vertex) -> u32 {
        self.labels[v]
    }

    pub fn colors(&self) -> u32 {
        self.colors
    }

    /// Underlying occupation pattern.
    pub fn projection(&self) -> SpinConfig {
        SpinConfig::from_vertices(self.labels.len(), (0..self.labels.len()).filter(|&v| self.labels[v] != 0))
    }

    /// `V^(i)`.
    pub fn color_count(&self, color: u32) -> usize {
        self.labels.iter().filter(|&&l| l == color).count()
    }

    fn occupied_neighbors(&self, g: &Graph, v: Vertex) -> Vec<Vertex> {
        g.neighbors(v).iter().copied().filter(|&u| self.labels[u] != 0).collect()
    }

    /// Occupied vertices connected to `v` through occupied vertices.
    pub fn component(&self, g: &Graph, v: Vertex) -> Vec<Vertex> {
        if self.labels[v] == 0 {
            return Vec::new();
        }
        let mut seen = vec![false; self.labels.len()];
        let mut stack = vec![v];
        seen[v] = true;
        let mut out = Vec::new();
        while let Some(w) = stack.pop() {
            out.push(w);
            for &u in g.neighbors(w) {
                if self.labels[u] != 0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether every occupied component carries a single color.
    pub fn is_monochrome(&self, g: &Graph) -> bool {
        (0..self.labels.len()).all(|v| {
            self.labels[v] == 0 || g.neighbors(v).iter().all(|&u| self.labels[u] == 0 || self.labels[u] == self.labels[v])
        })
    }

    /// `|Comp^(i)|` for each color `0..=k` (index 0 unused).
    pub fn component_counts(&self, g: &Graph) -> Vec<usize> {
        let view = component_stats(g, &self.projection());
        let mut counts = vec![0; self.colors as usize + 1];
        for comp in &view.comps {
            let c = self.labels[comp[0]];
            if comp.iter().all(|&v| self.labels[v] == c) {
                counts[c as usize] += 1;
            }
        }
        counts
    }
}

/// One step driven by the KCIP draw. On a `0 → 1` flip, the occupied
/// neighbour at index `pick` (modulo their number) donates its color to
/// the whole component that now contains `v`. Returns the flipped vertex.
pub fn colored_kcip_step(
    g: &Graph,
    xc: &mut ColoredConfig,
    draw: UpdateDraw,
    density: Density,
    pick: usize,
) -> Option<Vertex> {
    let v = draw.vertex;
    let neighbors = xc.occupied_neighbors(g, v);
    if neighbors.is_empty() {
        return None;
    }
    let up = draw.threshold <= density.p();
    let occupied = xc.labels[v] != 0;
    match (occupied, up) {
        (true, false) => {
            xc.labels[v] = 0;
            Some(v)
        }
        (false, true) => {
            let color = xc.labels[neighbors[pick % neighbors.len()]];
            xc.labels[v] = color;
            for w in xc.component(g, v) {
                xc.labels[w] = color;
            }
            Some(v)
        }
        _ => None,
    }
}

/// First times of interference and of `V^(i) ≥ 3`, per color.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColorTimes {
    pub zeta_int: Vec<Option<u64>>,
    pub zeta_triple: Vec<Option<u64>>,
}

/// Colored KCIP with its generator. Each step draws the vertex, the
/// threshold, and then (only on a `0 → 1` flip) the donor neighbour.
pub struct ColoredChain<'g> {
    graph: &'g Graph,
    state: ColoredConfig,
    density: Density,
    rng: SimRng,
    t: u64,
    counts: Vec<usize>,
    comps: Vec<usize>,
    times: ColorTimes,
}

impl<'g> ColoredChain<'g> {
    pub fn new(graph: &'g Graph, x0: &SpinConfig, density: Density, seed: u64) -> Self {
        Self::with_rng(graph, ColoredConfig::from_components(graph, x0), density, seeded(seed))
    }

    pub fn with_rng(graph: &'g Graph, state: ColoredConfig, density: Density, rng: SimRng) -> Self {
        let k = state.colors as usize;
        let counts = (0..=k as u32).map(|c| state.color_count(c)).collect();
        let comps = state.component_counts(graph);
        ColoredChain {
            graph,
            state,
            density,
            rng,
            t: 0,
            counts,
            comps,
            times: ColorTimes {
                zeta_int: vec![None; k + 1],
                zeta_triple: vec![None; k + 1],
            },
        }
    }

    pub fn state(&self) -> &ColoredConfig {
        &self.state
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    /// Per color `0..=k`; entry 0 is unused.
    pub fn times(&self) -> &ColorTimes {
        &self.times
    }

    pub fn step(&mut self) -> (UpdateDraw, Option<Vertex>) {
        let g = self.graph;
        let draw = UpdateDraw::sample(&mut self.rng, g.n());
        let donors = self.state.occupied_neighbors(g, draw.vertex).len();
        let flips_up = self.state.labels[draw.vertex] == 0 && donors > 0 && draw.threshold <= self.density.p();
        let pick = if flips_up { self.rng.random_range(0..donors) } else { 0 };
        let flipped = colored_kcip_step(g, &mut self.state, draw, self.density, pick);
        self.t += 1;
        if flipped.is_some() {
            self.record();
        }
        (draw, flipped)
    }

    fn record(&mut self) {
        let counts: Vec<usize> = (0..=self.state.colors).map(|c| self.state.color_count(c)).collect();
        let comps = self.state.component_counts(self.graph);
        for i in 1..counts.len() {
            if self.times.zeta_int[i].is_none()
                && (counts[i].abs_diff(self.counts[i]) > 1 || comps[i].abs_diff(self.comps[i]) > 1)
            {
                self.times.zeta_int[i] = Some(self.t);
            }
            if self.times.zeta_triple[i].is_none() && counts[i] >= 3 {
                self.times.zeta_triple[i] = Some(self.t);
            }
        }
        self.counts = counts;
        self.comps = comps;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kcip::kcip_step;

    #[test]
    fn initial_coloring() {
        let g = Graph::cycle(8).unwrap();
        let xc = ColoredConfig::from_components(&g, &SpinConfig::from_vertices(8, [0, 1, 4, 7]));
        // {0, 1, 7} is one component through the wrap-around
        assert_eq!(xc.labels(), &[1, 1, 0, 0, 2, 0, 0, 1]);
        assert_eq!(xc.colors(), 2);
        assert!(xc.is_monochrome(&g));
    }

    #[test]
    fn inherits_single_neighbor_color() {
        let g = Graph::cycle(6).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let mut xc = ColoredConfig::from_labels(vec![0, 0, 0, 2, 2, 0]);
        colored_kcip_step(&g, &mut xc, UpdateDraw::new(2, 0.0), d, 0);
        assert_eq!(xc.labels(), &[0, 0, 2, 2, 2, 0]);
    }

    #[test]
    fn join_recolors_merged_component() {
        // 1 at vertex 0, 2 at vertex 2; vertex 1 flips up with donor 2
        let g = Graph::cycle(6).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let mut xc = ColoredConfig::from_labels(vec![1, 0, 2, 0, 0, 0]);
        // occupied neighbours of 1 are [0, 2]; index 1 is vertex 2
        colored_kcip_step(&g, &mut xc, UpdateDraw::new(1, 0.0), d, 1);
        assert_eq!(xc.labels(), &[2, 2, 2, 0, 0, 0]);
    }

    #[test]
    fn projection_and_monochrome_invariants() {
        let g = Graph::torus(5, 2).unwrap();
        let d = Density::for_graph(2.0, &g).unwrap();
        let x0 = SpinConfig::from_vertices(25, [0, 2, 12, 13]);
        let mut chain = ColoredChain::new(&g, &x0, d, 8);
        for _ in 0..20_000 {
            let before = chain.state().projection();
            let (draw, _) = chain.step();
            assert_eq!(chain.state().projection(), kcip_step(&g, &before, draw, d));
            assert!(chain.state().is_monochrome(&g));
        }
    }

    #[test]
    fn triple_time_per_color() {
        let g = Graph::cycle(8).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let mut chain = ColoredChain::new(&g, &SpinConfig::from_vertices(8, [0]), d, 1);
        while chain.times().zeta_triple[1].is_none() {
            chain.step();
        }
        assert_eq!(chain.times().zeta_triple[1], Some(chain.time()));
        assert_eq!(chain.state().color_count(1), 3);
    }
}
