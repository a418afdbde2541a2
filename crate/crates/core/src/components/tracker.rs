use std::collections::VecDeque;

use serde_json::Value;

use super::ComponentView;
use crate::graph::{Graph, Vertex};
use crate::kcip::{Observer, SpinConfig, Step};

const NONE: u32 = u32::MAX;

/// Components of `G_t` maintained under single-vertex flips.
///
/// Adding a vertex merges the components around it into the largest one;
/// removing a vertex re-explores only the component it belonged to.
#[derive(Debug, Clone, Default)]
pub struct ComponentTracker {
    label: Vec<u32>,
    members: Vec<Vec<Vertex>>,
    free: Vec<u32>,
    stamp: Vec<u32>,
    generation: u32,
    components: usize,
    vertices: usize,
    queue: VecDeque<Vertex>,
}

impl ComponentTracker {
    pub fn new(g: &Graph, x: &SpinConfig) -> Self {
        let mut t = ComponentTracker {
            label: vec![NONE; g.n()],
            stamp: vec![0; g.n()],
            ..Default::default()
        };
        for v in x.occupied() {
            t.add(g, v);
        }
        t
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn is_occupied(&self, v: Vertex) -> bool {
        self.label[v] != NONE
    }

    pub fn component_id(&self, v: Vertex) -> Option<usize> {
        (self.label[v] != NONE).then_some(self.label[v] as usize)
    }

    /// Members of the component containing `v`.
    pub fn component_of(&self, v: Vertex) -> &[Vertex] {
        match self.component_id(v) {
            Some(id) => &self.members[id],
            None => &[],
        }
    }

    /// Largest component meeting the neighbourhood of `v`, 0 if none.
    pub fn largest_adjacent_component(&self, g: &Graph, v: Vertex) -> usize {
        g.neighbors(v)
            .iter()
            .filter_map(|&w| self.component_id(w))
            .map(|id| self.members[id].len())
            .max()
            .unwrap_or(0)
    }

    fn alloc(&mut self) -> u32 {
        match self.free.pop() {
            Some(id) => id,
            None => {
                self.members.push(Vec::new());
                (self.members.len() - 1) as u32
            }
        }
    }

    /// Marks `v` occupied. Returns the number of components merged into it.
    pub fn add(&mut self, g: &Graph, v: Vertex) -> usize {
        debug_assert_eq!(self.label[v], NONE);
        let mut ids: Vec<u32> = g
            .neighbors(v)
            .iter()
            .map(|&w| self.label[w])
            .filter(|&l| l != NONE)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        self.vertices += 1;
        let merged = ids.len();
        let target = match ids.iter().copied().max_by_key(|&id| (self.members[id as usize].len(), id)) {
            None => {
                self.components += 1;
                self.alloc()
            }
            Some(target) => {
                for &id in ids.iter().filter(|&&id| id != target) {
                    let moved = std::mem::take(&mut self.members[id as usize]);
                    for &w in &moved {
                        self.label[w] = target;
                    }
                    self.members[target as usize].extend(moved);
                    self.free.push(id);
                }
                self.components -= merged - 1;
                target
            }
        };
        self.label[v] = target;
        self.members[target as usize].push(v);
        merged
    }

    /// Marks `v` empty. Returns the number of pieces its component split into.
    pub fn remove(&mut self, g: &Graph, v: Vertex) -> usize {
        let c = self.label[v];
        debug_assert_ne!(c, NONE);
        self.label[v] = NONE;
        self.vertices -= 1;
        let nbrs: Vec<Vertex> = g.neighbors(v).iter().copied().filter(|&w| self.label[w] != NONE).collect();
        let list = &mut self.members[c as usize];
        let pos = list.iter().position(|&w| w == v).expect("vertex listed in its component");
        list.swap_remove(pos);
        match nbrs.len() {
            0 => {
                self.components -= 1;
                self.free.push(c);
                0
            }
            1 => 1,
            _ => {
                self.generation = self.generation.wrapping_add(1);
                if self.generation == 0 {
                    self.stamp.iter_mut().for_each(|s| *s = 0);
                    self.generation = 1;
                }
                let gen = self.generation;
                self.members[c as usize].clear();
                let mut pieces = 0;
                for s in nbrs {
                    if self.stamp[s] == gen {
                        continue;
                    }
                    let id = if pieces == 0 { c } else { self.alloc() };
                    pieces += 1;
                    self.stamp[s] = gen;
                    self.queue.push_back(s);
                    let mut comp = Vec::new();
                    while let Some(w) = self.queue.pop_front() {
                        self.label[w] = id;
                        comp.push(w);
                        for &u in g.neighbors(w) {
                            if self.label[u] != NONE && self.stamp[u] != gen {
                                self.stamp[u] = gen;
                                self.queue.push_back(u);
                            }
                        }
                    }
                    self.members[id as usize] = comp;
                }
                self.components += pieces - 1;
                pieces
            }
        }
    }

    pub fn apply_flip(&mut self, g: &Graph, v: Vertex, occupied: bool) {
        if occupied {
            self.add(g, v);
        } else {
            self.remove(g, v);
        }
    }

    /// Snapshot in the same canonical form as [`super::component_stats`].
    pub fn view(&self) -> ComponentView {
        let mut comps: Vec<Vec<Vertex>> = self
            .members
            .iter()
            .filter(|m| !m.is_empty())
            .map(|m| {
                let mut m = m.clone();
                m.sort_unstable();
                m
            })
            .collect();
        comps.sort_unstable_by_key(|c| c[0]);
        let mut comp_id = vec![None; self.label.len()];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                comp_id[v] = Some(i);
            }
        }
        ComponentView { comp_id, comps }
    }

    /// Components as vertex lists, in internal order.
    pub fn components(&self) -> impl Iterator<Item = &[Vertex]> {
        self.members.iter().filter(|m| !m.is_empty()).map(Vec::as_slice)
    }
}

/// Records the steps at which the component count `Y` drops.
///
/// For each such step `u`, `sizes` holds the largest component of `G_u`
/// (before the update) adjacent to the updated vertex.
#[derive(Debug, Clone, Default)]
pub struct CollisionObserver {
    tracker: ComponentTracker,
    pub times: Vec<u64>,
    pub sizes: Vec<usize>,
}

impl CollisionObserver {
    pub fn count(&self) -> usize {
        self.times.len()
    }

    pub fn first(&self) -> Option<u64> {
        self.times.first().copied()
    }

    pub fn tracker(&self) -> &ComponentTracker {
        &self.tracker
    }
}

impl Observer for CollisionObserver {
    fn name(&self) -> &'static str {
        "collisions"
    }

    fn on_start(&mut self, g: &Graph, x0: &SpinConfig) {
        self.tracker = ComponentTracker::new(g, x0);
        self.times.clear();
        self.sizes.clear();
    }

    fn on_step(&mut self, g: &Graph, step: &Step<'_>) {
        let Some(v) = step.flipped else { return };
        let before = self.tracker.component_count();
        let largest = self.tracker.largest_adjacent_component(g, step.draw.vertex);
        self.tracker.apply_flip(g, v, step.after.get(v));
        if self.tracker.component_count() < before {
            self.times.push(step.t);
            self.sizes.push(largest);
        }
    }

    fn summary(&self) -> Value {
        serde_json::json!({
            "count": self.times.len(),
            "times": self.times,
            "sizes": self.sizes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::component_stats;
    use crate::kcip::{simulate_draws, Density, KcipChain, UpdateDraw};

    #[test]
    fn tracker_matches_batch_on_random_walk() {
        let g = Graph::torus(5, 2).unwrap();
        let d = Density::for_graph(8.0, &g).unwrap();
        let x0 = SpinConfig::from_vertices(25, (0..25).filter(|v| v % 3 != 0));
        let mut tracker = ComponentTracker::new(&g, &x0);
        let mut chain = KcipChain::new(&g, x0, d, 17);
        for _ in 0..20_000 {
            let (_, flipped) = chain.step();
            if let Some(v) = flipped {
                tracker.apply_flip(&g, v, chain.state().get(v));
            }
            assert_eq!(tracker.view(), component_stats(&g, chain.state()));
            assert_eq!(tracker.vertex_count(), chain.state().count());
        }
    }

    #[test]
    fn two_singletons_merge_then_split() {
        let g = Graph::cycle(6).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let x0 = SpinConfig::from_vertices(6, [0, 2]);
        let mut obs = CollisionObserver::default();
        let draws = [
            UpdateDraw::new(1, 0.0), // add 1: {0},{2} merge
            UpdateDraw::new(1, 0.9), // remove 1: split again
            UpdateDraw::new(4, 0.0), // frozen
        ];
        let x = simulate_draws(&g, &x0, draws, d, &mut [&mut obs]);
        assert_eq!(x, x0);
        assert_eq!(obs.count(), 1);
        assert_eq!(obs.times, vec![0]);
        assert_eq!(obs.sizes, vec![1]);
    }

    #[test]
    fn merge_size_uses_pre_update_components() {
        let g = Graph::cycle(8).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let x0 = SpinConfig::from_vertices(8, [0, 1, 3]);
        let mut obs = CollisionObserver::default();
        simulate_draws(&g, &x0, [UpdateDraw::new(2, 0.0)], d, &mut [&mut obs]);
        assert_eq!(obs.sizes, vec![2]);
    }

    #[test]
    fn monotone_component_count_means_no_collisions() {
        let g = Graph::cycle(8).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let x0 = SpinConfig::from_vertices(8, [0]);
        let mut obs = CollisionObserver::default();
        let draws = [UpdateDraw::new(1, 0.0), UpdateDraw::new(2, 0.0), UpdateDraw::new(2, 0.5)];
        simulate_draws(&g, &x0, draws, d, &mut [&mut obs]);
        assert_eq!(obs.count(), 0);
        assert!(obs.sizes.is_empty());
    }
}
