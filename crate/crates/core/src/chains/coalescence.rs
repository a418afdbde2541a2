use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::components::min_pair_distance_of;
use crate::error::{Error, Result};
use crate::exact::DENSE_CAP;
use crate::graph::{Graph, Vertex};
use crate::rng::SimRng;

/// Particles `0..k` with positions; particles on the same site form a
/// stack that moves together from then on.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescenceState {
    positions: Vec<Vertex>,
    /// Distinct occupied sites, ascending.
    sites: Vec<Vertex>,
    q: f64,
}

impl CoalescenceState {
    /// Requires pairwise-distinct starting sites and `0 ≤ q ≤ 1/k`.
    pub fn new(g: &Graph, positions: Vec<Vertex>, q: f64) -> Result<Self> {
        let k = positions.len();
        if k == 0 {
            return Err(Error::invalid("coalescence needs at least one particle"));
        }
        if !(0.0..=1.0 / k as f64).contains(&q) {
            return Err(Error::invalid(format!("moving rate q = {q} must lie in [0, 1/{k}]")));
        }
        let mut sites = positions.clone();
        sites.sort_unstable();
        sites.dedup();
        if sites.len() != k {
            return Err(Error::invalid("starting positions must be distinct"));
        }
        if let Some(&v) = sites.iter().find(|&&v| v >= g.n()) {
            return Err(Error::invalid(format!("position {v} out of range")));
        }
        Ok(CoalescenceState {
            positions,
            sites,
            q,
        })
    }

    pub fn positions(&self) -> &[Vertex] {
        &self.positions
    }

    /// Occupied sites `O_s`, ascending.
    pub fn sites(&self) -> &[Vertex] {
        &self.sites
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn particle_count(&self) -> usize {
        self.positions.len()
    }

    /// Particles stacked on `v`.
    pub fn stack(&self, v: Vertex) -> Vec<usize> {
        (0..self.positions.len()).filter(|&i| self.positions[i] == v).collect()
    }
}

/// `u ∼ Unif[0,1)`, a uniform index into `O_s`, and a uniform neighbour
/// index of that site, drawn in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalescenceDraw {
    pub u: f64,
    pub site: usize,
    pub neighbor: usize,
}

impl CoalescenceDraw {
    pub fn sample(rng: &mut SimRng, g: &Graph, s: &CoalescenceState) -> Self {
        let u = rng.random::<f64>();
        let site = rng.random_range(0..s.sites.len());
        let neighbor = rng.random_range(0..g.degree(s.sites[site]));
        CoalescenceDraw { u, site, neighbor }
    }
}

/// Outcome of a step that moved a stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub from: Vertex,
    pub to: Vertex,
    pub merged: bool,
}

/// Moves the stack at the drawn site to the drawn neighbour when
/// `u ≤ q|O_s|`, merging with any stack already there.
pub fn coalescence_step(g: &Graph, s: &mut CoalescenceState, draw: CoalescenceDraw) -> Option<Move> {
    if draw.u > s.q * s.sites.len() as f64 {
        return None;
    }
    let from = s.sites[draw.site];
    let to = g.neighbors(from)[draw.neighbor];
    for p in s.positions.iter_mut().filter(|p| **p == from) {
        *p = to;
    }
    s.sites.remove(draw.site);
    let merged = match s.sites.binary_search(&to) {
        Ok(_) => true,
        Err(pos) => {
            s.sites.insert(pos, to);
            false
        }
    };
    Some(Move { from, to, merged })
}

/// First `t` with `|O_t| < |O_0|` along a recorded path.
pub fn collision_time(path: &[CoalescenceState]) -> Option<usize> {
    let start = path.first()?.sites.len();
    path.iter().position(|s| s.sites.len() < start)
}

/// First `t` with two occupied sites within distance `i` (a merged pair
/// counts as distance 0).
pub fn near_collision_time(g: &Graph, path: &[CoalescenceState], i: usize) -> Result<Option<usize>> {
    if i == 0 {
        return Err(Error::invalid("near-collision distance must be at least 1"));
    }
    let start = match path.first() {
        Some(s) => s.sites.len(),
        None => return Ok(None),
    };
    Ok(path.iter().position(|s| {
        s.sites.len() < start || min_pair_distance_of(g, &s.sites).is_some_and(|d| d <= i)
    }))
}

/// Hitting times of one streamed run; `None` means censored at the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoalescenceRun {
    pub tau_col: Option<u64>,
    /// `τ_near(i)` for each requested distance, in request order.
    pub tau_near: Vec<Option<u64>>,
    /// Steps after which the occupied set changed.
    pub move_times: Vec<u64>,
    pub final_sites: Vec<Vertex>,
}

/// Runs until the first collision or `horizon` steps, tracking the
/// requested near-collision distances.
pub fn run_until_collision(
    g: &Graph,
    mut s: CoalescenceState,
    horizon: u64,
    near: &[usize],
    rng: &mut SimRng,
) -> Result<CoalescenceRun> {
    if near.contains(&0) {
        return Err(Error::invalid("near-collision distance must be at least 1"));
    }
    let start = s.sites.len();
    let mut tau_near: Vec<Option<u64>> = vec![None; near.len()];
    let mark = |t: u64, d: Option<usize>, tau_near: &mut [Option<u64>]| {
        for (slot, &i) in tau_near.iter_mut().zip(near) {
            if slot.is_none() && d.is_some_and(|d| d <= i) {
                *slot = Some(t);
            }
        }
    };
    mark(0, min_pair_distance_of(g, &s.sites), &mut tau_near);
    let mut tau_col = None;
    let mut move_times = Vec::new();
    for t in 1..=horizon {
        if start < 2 {
            break;
        }
        let draw = CoalescenceDraw::sample(rng, g, &s);
        if let Some(mv) = coalescence_step(g, &mut s, draw) {
            move_times.push(t);
            if mv.merged {
                mark(t, Some(0), &mut tau_near);
                tau_col = Some(t);
                break;
            }
            mark(t, min_pair_distance_of(g, &s.sites), &mut tau_near);
        }
    }
    debug_assert!(tau_col.is_none() || s.sites.len() < start);
    Ok(CoalescenceRun {
        tau_col,
        tau_near,
        move_times,
        final_sites: s.sites,
    })
}

/// Expected meeting time of two walkers started at `a ≠ b`, by a dense
/// first-passage solve over ordered pairs of distinct sites.
pub fn meeting_time_exact(g: &Graph, a: Vertex, b: Vertex, q: f64) -> Result<f64> {
    let n = g.n();
    if a >= n || b >= n || a == b {
        return Err(Error::invalid("meeting time needs two distinct sites in range"));
    }
    if !(q > 0.0 && q <= 0.5) {
        return Err(Error::invalid(format!("moving rate q = {q} must lie in (0, 1/2]")));
    }
    let states = n * (n - 1);
    if states > DENSE_CAP {
        return Err(Error::size("ordered pairs for meeting-time solve", states, DENSE_CAP));
    }
    let index = |x: Vertex, y: Vertex| x * (n - 1) + if y > x { y - 1 } else { y };
    let mut m = DMatrix::<f64>::identity(states, states);
    for x in 0..n {
        for y in (0..n).filter(|&y| y != x) {
            let i = index(x, y);
            m[(i, i)] -= 1.0 - 2.0 * q;
            // each of the two stacks is chosen with probability 1/2
            for (mover, other, first) in [(x, y, true), (y, x, false)] {
                let w = q / g.degree(mover) as f64;
                for &to in g.neighbors(mover) {
                    if to != other {
                        let j = if first { index(to, other) } else { index(other, to) };
                        m[(i, j)] -= w;
                    }
                }
            }
        }
    }
    let h = m
        .lu()
        .solve(&DVector::from_element(states, 1.0))
        .ok_or_else(|| Error::numeric("meeting-time system is singular (disconnected graph?)", f64::INFINITY))?;
    Ok(h[index(a, b)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn draw(u: f64, site: usize, neighbor: usize) -> CoalescenceDraw {
        CoalescenceDraw { u, site, neighbor }
    }

    #[test]
    fn construction_checks() {
        let g = Graph::cycle(6).unwrap();
        assert!(CoalescenceState::new(&g, vec![0, 0], 0.5).is_err());
        assert!(CoalescenceState::new(&g, vec![0, 1, 2], 0.5).is_err());
        assert!(CoalescenceState::new(&g, vec![0, 7], 0.5).is_err());
        assert!(CoalescenceState::new(&g, vec![0, 3], 0.5).is_ok());
    }

    #[test]
    fn crafted_merge() {
        // C_6, particles at 0 and 2; 0 -> 1, then 1 -> 2 merges
        let g = Graph::cycle(6).unwrap();
        let s0 = CoalescenceState::new(&g, vec![0, 2], 0.5).unwrap();
        let mut s = s0.clone();
        let mut path = vec![s.clone()];
        // u above q|O| = 1: no move
        assert_eq!(coalescence_step(&g, &mut s, draw(1.5, 0, 0)), None);
        path.push(s.clone());
        // neighbours of 0 are [1, 5]
        let mv = coalescence_step(&g, &mut s, draw(0.2, 0, 0)).unwrap();
        assert_eq!((mv.from, mv.to, mv.merged), (0, 1, false));
        path.push(s.clone());
        assert_eq!(s.sites(), &[1, 2]);
        // neighbours of 1 are [0, 2]
        let mv = coalescence_step(&g, &mut s, draw(0.2, 0, 1)).unwrap();
        assert!(mv.merged);
        path.push(s.clone());
        assert_eq!(s.positions(), &[2, 2]);
        assert_eq!(s.stack(2), vec![0, 1]);
        assert_eq!(collision_time(&path), Some(3));
        assert_eq!(near_collision_time(&g, &path, 1).unwrap(), Some(2));
        assert_eq!(near_collision_time(&g, &path, 2).unwrap(), Some(0));
    }

    #[test]
    fn single_particle_never_collides() {
        let g = Graph::cycle(5).unwrap();
        let s = CoalescenceState::new(&g, vec![0], 1.0).unwrap();
        let run = run_until_collision(&g, s.clone(), 100, &[1], &mut seeded(1)).unwrap();
        assert_eq!(run.tau_col, None);
        assert_eq!(run.tau_near, vec![None]);
        assert_eq!(collision_time(&[s]), None);
    }

    #[test]
    fn near_times_are_ordered() {
        let g = Graph::cycle(20).unwrap();
        let mut rng = seeded(5);
        for _ in 0..200 {
            let s = CoalescenceState::new(&g, vec![0, 10], 0.5).unwrap();
            let run = run_until_collision(&g, s, 100_000, &[1, 2, 4], &mut rng).unwrap();
            let col = run.tau_col.unwrap();
            let near: Vec<u64> = run.tau_near.iter().map(|t| t.unwrap()).collect();
            assert!(near[2] <= near[1] && near[1] <= near[0] && near[0] <= col);
        }
    }

    #[test]
    fn cycle_meeting_time_closed_form() {
        // the clockwise gap walks ±1 with probability q each
        for (n, d, q) in [(10, 5, 0.5), (10, 3, 0.5), (7, 2, 0.25)] {
            let g = Graph::cycle(n).unwrap();
            let h = meeting_time_exact(&g, 0, d, q).unwrap();
            let expected = (d * (n - d)) as f64 / (2.0 * q);
            assert!((h - expected).abs() < 1e-9 * expected, "{h} vs {expected}");
        }
    }
}
