//! The kinetically constrained Ising process.
//!
//! At each step a vertex `v` and a threshold `p_t` are drawn uniformly. If
//! `v` has an occupied neighbour its label becomes `1` when `p_t <= p` and
//! `0` otherwise; a vertex with no occupied neighbour is frozen.

mod config;
mod observer;

pub use config::SpinConfig;
pub use observer::{Observer, Step, TrajectoryRecord, VertexCountTrace};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::rng::{self, SimRng};
use crate::stats::mean_stderr;

/// Low-density parameter `p = c / n` for a particular graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Density {
    c: f64,
    p: f64,
}

impl Density {
    pub fn new(c: f64, n: usize) -> Result<Self> {
        let p = c / n as f64;
        if !(c > 0.0) || !(p < 1.0) {
            return Err(Error::invalid(format!(
                "density c={c} on n={n} vertices gives p={p}, need 0 < p < 1"
            )));
        }
        Ok(Density { c, p })
    }

    pub fn for_graph(c: f64, g: &Graph) -> Result<Self> {
        Self::new(c, g.n())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// One update: a vertex and a uniform threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpdateDraw {
    pub vertex: Vertex,
    pub threshold: f64,
}

impl UpdateDraw {
    pub fn new(vertex: Vertex, threshold: f64) -> Self {
        UpdateDraw { vertex, threshold }
    }

    /// Draws the vertex first, then the threshold.
    pub fn sample(rng: &mut SimRng, n: usize) -> Self {
        let vertex = rng.random_range(0..n);
        let threshold = rng.random::<f64>();
        UpdateDraw { vertex, threshold }
    }
}

#[inline]
pub fn has_occupied_neighbor(g: &Graph, x: &SpinConfig, v: Vertex) -> bool {
    g.neighbors(v).iter().any(|&u| x.get(u))
}

/// Label `v` would carry after applying `draw`, or `None` when it is frozen.
#[inline]
pub fn proposed_label(g: &Graph, x: &SpinConfig, draw: UpdateDraw, density: Density) -> Option<bool> {
    has_occupied_neighbor(g, x, draw.vertex).then_some(draw.threshold <= density.p)
}

/// Applies one update in place. Returns the vertex whose label changed.
#[inline]
pub fn apply_step(g: &Graph, x: &mut SpinConfig, draw: UpdateDraw, density: Density) -> Option<Vertex> {
    let v = draw.vertex;
    match proposed_label(g, x, draw, density) {
        Some(label) if label != x.get(v) => {
            x.set(v, label);
            Some(v)
        }
        _ => None,
    }
}

/// Value-returning form of [`apply_step`].
pub fn kcip_step(g: &Graph, x: &SpinConfig, draw: UpdateDraw, density: Density) -> SpinConfig {
    let mut y = x.clone();
    apply_step(g, &mut y, draw, density);
    y
}

/// Closed-form stationary probability: binomial weight conditioned on at
/// least one particle, and 0 for the empty configuration.
pub fn stationary_prob(x: &SpinConfig, density: Density) -> f64 {
    stationary_prob_by_count(x.len(), x.count(), density)
}

pub fn stationary_prob_by_count(n: usize, count: usize, density: Density) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let p = density.p;
    let z = -(n as f64 * (-p).ln_1p()).exp_m1();
    p.powi(count as i32) * (1.0 - p).powi((n - count) as i32) / z
}

/// A running chain: graph, state, density and its generator.
pub struct KcipChain<'g> {
    graph: &'g Graph,
    state: SpinConfig,
    density: Density,
    rng: SimRng,
    t: u64,
}

impl<'g> KcipChain<'g> {
    pub fn new(graph: &'g Graph, x0: SpinConfig, density: Density, seed: u64) -> Self {
        Self::with_rng(graph, x0, density, rng::seeded(seed))
    }

    pub fn with_rng(graph: &'g Graph, x0: SpinConfig, density: Density, rng: SimRng) -> Self {
        assert_eq!(x0.len(), graph.n(), "configuration length must match the graph");
        KcipChain {
            graph,
            state: x0,
            density,
            rng,
            t: 0,
        }
    }

    pub fn state(&self) -> &SpinConfig {
        &self.state
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    /// Draws and applies one update.
    #[inline]
    pub fn step(&mut self) -> (UpdateDraw, Option<Vertex>) {
        let draw = UpdateDraw::sample(&mut self.rng, self.graph.n());
        let flipped = apply_step(self.graph, &mut self.state, draw, self.density);
        self.t += 1;
        (draw, flipped)
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn into_state(self) -> SpinConfig {
        self.state
    }
}

fn notify(g: &Graph, observers: &mut [&mut dyn Observer], t: u64, draw: UpdateDraw, flipped: Option<Vertex>, x: &SpinConfig) {
    let step = Step {
        t,
        draw,
        flipped,
        after: x,
    };
    for obs in observers.iter_mut() {
        obs.on_step(g, &step);
    }
}

/// Runs `steps` updates from `x0` with the generator seeded by `seed`.
///
/// Every observer sees each transition `x_t -> x_{t+1}`; the record holds
/// the final state and each observer's summary.
pub fn simulate(
    g: &Graph,
    x0: &SpinConfig,
    steps: u64,
    seed: u64,
    density: Density,
    observers: &mut [&mut dyn Observer],
) -> TrajectoryRecord {
    let mut warnings = Vec::new();
    if x0.count() == 0 {
        warnings.push("initial configuration is empty; it is absorbing".to_string());
    }
    for obs in observers.iter_mut() {
        obs.on_start(g, x0);
    }
    let mut chain = KcipChain::new(g, x0.clone(), density, seed);
    for t in 0..steps {
        let (draw, flipped) = chain.step();
        notify(g, observers, t, draw, flipped, chain.state());
    }
    TrajectoryRecord::new(g, density, seed, steps, chain.into_state(), observers, warnings)
}

/// Runs an explicit draw sequence, for replaying hand-built traces.
pub fn simulate_draws(
    g: &Graph,
    x0: &SpinConfig,
    draws: impl IntoIterator<Item = UpdateDraw>,
    density: Density,
    observers: &mut [&mut dyn Observer],
) -> SpinConfig {
    for obs in observers.iter_mut() {
        obs.on_start(g, x0);
    }
    let mut x = x0.clone();
    for (t, draw) in draws.into_iter().enumerate() {
        let flipped = apply_step(g, &mut x, draw, density);
        notify(g, observers, t as u64, draw, flipped, &x);
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftPoint {
    pub t: u64,
    pub mean: f64,
    pub stderr: f64,
}

/// Mean particle count `V_t` over `reps` replicates from `x0`, sampled at
/// `points + 1` evenly spaced times in `[0, horizon]`.
pub fn drift_curve(
    g: &Graph,
    x0: &SpinConfig,
    density: Density,
    horizon: u64,
    points: u64,
    reps: u64,
    seed: u64,
) -> Vec<DriftPoint> {
    let points = points.clamp(1, horizon.max(1));
    let times: Vec<u64> = (0..=points).map(|i| horizon * i / points).collect();
    let runs: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut chain = KcipChain::with_rng(g, x0.clone(), density, rng::replicate_rng(seed, r));
            times
                .iter()
                .map(|&t| {
                    chain.run(t - chain.time());
                    chain.state().count() as f64
                })
                .collect()
        })
        .collect();
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let column: Vec<f64> = runs.iter().map(|r| r[i]).collect();
            let (mean, stderr) = mean_stderr(&column);
            DriftPoint { t, mean, stderr }
        })
        .collect()
}
