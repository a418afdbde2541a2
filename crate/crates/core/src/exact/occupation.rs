use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::state_space::{class_from_counts, classify, occupied_edges, StateClass};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kcip::{simulate, Density, Observer, SpinConfig, Step};
use crate::rng::replicate_seed;
use crate::stats::mean_stderr;

/// Visit times `η` and counts `κ(T)` per class, over `t = 1..=T`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OccupationCounters {
    pub horizon: usize,
    pub visits: BTreeMap<StateClass, Vec<usize>>,
}

impl OccupationCounters {
    pub fn kappa(&self, class: StateClass) -> usize {
        self.visits.get(&class).map_or(0, Vec::len)
    }

    pub fn eta(&self, class: StateClass) -> &[usize] {
        self.visits.get(&class).map_or(&[], Vec::as_slice)
    }
}

/// Counters for a class sequence `classes[t]`, `t = 0..=T`. The initial
/// state is not counted.
pub fn occupation_counters(classes: &[StateClass]) -> OccupationCounters {
    let mut out = OccupationCounters {
        horizon: classes.len().saturating_sub(1),
        visits: BTreeMap::new(),
    };
    for (t, &c) in classes.iter().enumerate().skip(1) {
        out.visits.entry(c).or_default().push(t);
    }
    out
}

/// Entry and exit bookkeeping for one `Ω_k`.
///
/// A sojourn starts when the chain enters `Ω_k` and ends when it reaches
/// some `Ω_j` with `j ≠ k`; passing through `Ω′` does not end it. The
/// length is the number of steps from entry to exit; a sojourn still open
/// at the horizon is censored (`None`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTimes {
    pub k: usize,
    pub rho: Option<usize>,
    pub entries: Vec<usize>,
    pub exit_lengths: Vec<Option<usize>>,
    #[serde(skip)]
    open: Option<usize>,
    #[serde(skip)]
    last_in: bool,
}

impl HittingTimes {
    pub fn new(k: usize) -> Self {
        HittingTimes {
            k,
            rho: None,
            entries: Vec::new(),
            exit_lengths: Vec::new(),
            open: None,
            last_in: false,
        }
    }

    pub fn observe(&mut self, t: usize, class: StateClass) {
        let inside = class == StateClass::Omega(self.k);
        if inside && !self.last_in {
            self.entries.push(t);
            self.rho.get_or_insert(t);
        }
        match (class, self.open) {
            (StateClass::Omega(_), None) if inside => self.open = Some(t),
            (StateClass::Omega(j), Some(start)) if j != self.k => {
                self.exit_lengths.push(Some(t - start));
                self.open = None;
            }
            _ => {}
        }
        self.last_in = inside;
    }

    /// Closes the record at the horizon, censoring an open sojourn.
    pub fn finish(&mut self) {
        if self.open.take().is_some() {
            self.exit_lengths.push(None);
        }
    }
}

pub fn hitting_times(classes: &[StateClass], k: usize) -> HittingTimes {
    let mut h = HittingTimes::new(k);
    for (t, &c) in classes.iter().enumerate() {
        h.observe(t, c);
    }
    h.finish();
    h
}

/// Incremental class of the current configuration.
#[derive(Debug, Clone, Default)]
pub struct ClassTracker {
    n: usize,
    count: usize,
    edges: usize,
}

impl ClassTracker {
    pub fn new(g: &Graph, x: &SpinConfig) -> Self {
        ClassTracker {
            n: g.n(),
            count: x.count(),
            edges: occupied_edges(g, x),
        }
    }

    pub fn class(&self) -> StateClass {
        class_from_counts(self.n, self.count, self.edges)
    }

    pub fn update(&mut self, g: &Graph, step: &Step<'_>) {
        if let Some(v) = step.flipped {
            let touching = g.neighbors(v).iter().filter(|&&u| step.after.get(u)).count();
            if step.after.get(v) {
                self.count += 1;
                self.edges += touching;
            } else {
                self.count -= 1;
                self.edges -= touching;
            }
        }
    }
}

/// Occupation counts for `Ω_1..Ω_{k_max}` and the rest, plus sojourn
/// records for each `k ≤ k_max`. Configurations in `Ω_k` with
/// `k > k_max` are counted with `Ω′` in `rest`.
#[derive(Debug, Clone)]
pub struct OccupationObserver {
    k_max: usize,
    tracker: ClassTracker,
    counts: Vec<u64>,
    steps: u64,
    hitting: Vec<HittingTimes>,
}

impl OccupationObserver {
    pub fn new(k_max: usize) -> Self {
        OccupationObserver {
            k_max,
            tracker: ClassTracker::default(),
            counts: vec![0; k_max + 1],
            steps: 0,
            hitting: (1..=k_max).map(HittingTimes::new).collect(),
        }
    }

    fn bucket(&self, class: StateClass) -> usize {
        match class {
            StateClass::Omega(k) if k <= self.k_max => k,
            _ => 0,
        }
    }

    /// `κ_k(T)` for `k = 1..=k_max`.
    pub fn kappa(&self, k: usize) -> u64 {
        self.counts[k]
    }

    pub fn rest(&self) -> u64 {
        self.counts[0]
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Fractions `κ_k(T)/T` for `k = 1..=k_max`, followed by the rest.
    pub fn fractions(&self) -> Vec<f64> {
        let t = self.steps.max(1) as f64;
        (1..=self.k_max)
            .chain(std::iter::once(0))
            .map(|b| self.counts[b] as f64 / t)
            .collect()
    }

    /// Sojourn record for `Ω_k`; call after the run so open sojourns are
    /// censored.
    pub fn hitting(&self, k: usize) -> &HittingTimes {
        &self.hitting[k - 1]
    }

    pub fn finish(&mut self) {
        self.hitting.iter_mut().for_each(HittingTimes::finish);
    }
}

impl Observer for OccupationObserver {
    fn name(&self) -> &'static str {
        "occupation"
    }

    fn on_start(&mut self, g: &Graph, x0: &SpinConfig) {
        self.tracker = ClassTracker::new(g, x0);
        let class = self.tracker.class();
        self.hitting.iter_mut().for_each(|h| h.observe(0, class));
    }

    fn on_step(&mut self, g: &Graph, step: &Step<'_>) {
        self.tracker.update(g, step);
        let class = self.tracker.class();
        let b = self.bucket(class);
        self.counts[b] += 1;
        self.steps += 1;
        let t = step.t as usize + 1;
        self.hitting.iter_mut().for_each(|h| h.observe(t, class));
    }

    fn summary(&self) -> Value {
        let mut hits = self.hitting.clone();
        hits.iter_mut().for_each(HittingTimes::finish);
        json!({
            "k_max": self.k_max,
            "kappa": (1..=self.k_max).map(|k| self.counts[k]).collect::<Vec<_>>(),
            "rest": self.counts[0],
            "hitting": hits,
        })
    }
}

/// Per-start estimate of `P[κ_k(T) > N]` from `reps` runs started at `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exceedance {
    pub probability: f64,
    pub stderr: f64,
    pub reps: u64,
}

pub fn occupation_exceedance(
    g: &Graph,
    x0: &SpinConfig,
    density: Density,
    k: usize,
    threshold: u64,
    horizon: u64,
    reps: u64,
    seed: u64,
) -> Result<Exceedance> {
    if k == 0 || reps == 0 {
        return Err(Error::invalid("occupation exceedance needs k >= 1 and reps >= 1"));
    }
    let hits: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut obs = OccupationObserver::new(k);
            simulate(g, x0, horizon, replicate_seed(seed, r), density, &mut [&mut obs]);
            f64::from(obs.kappa(k) > threshold)
        })
        .collect();
    let (probability, stderr) = mean_stderr(&hits);
    Ok(Exceedance {
        probability,
        stderr,
        reps,
    })
}

/// Class of every configuration along a recorded path.
pub fn class_sequence(g: &Graph, path: &[SpinConfig]) -> Vec<StateClass> {
    path.iter().map(|x| classify(g, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kcip::KcipChain;
    use StateClass::{Omega, Residual};

    #[test]
    fn crafted_counters() {
        // t:     0         1         2         3         4         5
        let seq = [Omega(1), Omega(1), Omega(2), Residual, Omega(2), Omega(1)];
        let c = occupation_counters(&seq);
        assert_eq!(c.horizon, 5);
        assert_eq!(c.eta(Omega(1)), &[1, 5]);
        assert_eq!(c.eta(Omega(2)), &[2, 4]);
        assert_eq!(c.kappa(Residual), 1);
        assert_eq!(c.kappa(Omega(3)), 0);
        assert!(c.eta(Omega(3)).is_empty());
        let total: usize = c.visits.values().map(Vec::len).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn sojourn_examples() {
        let h = hitting_times(&[Omega(2), Omega(1)], 2);
        assert_eq!(h.exit_lengths, vec![Some(1)]);
        let h = hitting_times(&[Omega(2), Omega(2), Residual], 2);
        assert_eq!(h.exit_lengths, vec![None]);
        let h = hitting_times(&[Omega(2), Omega(2), Omega(1), Omega(2)], 2);
        assert_eq!(h.rho, Some(0));
        assert_eq!(h.entries, vec![0, 3]);
        assert_eq!(h.exit_lengths, vec![Some(2), None]);
        let h = hitting_times(&[Residual, Omega(3)], 2);
        assert_eq!(h.rho, None);
        assert!(h.exit_lengths.is_empty());
    }

    #[test]
    fn residual_does_not_end_a_sojourn() {
        let h = hitting_times(&[Omega(1), Residual, Omega(1), Omega(2)], 1);
        assert_eq!(h.entries, vec![0, 2]);
        assert_eq!(h.exit_lengths, vec![Some(3)]);
    }

    #[test]
    fn observer_matches_batch_counters() {
        let g = Graph::cycle(8).unwrap();
        let d = Density::for_graph(1.5, &g).unwrap();
        let mut chain = KcipChain::new(&g, SpinConfig::from_vertices(8, [0, 1]), d, 4);
        let mut path = vec![chain.state().clone()];
        for _ in 0..5000 {
            chain.step();
            path.push(chain.state().clone());
        }
        let classes = class_sequence(&g, &path);
        let batch = occupation_counters(&classes);

        let mut obs = OccupationObserver::new(4);
        simulate(&g, &path[0], 5000, 4, d, &mut [&mut obs]);
        obs.finish();
        for k in 1..=4 {
            assert_eq!(obs.kappa(k) as usize, batch.kappa(Omega(k)));
            assert_eq!(obs.hitting(k), &hitting_times(&classes, k));
        }
        assert_eq!(obs.rest() as usize, batch.kappa(Residual));
        assert!((obs.fractions().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exceedance_bounds() {
        let g = Graph::cycle(6).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let x0 = SpinConfig::from_vertices(6, [0]);
        let e = occupation_exceedance(&g, &x0, d, 1, 0, 50, 40, 9).unwrap();
        assert!((0.0..=1.0).contains(&e.probability));
        let never = occupation_exceedance(&g, &x0, d, 1, 50, 50, 10, 9).unwrap();
        assert_eq!(never.probability, 0.0);
    }
}
