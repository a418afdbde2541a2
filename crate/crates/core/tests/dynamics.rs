use std::collections::HashMap;

use kcip_core::exact::build_kernel;
use kcip_core::kcip::{kcip_step, KcipChain};
use kcip_core::{Density, Graph, SpinConfig, UpdateDraw};
use proptest::prelude::*;

fn path(n: usize) -> Graph {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

fn small_graphs() -> Vec<Graph> {
    let mut gs: Vec<Graph> = (3..=10).map(|n| Graph::cycle(n).unwrap()).collect();
    gs.extend((2..=9).map(|k| Graph::star(k).unwrap()));
    gs.extend((3..=10).map(path));
    gs.push(Graph::torus(3, 2).unwrap());
    gs
}

/// Unnormalised product weight over non-empty configurations.
fn weight(x: u32, n: usize, p: f64) -> f64 {
    let k = x.count_ones() as i32;
    p.powi(k) * (1.0 - p).powi(n as i32 - k)
}

#[test]
fn detailed_balance_exhaustive() {
    for g in small_graphs() {
        for c in [0.5, 1.0, 2.5] {
            let n = g.n();
            let d = Density::for_graph(c, &g).unwrap();
            let p = d.p();
            let k = build_kernel(&g, d).unwrap();
            let z: f64 = (1..1u32 << n).map(|x| weight(x, n, p)).sum();
            let pi = |x: u32| weight(x, n, p) / z;
            for i in 0..k.space.len() {
                let x = k.space.mask(i);
                for v in 0..n {
                    let y = x ^ (1 << v);
                    let active = g.neighbors(v).iter().any(|&u| x & (1 << u) != 0);
                    let expected = match (active, x & (1 << v) != 0) {
                        (false, _) => 0.0,
                        (true, false) => p / n as f64,
                        (true, true) => (1.0 - p) / n as f64,
                    };
                    let j = k.space.index(&SpinConfig::from_mask(n, y as u64));
                    let got = j.map_or(0.0, |j| k.kernel.get(i, j));
                    assert!((got - expected).abs() < 1e-15, "{g}: P({x:b}, {y:b}) = {got}, expected {expected}");
                    if let Some(j) = j {
                        let lhs = pi(x) * got;
                        let rhs = pi(y) * k.kernel.get(j, i);
                        assert!((lhs - rhs).abs() < 1e-12, "{g}: balance {lhs} vs {rhs}");
                    }
                }
            }
        }
    }
}

#[test]
fn c4_visit_frequencies_approach_stationary_law() {
    let g = Graph::cycle(4).unwrap();
    let d = Density::for_graph(1.0, &g).unwrap();
    let mut chain = KcipChain::new(&g, SpinConfig::full(4), d, 123);
    let mut visits: HashMap<u64, u64> = HashMap::new();
    let steps = 10_000_000u64;
    for _ in 0..steps {
        chain.step();
        *visits.entry(chain.state().to_mask().unwrap()).or_default() += 1;
    }
    let z: f64 = (1..16u32).map(|x| weight(x, 4, d.p())).sum();
    let tv: f64 = 0.5
        * (1..16u32)
            .map(|x| (visits.get(&(x as u64)).copied().unwrap_or(0) as f64 / steps as f64 - weight(x, 4, d.p()) / z).abs())
            .sum::<f64>();
    assert!(tv <= 0.02, "TV {tv}");
}

#[test]
fn single_particle_holding_probability_on_c4() {
    // only the two neighbours can flip, each with probability (1/4)(1/4)
    let g = Graph::cycle(4).unwrap();
    let d = Density::for_graph(1.0, &g).unwrap();
    let k = build_kernel(&g, d).unwrap();
    let i = k.space.index(&SpinConfig::from_vertices(4, [0])).unwrap();
    assert!((k.kernel.get(i, i) - 7.0 / 8.0).abs() < 1e-15);
}

fn graph_strategy() -> impl Strategy<Value = Graph> {
    prop_oneof![
        (3usize..12).prop_map(|n| Graph::cycle(n).unwrap()),
        (3usize..6, 2usize..4).prop_map(|(l, d)| Graph::torus(l, d).unwrap()),
        (2usize..8).prop_map(|k| Graph::star(k).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steps_flip_at_most_one_active_vertex(g in graph_strategy(), seed in any::<u64>(), c in 0.2f64..2.0) {
        let d = Density::for_graph(c, &g).unwrap();
        let mut chain = KcipChain::new(&g, SpinConfig::from_vertices(g.n(), [0]), d, seed);
        for _ in 0..2_000 {
            let before = chain.state().clone();
            let (draw, flipped) = chain.step();
            let after = chain.state();
            prop_assert!(after.count() >= 1);
            prop_assert_eq!(after, &kcip_step(&g, &before, draw, d));
            let diff: Vec<_> = (0..g.n()).filter(|&v| before.get(v) != after.get(v)).collect();
            match flipped {
                Some(v) => {
                    prop_assert_eq!(diff, vec![v]);
                    prop_assert!(g.neighbors(v).iter().any(|&u| before.get(u)));
                }
                None => prop_assert!(diff.is_empty()),
            }
        }
    }

    #[test]
    fn threshold_tie_sets_label_to_one(n in 4usize..12) {
        let g = Graph::cycle(n).unwrap();
        let d = Density::for_graph(1.0, &g).unwrap();
        let x = SpinConfig::from_vertices(n, [0]);
        let y = kcip_step(&g, &x, UpdateDraw::new(1, d.p()), d);
        prop_assert!(y.get(1));
    }
}
