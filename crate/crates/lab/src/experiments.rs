//! One function per experiment kind, each turning a config into a report.

use num_traits::ToPrimitive;
use rayon::prelude::*;

use kcip_core::chains::{
    meeting_time_exact, mh_sep_kernel, run_until_collision, sep_kernel, triple_time_asymptote, triple_time_exact,
    triple_time_mc, CoalescenceState,
};
use kcip_core::components::{components_of_set, corrected_count_mc, CollisionObserver, CorrectedCounter, DEFAULT_EXACT_CAP};
use kcip_core::exact::{
    build_kernel, mixing_profile, spectral_gap, stationary_solve, trace_kernel, tv_distance, OccupationObserver,
    StateClass,
};
use kcip_core::kcip::{drift_curve, simulate, stationary_prob, KcipChain};
use kcip_core::rng::{replicate_rng, replicate_seed};
use kcip_core::stats::{loglog_slope, mean_stderr};
use kcip_core::{Density, Error, Graph, SpinConfig, Vertex};

use crate::config::{parse_list, ExperimentConfig, Kind};
use crate::error::{LabError, LabResult};
use crate::report::{flag, float, opt_int, Report};

pub fn run(cfg: &ExperimentConfig) -> LabResult<Report> {
    match cfg.kind {
        Kind::Stationarity => stationarity(cfg),
        Kind::MixingScan => mixing_scan(cfg),
        Kind::TripleScaling => triple_scaling(cfg),
        Kind::DriftCurve => drift(cfg),
        Kind::Occupation => occupation(cfg),
        Kind::Collisions => collisions(cfg),
        Kind::CoalescenceMeeting => coalescence_meeting(cfg),
        Kind::CorrectedCount => corrected_count(cfg),
        Kind::TraceCheck => trace_check(cfg),
        Kind::SepCheck => sep_check(cfg),
    }
}

fn graph(cfg: &ExperimentConfig) -> LabResult<Graph> {
    let spec = cfg
        .graph
        .as_deref()
        .ok_or_else(|| LabError::config(format!("{} needs --graph", cfg.kind)))?;
    Graph::from_spec(spec).map_err(|e| LabError::config(e.to_string()))
}

fn density(cfg: &ExperimentConfig, g: &Graph) -> LabResult<Density> {
    Density::for_graph(cfg.c, g).map_err(|e| LabError::config(e.to_string()))
}

/// Comma-separated vertex ids, checked against `g`.
fn vertex_set(g: &Graph, key: &str, raw: &str) -> LabResult<Vec<Vertex>> {
    let set: Vec<Vertex> = parse_list(key, raw)?;
    match set.iter().find(|&&v| v >= g.n()) {
        Some(v) => Err(LabError::config(format!("{key}: vertex {v} out of range 0..{}", g.n()))),
        None => Ok(set),
    }
}

/// `start=all` (default), `start=single` (vertex 0) or a vertex-set literal.
fn start(cfg: &ExperimentConfig, g: &Graph) -> LabResult<SpinConfig> {
    let x0 = match cfg.param_str("start").unwrap_or("all") {
        "all" => SpinConfig::full(g.n()),
        "single" => SpinConfig::from_vertices(g.n(), [0]),
        raw => SpinConfig::from_vertices(g.n(), vertex_set(g, "start", raw)?),
    };
    if x0.count() == 0 {
        return Err(LabError::config("start configuration is empty"));
    }
    Ok(x0)
}

fn horizon(cfg: &ExperimentConfig, default: u64) -> LabResult<u64> {
    match cfg.horizon.unwrap_or(default) {
        0 => Err(LabError::config("horizon must be at least 1")),
        h => Ok(h),
    }
}

fn class_name(class: StateClass) -> String {
    match class {
        StateClass::Omega(k) => format!("omega_{k}"),
        StateClass::Residual => "residual".to_string(),
    }
}

/// Exact stationary law against visit frequencies pooled over replicates.
fn stationarity(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["start"])?;
    let g = graph(cfg)?;
    let d = density(cfg, &g)?;
    let x0 = start(cfg, &g)?;
    let t = horizon(cfg, 100_000)?;
    let k = build_kernel(&g, d)?;
    let solved = stationary_solve(&k.kernel)?;
    let states = k.space.len();
    let visits: Vec<u64> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let mut counts = vec![0u64; states];
            let mut chain = KcipChain::with_rng(&g, x0.clone(), d, replicate_rng(cfg.seed, r));
            for _ in 0..t {
                chain.step();
                // the empty configuration is unreachable from a non-empty start
                if let Some(i) = k.space.index(chain.state()) {
                    counts[i] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0; states],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let total = (t * cfg.reps) as f64;
    let freq: Vec<f64> = visits.iter().map(|&c| c as f64 / total).collect();
    let mut rep = Report::new(cfg, &["state", "count", "class", "pi_closed", "pi_solved", "freq_sim"]);
    rep.note("states", states);
    rep.note("balance_violation", float(k.kernel.detailed_balance_violation(&solved)));
    rep.note("tv_sim", float(tv_distance(&freq, &solved)?));
    for i in 0..states {
        let x = k.space.config(i);
        rep.push(vec![
            x.to_hex(),
            x.count().to_string(),
            class_name(k.space.class(i)),
            float(stationary_prob(&x, d)),
            float(solved[i]),
            float(freq[i]),
        ]);
    }
    Ok(rep)
}

/// Worst-start TV distance `d(t)` until it drops below `epsilon`.
fn mixing_scan(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["epsilon"])?;
    let g = graph(cfg)?;
    let d = density(cfg, &g)?;
    let epsilon: f64 = cfg.param("epsilon", 0.25)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LabError::config(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let t = horizon(cfg, 100_000)?;
    let k = build_kernel(&g, d)?;
    let pi = k.kernel.stationary()?.to_vec();
    let profile = mixing_profile(&k.kernel, &pi, epsilon, t as usize)?;
    let mut rep = Report::new(cfg, &["t", "tv"]);
    rep.note("epsilon", float(epsilon));
    rep.note("tau", profile.tau);
    rep.note("spectral_gap", float(spectral_gap(&k.kernel)?));
    for (t, dist) in profile.distances.iter().enumerate() {
        rep.push(vec![t.to_string(), float(*dist)]);
    }
    Ok(rep)
}

/// `mode=exact` tabulates the first-step solution against the asymptote;
/// `mode=mc` samples `ζ_triple` on the configured graph.
fn triple_scaling(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["mode", "n", "m"])?;
    match cfg.param_str("mode").unwrap_or("exact") {
        "exact" => triple_exact(cfg),
        "mc" => triple_mc(cfg),
        other => Err(LabError::config(format!("triple-scaling mode must be exact or mc, got {other:?}"))),
    }
}

fn triple_exact(cfg: &ExperimentConfig) -> LabResult<Report> {
    let ns: Vec<u64> = cfg.param_list("n", &[100, 1_000, 10_000, 100_000])?;
    let ms: Vec<u64> = match (&cfg.graph, cfg.params.contains_key("m")) {
        (Some(_), false) => {
            let g = graph(cfg)?;
            vec![g
                .regular_degree()
                .ok_or_else(|| LabError::config("graph is not regular; pass m"))? as u64]
        }
        _ => cfg.param_list("m", &[2, 4, 6])?,
    };
    if ns.len() < 2 {
        return Err(LabError::config("triple-scaling needs at least two values of n"));
    }
    let mut rep = Report::new(cfg, &["n", "c", "m", "exact", "asymptote", "rel_error"]);
    for &m in &ms {
        let mut exact = Vec::with_capacity(ns.len());
        for &n in &ns {
            let e = triple_time_exact(n, cfg.c, m)?;
            let a = triple_time_asymptote(n, cfg.c, m);
            exact.push(e);
            rep.push(vec![n.to_string(), float(cfg.c), m.to_string(), float(e), float(a), float(e / a - 1.0)]);
        }
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        rep.note(&format!("slope_m{m}"), float(loglog_slope(&x, &exact)));
    }
    Ok(rep)
}

fn triple_mc(cfg: &ExperimentConfig) -> LabResult<Report> {
    let g = graph(cfg)?;
    let (m, triangle_free) = g.check_regular_triangle_free();
    let n = g.n() as u64;
    let exact = match m {
        Some(m) if triangle_free && m > 1 => Some(triple_time_exact(n, cfg.c, m as u64)?),
        _ => None,
    };
    let default_cutoff = exact.map_or(10_000_000, |e| (1_000.0 * e).ceil() as u64);
    let cutoff = horizon(cfg, default_cutoff)?;
    let s = triple_time_mc(&g, cfg.c, cfg.seed, cfg.reps, cutoff)?;
    let mut rep = Report::new(cfg, &["run_id", "seed", "zeta_triple", "censored"]);
    if let Some(e) = exact {
        rep.note("exact", float(e));
    }
    rep.note("mean", float(s.mean));
    rep.note("stderr", float(s.stderr));
    rep.note("censored", s.censored);
    for (r, t) in s.samples.iter().enumerate() {
        let r = r as u64;
        rep.push(vec![
            r.to_string(),
            replicate_seed(cfg.seed, r).to_string(),
            opt_int(*t),
            flag(t.is_none()),
        ]);
    }
    Ok(rep)
}

/// Mean `V_t` from the start configuration (all ones by default).
fn drift(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["start", "points"])?;
    let g = graph(cfg)?;
    let d = density(cfg, &g)?;
    let x0 = start(cfg, &g)?;
    let n = g.n() as u64;
    let t = horizon(cfg, 20 * n * n * n)?;
    let points: u64 = cfg.param("points", 20)?;
    if points == 0 {
        return Err(LabError::config("points must be at least 1"));
    }
    let curve = drift_curve(&g, &x0, d, t, points, cfg.reps, cfg.seed);
    let mut rep = Report::new(cfg, &["t", "mean", "stderr"]);
    rep.note("v0", x0.count());
    for p in curve {
        rep.push(vec![p.t.to_string(), float(p.mean), float(p.stderr)]);
    }
    Ok(rep)
}

/// `κ_k(T)/T` for `k ≤ k_max` and the rest bucket, one row per replicate.
fn occupation(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["start"])?;
    let g = graph(cfg)?;
    let d = density(cfg, &g)?;
    let x0 = start(cfg, &g)?;
    let t = horizon(cfg, 100_000)?;
    let k_max = cfg.k_max;
    let runs: Vec<Vec<f64>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let mut obs = OccupationObserver::new(k_max);
            simulate(&g, &x0, t, replicate_seed(cfg.seed, r), d, &mut [&mut obs]);
            obs.fractions()
        })
        .collect();
    let mut header = vec!["run_id".to_string(), "seed".to_string()];
    header.extend((1..=k_max).map(|k| format!("omega_{k}")));
    header.push("rest".to_string());
    let mut rep = Report::with_header(cfg, header);
    for (b, name) in (1..=k_max).map(|k| (k - 1, format!("omega_{k}"))).chain([(k_max, "rest".to_string())]) {
        let column: Vec<f64> = runs.iter().map(|f| f[b]).collect();
        let (mean, se) = mean_stderr(&column);
        rep.note(&format!("mean_{name}"), float(mean));
        rep.note(&format!("stderr_{name}"), float(se));
    }
    // exact class masses when the state space is small enough
    if let Ok(k) = build_kernel(&g, d) {
        let pi = k.kernel.stationary()?;
        let mut mass = vec![0.0; k_max + 1];
        for (i, p) in pi.iter().enumerate() {
            match k.space.class(i) {
                StateClass::Omega(j) if j <= k_max => mass[j - 1] += p,
                _ => mass[k_max] += p,
            }
        }
        for (j, m) in mass.iter().enumerate().take(k_max) {
            rep.note(&format!("pi_omega_{}", j + 1), float(*m));
        }
        rep.note("pi_rest", float(mass[k_max]));
    }
    for (r, f) in runs.iter().enumerate() {
        let r = r as u64;
        let mut row = vec![r.to_string(), replicate_seed(cfg.seed, r).to_string()];
        row.extend(f.iter().map(|&x| float(x)));
        rep.push(row);
    }
    Ok(rep)
}

/// Steps at which the number of occupied components drops.
fn collisions(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["start"])?;
    let g = graph(cfg)?;
    let d = density(cfg, &g)?;
    let x0 = start(cfg, &g)?;
    let t = horizon(cfg, 100_000)?;
    let runs: Vec<(usize, Option<u64>, usize)> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let mut obs = CollisionObserver::default();
            simulate(&g, &x0, t, replicate_seed(cfg.seed, r), d, &mut [&mut obs]);
            (obs.count(), obs.first(), obs.sizes.iter().copied().max().unwrap_or(0))
        })
        .collect();
    let mut rep = Report::new(cfg, &["run_id", "seed", "collisions", "tau_col", "max_size", "censored"]);
    for (r, (count, first, size)) in runs.into_iter().enumerate() {
        let r = r as u64;
        rep.push(vec![
            r.to_string(),
            replicate_seed(cfg.seed, r).to_string(),
            count.to_string(),
            opt_int(first),
            size.to_string(),
            flag(first.is_none()),
        ]);
    }
    Ok(rep)
}

/// Coalescence runs until the first merge, with near-collision times.
fn coalescence_meeting(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["sites", "q", "near"])?;
    let g = graph(cfg)?;
    let sites = match cfg.param_str("sites") {
        Some(raw) => vertex_set(&g, "sites", raw)?,
        None => vec![0, g.n() / 2],
    };
    let q: f64 = cfg.param("q", 1.0 / sites.len() as f64)?;
    let near: Vec<usize> = cfg.param_list("near", &[1])?;
    let t = horizon(cfg, 100_000_000)?;
    let s0 = CoalescenceState::new(&g, sites.clone(), q)?;
    let runs = (0..cfg.reps)
        .into_par_iter()
        .map(|r| run_until_collision(&g, s0.clone(), t, &near, &mut replicate_rng(cfg.seed, r)))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut header = vec!["run_id".to_string(), "seed".to_string(), "tau_col".to_string()];
    header.extend(near.iter().map(|i| format!("tau_near_{i}")));
    header.push("censored".to_string());
    let mut rep = Report::with_header(cfg, header);
    if let [a, b] = sites[..] {
        if q > 0.0 {
            rep.note("exact", float(meeting_time_exact(&g, a, b, q)?));
        }
    }
    let done: Vec<f64> = runs.iter().filter_map(|r| r.tau_col).map(|t| t as f64).collect();
    let (mean, se) = if done.is_empty() { (f64::NAN, f64::NAN) } else { mean_stderr(&done) };
    rep.note("mean", float(mean));
    rep.note("stderr", float(se));
    rep.note("censored", runs.len() - done.len());
    for (r, run) in runs.iter().enumerate() {
        let r = r as u64;
        let mut row = vec![r.to_string(), replicate_seed(cfg.seed, r).to_string(), opt_int(run.tau_col)];
        row.extend(run.tau_near.iter().map(|&t| opt_int(t)));
        row.push(flag(run.tau_col.is_none()));
        rep.push(row);
    }
    Ok(rep)
}

/// `N_H` per component of `H`: exact when the component fits under `cap`,
/// Monte Carlo otherwise.
fn corrected_count(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["set", "cap", "mc_reps"])?;
    let g = graph(cfg)?;
    let raw = cfg
        .param_str("set")
        .ok_or_else(|| LabError::config("corrected-count needs set=<vertex ids>"))?;
    let h = vertex_set(&g, "set", raw)?;
    let cap: usize = cfg.param("cap", DEFAULT_EXACT_CAP)?;
    if cap > 32 {
        return Err(LabError::config("cap must be at most 32"));
    }
    let mc_reps: u64 = cfg.param("mc_reps", 100_000)?;
    let mut counter = CorrectedCounter::new(cap);
    let mut rep = Report::new(cfg, &["component", "size", "method", "value", "exact", "stderr"]);
    let (mut total, mut var) = (0.0, 0.0);
    // validates the set (distinct vertices) before splitting it
    if let Err(e @ Error::InvalidParameter(_)) = counter.exact(&g, &h) {
        return Err(e.into());
    }
    for (i, comp) in components_of_set(&g, &h).iter().enumerate() {
        let row = match counter.exact(&g, comp) {
            Ok(q) => {
                let v = q.to_f64().unwrap_or(f64::NAN);
                total += v;
                vec!["exact".to_string(), float(v), q.to_string(), float(0.0)]
            }
            Err(Error::SizeLimit { .. }) => {
                let (v, se) = corrected_count_mc(&g, comp, mc_reps, replicate_seed(cfg.seed, i as u64))?;
                total += v;
                var += se * se;
                vec!["mc".to_string(), float(v), String::new(), float(se)]
            }
            Err(e) => return Err(e.into()),
        };
        let mut full = vec![i.to_string(), comp.len().to_string()];
        full.extend(row);
        rep.push(full);
    }
    rep.note("total", float(total));
    rep.note("total_stderr", float(var.sqrt()));
    Ok(rep)
}

/// Trace of the exact kernel on `Ω_k`, whose stationary law is uniform.
fn trace_check(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["k"])?;
    let g = graph(cfg)?;
    let d = density(cfg, &g)?;
    let k: usize = cfg.param("k", 2)?;
    let kern = build_kernel(&g, d)?;
    let subset = kern.space.omega(k);
    if subset.is_empty() {
        return Err(LabError::config(format!("Ω_{k} is empty on {}", g)));
    }
    let tr = trace_kernel(&kern.kernel, &subset)?;
    let pi = stationary_solve(&tr)?;
    let u = 1.0 / subset.len() as f64;
    let mut rep = Report::new(cfg, &["state", "pi_trace", "pi_uniform"]);
    rep.note("states", subset.len());
    rep.note("row_error", float(tr.max_row_sum_error()));
    rep.note("max_deviation", float(pi.iter().map(|p| (p - u).abs()).fold(0.0, f64::max)));
    for (i, &s) in subset.iter().enumerate() {
        rep.push(vec![kern.space.config(s).to_hex(), float(pi[i]), float(u)]);
    }
    Ok(rep)
}

/// Stationary law of SEP (`chain=sep`) or MH-SEP (`chain=mh`) with `k`
/// particles.
fn sep_check(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.check_params(&["k", "chain"])?;
    let g = graph(cfg)?;
    let k: usize = cfg.param("k", 2)?;
    let ek = match cfg.param_str("chain").unwrap_or("sep") {
        "sep" => sep_kernel(&g, k)?,
        "mh" => mh_sep_kernel(&g, k)?,
        other => return Err(LabError::config(format!("chain must be sep or mh, got {other:?}"))),
    };
    let pi = stationary_solve(&ek.kernel)?;
    let u = 1.0 / ek.states.len() as f64;
    let mut rep = Report::new(cfg, &["state", "pi", "pi_uniform"]);
    rep.note("states", ek.states.len());
    rep.note("max_deviation", float(pi.iter().map(|p| (p - u).abs()).fold(0.0, f64::max)));
    for (x, p) in ek.states.iter().zip(&pi) {
        rep.push(vec![x.to_hex(), float(*p), float(u)]);
    }
    Ok(rep)
}
