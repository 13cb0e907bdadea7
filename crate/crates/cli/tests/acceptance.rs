//! Acceptance suite.
//!
//! Runs every criterion, prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Run with
//!
//! ```text
//! cargo test -p coopsim-cli --test acceptance
//! ```

use std::cmp::Ordering;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use coopsim::dynamics::{fermi_probability, UpdateRuleConfig};
use coopsim::engine::{
    efficiency_frontier, run_from_state, run_replicate, run_replicates, Ensemble, ExperimentConfig, FinalState,
    RunConfig, SweepSummary,
};
use coopsim::game::{accumulate_scores, pairwise_payoff, PayoffParams, StrategyVector, C, D};
use coopsim::interference::{eligible_set, Composition, InterferenceConfig, Scheme, SchemeSet};
use coopsim::network::{self, degree_percentiles, Graph, NetworkConfig, NetworkModel};
use coopsim::prelude::UpdateRule;
use coopsim::seed::{rng, ReplicateSeeds};

/// Outcome of one criterion: pass flag and a one-line measurement summary.
struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "payoff oracle equivalence", budget: Some(Duration::from_secs(5)), check: payoff_oracle },
        Criterion { id: 2, name: "Fermi identities", budget: Some(Duration::from_secs(1)), check: fermi_identities },
        Criterion { id: 3, name: "network structure", budget: Some(Duration::from_secs(30)), check: network_structure },
        Criterion { id: 4, name: "absorption", budget: Some(Duration::from_secs(10)), check: absorption },
        Criterion { id: 5, name: "guaranteed takeover", budget: Some(Duration::from_secs(30)), check: takeover },
        Criterion { id: 6, name: "cyclic exploitation regime", budget: Some(Duration::from_secs(300)), check: cyclic_exploitation },
        Criterion { id: 7, name: "baseline heterogeneity effect", budget: Some(Duration::from_secs(600)), check: baseline_heterogeneity },
        Criterion { id: 8, name: "frontier correctness", budget: Some(Duration::from_secs(1)), check: frontier_correctness },
        // Budget is relative to the sweep itself and checked inside.
        Criterion { id: 9, name: "reproducibility", budget: None, check: reproducibility },
        Criterion { id: 10, name: "threshold monotonicity", budget: Some(Duration::from_secs(5)), check: threshold_monotonicity },
    ];

    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.check));
        let elapsed = start.elapsed();
        let mut o = result.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if let Some(budget) = c.budget {
            if elapsed > budget {
                o.pass = false;
                o.detail += &format!("; over budget {budget:?}");
            }
        }
        println!(
            "{} criterion {:>2} ({}): {} [{:.2?}]",
            if o.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            o.detail,
            elapsed
        );
        if !o.pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

/// Connected random graph on `n` nodes: a random spanning tree plus extra
/// edges with probability `p`.
fn random_connected(n: usize, p: f64, r: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((r.random_range(0..v), v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if r.random_bool(p) && !edges.contains(&(u, v)) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

fn payoff_oracle() -> Outcome {
    let mut r = rng(1);
    let mut mismatches = 0;
    for case in 0..100 {
        let n = r.random_range(3..=50);
        let g = match case % 3 {
            0 => network::generate(&NetworkConfig::new(NetworkModel::Ba, n, 0), &mut r).unwrap(),
            1 => network::generate(&NetworkConfig::new(NetworkModel::Dms, n, 0), &mut r).unwrap(),
            _ => random_connected(n, 0.15, &mut r),
        };
        let s = StrategyVector::random(n, &mut r);
        for b in [1.2, 1.8, 2.0] {
            let p = PayoffParams { b };
            let got = accumulate_scores(&g, &s, &p);
            // Every ordered pair (i, j) of adjacent nodes, partners ascending.
            let mut expected = vec![0.0; n];
            for (i, slot) in expected.iter_mut().enumerate() {
                for j in 0..n {
                    if i != j && g.has_edge(i, j) {
                        *slot += pairwise_payoff(s.get(i), s.get(j), &p);
                    }
                }
            }
            if got.as_slice() != expected.as_slice() {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("300 (graph, b) cases, {mismatches} mismatches"))
}

fn fermi_identities() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let mut half_ok = true;
    for _ in 0..10_000 {
        let (fa, fb) = (r.random_range(0.0..200.0), r.random_range(0.0..200.0));
        let k = r.random_range(0.01..10.0);
        worst = worst.max((fermi_probability(fa, fb, k) + fermi_probability(fb, fa, k) - 1.0).abs());
        half_ok &= fermi_probability(fa, fa, k) == 0.5;
    }
    let mut monotone = true;
    for _ in 0..100 {
        let fa = r.random_range(0.0..100.0);
        let k = r.random_range(0.01..10.0);
        let mut fbs: Vec<f64> = (0..100).map(|_| r.random_range(0.0..100.0)).collect();
        fbs.sort_by(f64::total_cmp);
        let ps: Vec<f64> = fbs.iter().map(|&fb| fermi_probability(fa, fb, k)).collect();
        monotone &= ps.windows(2).all(|w| w[0] <= w[1]);
    }
    outcome(
        worst <= 1e-12 && half_ok && monotone,
        format!("max |p(A,B)+p(B,A)-1| = {worst:.2e}, p(f,f)=0.5: {half_ok}, monotone: {monotone}"),
    )
}

const MLE_K_MIN: usize = 4;

fn network_structure() -> Outcome {
    let n = 2000;
    let gen = |model, seed| network::generate_seeded(&NetworkConfig::new(model, n, seed)).unwrap();
    let ba: Vec<Graph> = (0..10).map(|s| gen(NetworkModel::Ba, 1000 + s)).collect();
    let dms: Vec<Graph> = (0..10).map(|s| gen(NetworkModel::Dms, 2000 + s)).collect();
    let deg_ok = ba.iter().chain(&dms).all(|g| (3.9..=4.0).contains(&g.average_degree()));
    let mean_t = |gs: &[Graph]| gs.iter().map(network::global_transitivity).sum::<f64>() / gs.len() as f64;
    let (t_ba, t_dms) = (mean_t(&ba), mean_t(&dms));
    let alpha = network::power_law_exponent(ba.iter().flat_map(|g| g.degrees()), MLE_K_MIN).unwrap_or(f64::NAN);
    let pass = deg_ok && t_dms >= 5.0 * t_ba && (2.5..=3.5).contains(&alpha);
    outcome(
        pass,
        format!(
            "<k> in [3.9,4.0]: {deg_ok} (BA {:.4}, DMS {:.4}); transitivity BA {t_ba:.4} DMS {t_dms:.4} (x{:.1}); BA alpha(k_min={MLE_K_MIN}) = {alpha:.3}",
            ba[0].average_degree(),
            dms[0].average_degree(),
            t_dms / t_ba
        ),
    )
}

fn every_scheme() -> Vec<InterferenceConfig> {
    let mut out = vec![
        InterferenceConfig::baseline(),
        InterferenceConfig::pop(5.0, 1.0),
        InterferenceConfig::neb(5.0, 1.0),
        InterferenceConfig::ni(5.0, 0.0),
    ];
    for composition in [Composition::All, Composition::Any] {
        out.push(InterferenceConfig {
            schemes: SchemeSet::new([Scheme::Neb, Scheme::Ni]),
            theta: Some(3.0),
            n_c: Some(1.0),
            c_i: Some(0.05),
            composition,
            ..Default::default()
        });
        out.push(InterferenceConfig {
            schemes: SchemeSet::new([Scheme::Pop, Scheme::Neb, Scheme::Ni]),
            theta: Some(3.0),
            p_c: Some(1.0),
            n_c: Some(1.0),
            c_i: Some(0.0),
            composition,
            ..Default::default()
        });
    }
    out
}

fn absorption() -> Outcome {
    let schemes = every_scheme();
    let mut violations = 0;
    for run in 0..100usize {
        let model = if run % 2 == 0 { NetworkModel::Ba } else { NetworkModel::Dms };
        let net = NetworkConfig::new(model, 300, run as u64);
        let g = network::generate_seeded(&net).unwrap();
        let strategy = if (run / 2) % 2 == 0 { C } else { D };
        let cfg = RunConfig::new(net, UpdateRuleConfig::deterministic(), schemes[run % schemes.len()].clone());
        let r = run_from_state(&cfg, &g, StrategyVector::uniform(300, strategy), &mut rng(run as u64)).unwrap();
        let x = if strategy == C { 1.0 } else { 0.0 };
        let unchanged = r.trace.len() == 75 && r.trace.iter().all(|t| t.coop_fraction == x && t.invested_count == 0);
        let expected_final = if strategy == C { FinalState::AllCooperate } else { FinalState::AllDefect };
        if !(unchanged && r.total_cost == 0.0 && r.final_state == expected_final) {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("100 homogeneous runs, {violations} changed or paid"))
}

fn takeover() -> Outcome {
    let b = 1.8;
    let mut failures = Vec::new();
    let mut worst_margin = i64::MIN;
    let mut checked = 0;
    for graph in 0..3u64 {
        let net = NetworkConfig::new(NetworkModel::Ba, 500, 50 + graph);
        let g = network::generate_seeded(&net).unwrap();
        let diameter = g.diameter();
        let theta = 2.0 * b * g.max_degree() as f64;
        let mut cfg = RunConfig::new(net, UpdateRuleConfig::deterministic(), InterferenceConfig::pop(theta, 1.0));
        cfg.payoff = PayoffParams { b };
        for realisation in 0..10 {
            let seeds = ReplicateSeeds::derive(99, graph as usize, realisation);
            let init = StrategyVector::random(500, &mut rng(seeds.init));
            if init.cooperator_count() == 0 {
                continue;
            }
            checked += 1;
            let r = run_replicate(&cfg, &g, seeds).unwrap();
            match r.absorbed_at {
                Some(t) if r.final_state == FinalState::AllCooperate && t <= diameter + 2 => {
                    worst_margin = worst_margin.max(t as i64 - diameter as i64);
                }
                other => failures.push(format!("graph {graph} run {realisation}: {other:?} {:?}", r.final_state)),
            }
        }
    }
    outcome(
        failures.is_empty() && checked == 30,
        format!(
            "{checked} replicates, {} failed; max(absorption - diameter) = {worst_margin}{}",
            failures.len(),
            failures.first().map(|f| format!("; first failure {f}")).unwrap_or_default()
        ),
    )
}

fn mean_coop(results: &[coopsim::engine::RunResult]) -> f64 {
    results.iter().map(|r| r.mean_coop).sum::<f64>() / results.len() as f64
}

fn cyclic_exploitation() -> Outcome {
    let mut exp = ExperimentConfig::new(NetworkConfig::new(NetworkModel::Ba, 2000, 0), UpdateRuleConfig::deterministic());
    exp.payoff = PayoffParams { b: 1.8 };
    exp.graphs = 10;
    exp.realisations = 6;
    exp.master_seed = 2024;
    let ens = Ensemble::generate(&exp).unwrap();
    let base = run_replicates(&exp, &ens, &InterferenceConfig::baseline()).unwrap();
    let pop = run_replicates(&exp, &ens, &InterferenceConfig::pop(5.0, 0.8)).unwrap();
    let oscillating = pop
        .iter()
        .filter(|r| r.final_state == FinalState::Mixed && r.trailing_range(25) > 0.02)
        .count();
    let (def_base, def_pop) = (1.0 - mean_coop(&base), 1.0 - mean_coop(&pop));
    let not_helped = def_pop >= def_base - 0.02;
    outcome(
        oscillating >= 1 && not_helped,
        format!(
            "{} replicates; oscillating non-homogeneous at t=75: {oscillating}; defection baseline {def_base:.4}, POP {def_pop:.4} (need POP >= baseline - 0.02: {not_helped})",
            pop.len()
        ),
    )
}

fn baseline_heterogeneity() -> Outcome {
    let coop = |model| {
        let mut exp = ExperimentConfig::new(NetworkConfig::new(model, 1000, 0), UpdateRuleConfig::stochastic(0.1));
        exp.payoff = PayoffParams { b: 1.8 };
        exp.generations = Some(500);
        exp.graphs = 10;
        exp.realisations = 6;
        exp.master_seed = 7;
        let ens = Ensemble::generate(&exp).unwrap();
        mean_coop(&run_replicates(&exp, &ens, &InterferenceConfig::baseline()).unwrap())
    };
    let (ba, dms) = (coop(NetworkModel::Ba), coop(NetworkModel::Dms));
    outcome(
        dms - ba >= 0.05,
        format!("60 replicates each; baseline coop BA {ba:.4}, DMS {dms:.4}, difference {:.4}", dms - ba),
    )
}

fn synthetic_table(r: &mut impl Rng) -> Vec<SweepSummary> {
    let scheme_sets = [
        SchemeSet::new([Scheme::Pop]),
        SchemeSet::new([Scheme::Neb]),
        SchemeSet::new([Scheme::Ni]),
        SchemeSet::new([Scheme::Neb, Scheme::Ni]),
    ];
    (0..1000)
        .map(|_| {
            let schemes = scheme_sets[r.random_range(0..scheme_sets.len())].clone();
            let grid = |r: &mut dyn rand::RngCore| (r.random_range(0..=10) as f64) / 10.0;
            let interference = InterferenceConfig {
                theta: Some([0.5, 1.0, 2.0, 5.0][r.random_range(0..4)]),
                p_c: schemes.contains(Scheme::Pop).then(|| grid(r)),
                n_c: schemes.contains(Scheme::Neb).then(|| grid(r)),
                c_i: schemes.contains(Scheme::Ni).then(|| grid(r)),
                schemes,
                ..Default::default()
            };
            // Coarse values force plenty of exact ties.
            let cost_mean = if r.random_bool(0.05) { 0.0 } else { r.random_range(1..=40) as f64 * 25.0 };
            SweepSummary {
                model: NetworkModel::Ba,
                n: 1000,
                b: 1.8,
                update_rule: UpdateRule::Deterministic,
                k: None,
                interference,
                replicates: 300,
                coop_mean: r.random_range(0..=50) as f64 / 50.0 * 0.98,
                coop_std: 0.0,
                cost_mean,
                cost_std: r.random_range(0.0..10.0),
                master_seed: 0,
                graph_seeds: vec![],
                replicate_seeds: vec![],
            }
        })
        .collect()
}

/// Tie-break key built independently of the library: scheme names joined
/// by `+`, then theta and thresholds with absent values first.
fn oracle_key(s: &SweepSummary) -> (String, Vec<(u8, f64)>) {
    let i = &s.interference;
    let names: Vec<&str> = i
        .schemes
        .iter()
        .map(|s| match s {
            Scheme::Pop => "POP",
            Scheme::Neb => "NEB",
            Scheme::Ni => "NI",
        })
        .collect();
    let part = |x: Option<f64>| x.map_or((0, 0.0), |v| (1, v));
    (names.join("+"), vec![part(i.theta), part(i.p_c), part(i.n_c), part(i.c_i)])
}

fn oracle_less(a: &SweepSummary, b: &SweepSummary) -> bool {
    if a.cost_mean != b.cost_mean {
        return a.cost_mean < b.cost_mean;
    }
    let (ka, kb) = (oracle_key(a), oracle_key(b));
    if ka.0 != kb.0 {
        return ka.0 < kb.0;
    }
    for (x, y) in ka.1.iter().zip(&kb.1) {
        match x.partial_cmp(y) {
            Some(Ordering::Less) => return true,
            Some(Ordering::Greater) => return false,
            _ => {}
        }
    }
    false
}

fn frontier_correctness() -> Outcome {
    let mut r = rng(8);
    let table = synthetic_table(&mut r);
    let targets: Vec<f64> = (0..=22).map(|i| i as f64 / 20.0).chain([0.333, 0.98, 0.99]).collect();
    let got = efficiency_frontier(&table, &targets);
    let mut mismatches = 0;
    let mut unreachable = 0;
    for (row, &t) in got.iter().zip(&targets) {
        let mut best: Option<&SweepSummary> = None;
        for s in &table {
            if s.cost_mean == 0.0 || s.coop_mean < t {
                continue;
            }
            if best.is_none_or(|b| oracle_less(s, b)) {
                best = Some(s);
            }
        }
        if best.is_none() {
            unreachable += 1;
        }
        if row.target != t || row.choice.as_ref() != best {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0 && got.len() == targets.len() && unreachable > 0,
        format!("1000 rows, {} targets ({unreachable} unreachable), {mismatches} mismatches", targets.len()),
    )
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        r#"{
  "experiment": {
    "network": {"model": "BA", "n": 300},
    "update": {"rule": "stochastic", "K": 0.1},
    "generations": 100,
    "graphs": 3,
    "realisations": 4,
    "master_seed": 31337
  },
  "grid": {
    "schemes": [[], ["POP"], ["NEB"], ["NI"], ["NEB", "NI"]],
    "theta": [1.0, 4.0],
    "p_c": [0.3, 0.8],
    "n_c": [0.25, 0.75],
    "c_I": [0.05, 0.5]
  }
}"#,
    )
    .unwrap();
    let run = |jobs: u32, tag: &str| {
        let out = dir.path().join(format!("{tag}.csv"));
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_coopsim"))
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", &jobs.to_string()])
            .env_remove("COOPSIM_SEED")
            .status()
            .unwrap();
        assert!(status.success(), "sweep --jobs {jobs} failed");
        (std::fs::read(&out).unwrap(), start.elapsed())
    };
    let (a, t1) = run(1, "jobs1");
    let (b, _) = run(8, "jobs8");
    let (c, t3) = run(8, "jobs8_again");
    let identical = a == b && b == c;
    let rows = a.iter().filter(|&&ch| ch == b'\n').count().saturating_sub(1);
    let within = t3 <= 2 * t1.max(Duration::from_millis(1)) + Duration::from_secs(1);
    outcome(
        identical && rows > 1 && within,
        format!("{rows} points; jobs=1 vs jobs=8 x2 byte-identical: {identical}; single sweep {t1:.2?}"),
    )
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn threshold_monotonicity() -> Outcome {
    let mut r = rng(10);
    let mut violations = 0;
    for state in 0..1000 {
        let n = r.random_range(10..120);
        let model = if state % 2 == 0 { NetworkModel::Ba } else { NetworkModel::Dms };
        let g = network::generate(&NetworkConfig::new(model, n, 0), &mut r).unwrap();
        let q = degree_percentiles(&g);
        let p = r.random_range(0.0..1.0);
        let s: StrategyVector = (0..n).map(|_| if r.random_bool(p) { C } else { D }).collect();
        let (mut lo, mut hi) = (r.random_range(0.0..=1.0), r.random_range(0.0..=1.0));
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        let set = |cfg: InterferenceConfig| eligible_set(&g, &q, &s, &cfg);
        let pop_ok = subset(&set(InterferenceConfig::pop(1.0, lo)), &set(InterferenceConfig::pop(1.0, hi)));
        let neb_ok = subset(&set(InterferenceConfig::neb(1.0, lo)), &set(InterferenceConfig::neb(1.0, hi)));
        let ni_ok = subset(&set(InterferenceConfig::ni(1.0, hi)), &set(InterferenceConfig::ni(1.0, lo)));
        let mixed = |n_c, c_i| {
            set(InterferenceConfig {
                schemes: SchemeSet::new([Scheme::Neb, Scheme::Ni]),
                theta: Some(1.0),
                n_c: Some(n_c),
                c_i: Some(c_i),
                ..Default::default()
            })
        };
        let mixed_ok = subset(&mixed(lo, 0.5), &mixed(hi, 0.5)) && subset(&mixed(0.5, hi), &mixed(0.5, lo));
        if !(pop_ok && neb_ok && ni_ok && mixed_ok) {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("1000 random states, {violations} violations"))
}
