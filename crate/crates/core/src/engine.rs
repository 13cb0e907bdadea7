//! Runs, replicate ensembles, parameter sweeps and cost-efficiency frontiers.
//!
//! A generation consists of
//!
//! 1. accumulating payoffs for the current strategies,
//! 2. selecting eligible cooperators and adding the endowment to their score,
//! 3. a synchronous strategy update.
//!
//! Under the deterministic rule a homogeneous population is absorbing: the
//! run stops investing and the state is carried unchanged to the horizon.
//! Stochastic runs always play every generation.

use std::cmp::Ordering;
use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{homogeneous_strategy, is_homogeneous, UpdateRule, UpdateRuleConfig};
use crate::error::{Error, Result};
use crate::game::{accumulate_scores, PayoffParams, Strategy, StrategyVector};
use crate::interference::{apply_interference, eligible_set, Composition, InterferenceConfig, SchemeSet};
use crate::network::{self, node_centrality, Centrality, Graph, NetworkConfig, NetworkModel};
use crate::seed::{self, ReplicateSeeds};

pub const DEFAULT_STATS_WINDOW: usize = 25;
pub const DEFAULT_GRAPHS: usize = 10;
pub const DEFAULT_REALISATIONS: usize = 30;

fn default_window() -> usize {
    DEFAULT_STATS_WINDOW
}

fn default_update() -> UpdateRuleConfig {
    UpdateRuleConfig::deterministic()
}

/// Where a run's graph comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSpec {
    File {
        graph_file: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Generate(NetworkConfig),
}

impl NetworkSpec {
    fn expected_n(&self) -> Option<usize> {
        match self {
            NetworkSpec::Generate(c) => Some(c.n),
            NetworkSpec::File { n, .. } => *n,
        }
    }

    pub fn load(&self) -> Result<Graph> {
        match self {
            NetworkSpec::Generate(c) => network::generate_seeded(c),
            NetworkSpec::File { graph_file, .. } => Graph::load_json(graph_file),
        }
    }
}

/// Everything needed to reproduce one replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkSpec,
    #[serde(default)]
    pub payoff: PayoffParams,
    #[serde(default = "default_update")]
    pub update: UpdateRuleConfig,
    #[serde(default)]
    pub interference: InterferenceConfig,
    /// Horizon; defaults to 75 (deterministic) or 500 (stochastic).
    #[serde(default)]
    pub generations: Option<usize>,
    #[serde(default = "default_window")]
    pub stats_window: usize,
    #[serde(default)]
    pub run_seed: u64,
}

impl RunConfig {
    pub fn new(network: NetworkConfig, update: UpdateRuleConfig, interference: InterferenceConfig) -> Self {
        RunConfig {
            network: NetworkSpec::Generate(network),
            payoff: PayoffParams::default(),
            update,
            interference,
            generations: None,
            stats_window: DEFAULT_STATS_WINDOW,
            run_seed: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.generations.unwrap_or_else(|| self.update.rule.default_horizon())
    }

    pub fn validate(&self) -> Result<()> {
        if let NetworkSpec::Generate(c) = &self.network {
            c.validate()?;
        }
        self.payoff.validate()?;
        self.update.validate()?;
        self.interference.validate()?;
        let horizon = self.horizon();
        if horizon == 0 {
            return Err(Error::InvalidRun("generations must be at least 1".into()));
        }
        if self.stats_window == 0 || self.stats_window > horizon {
            return Err(Error::InvalidRun(format!(
                "stats_window = {} must lie in 1..={horizon}",
                self.stats_window
            )));
        }
        Ok(())
    }

    /// Replicate seeds implied by `run_seed`.
    pub fn seeds(&self) -> ReplicateSeeds {
        ReplicateSeeds::derive(self.run_seed, 0, 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub coop_fraction: f64,
    pub invested_count: usize,
    pub generation_cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalState {
    AllCooperate,
    AllDefect,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// One entry per generation; entry `t` describes the strategies that
    /// played generation `t` and the investment made in it.
    pub trace: Vec<GenerationStats>,
    pub total_cost: f64,
    /// Mean `x_c` over the trailing stats window.
    pub mean_coop: f64,
    /// Mean per-generation cost over the trailing stats window.
    pub window_cost: f64,
    /// First generation whose state was homogeneous.
    pub absorbed_at: Option<usize>,
    /// Classification of the strategies after the last update.
    pub final_state: FinalState,
}

impl RunResult {
    /// Largest minus smallest `x_c` over the last `window` generations.
    pub fn trailing_range(&self, window: usize) -> f64 {
        let tail = &self.trace[self.trace.len().saturating_sub(window)..];
        let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
            (lo.min(g.coop_fraction), hi.max(g.coop_fraction))
        });
        if tail.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

fn classify(s: &StrategyVector) -> FinalState {
    match homogeneous_strategy(s) {
        Some(Strategy::Cooperate) => FinalState::AllCooperate,
        Some(Strategy::Defect) => FinalState::AllDefect,
        None => FinalState::Mixed,
    }
}

fn check_graph(cfg: &RunConfig, g: &Graph) -> Result<()> {
    cfg.validate()?;
    if let Some(n) = cfg.network.expected_n() {
        if n != g.n() {
            return Err(Error::Mismatch(format!("config expects {n} nodes, graph has {}", g.n())));
        }
    }
    Ok(())
}

/// Run one replicate, drawing the initial strategies and the dynamics from
/// the same stream.
pub fn run_simulation<R: Rng + ?Sized>(cfg: &RunConfig, g: &Graph, rng: &mut R) -> Result<RunResult> {
    check_graph(cfg, g)?;
    let initial = StrategyVector::random(g.n(), rng);
    simulate(cfg, g, initial, rng)
}

/// Run one replicate from a given initial state.
pub fn run_from_state<R: Rng + ?Sized>(
    cfg: &RunConfig,
    g: &Graph,
    initial: StrategyVector,
    rng: &mut R,
) -> Result<RunResult> {
    check_graph(cfg, g)?;
    if initial.len() != g.n() {
        return Err(Error::Mismatch(format!(
            "initial state has {} entries, graph has {} nodes",
            initial.len(),
            g.n()
        )));
    }
    simulate(cfg, g, initial, rng)
}

/// Run one replicate with separate initialisation and dynamics streams.
pub fn run_replicate(cfg: &RunConfig, g: &Graph, seeds: ReplicateSeeds) -> Result<RunResult> {
    check_graph(cfg, g)?;
    let initial = StrategyVector::random(g.n(), &mut seed::rng(seeds.init));
    simulate(cfg, g, initial, &mut seed::rng(seeds.dynamics))
}

fn simulate<R: Rng + ?Sized>(
    cfg: &RunConfig,
    g: &Graph,
    mut state: StrategyVector,
    rng: &mut R,
) -> Result<RunResult> {
    let horizon = cfg.horizon();
    let theta = cfg.interference.endowment();
    let metrics = node_centrality(g, cfg.interference.centrality);
    let freezes = cfg.update.rule == UpdateRule::Deterministic;

    let mut trace = Vec::with_capacity(horizon);
    let mut absorbed_at = None;
    for generation in 0..horizon {
        let coop_fraction = state.cooperation_fraction();
        if absorbed_at.is_none() && is_homogeneous(&state) {
            absorbed_at = Some(generation);
            if freezes {
                trace.extend((generation..horizon).map(|t| GenerationStats {
                    generation: t,
                    coop_fraction,
                    invested_count: 0,
                    generation_cost: 0.0,
                }));
                break;
            }
        }
        let scores = accumulate_scores(g, &state, &cfg.payoff);
        let eligible = eligible_set(g, &metrics, &state, &cfg.interference);
        let (scores, record) = apply_interference(scores, &eligible, theta, generation);
        trace.push(GenerationStats {
            generation,
            coop_fraction,
            invested_count: record.count,
            generation_cost: record.cost,
        });
        state = cfg.update.step(g, &state, &scores, rng);
    }

    let window = &trace[horizon - cfg.stats_window..];
    let mean_coop = window.iter().map(|t| t.coop_fraction).sum::<f64>() / window.len() as f64;
    let window_cost = window.iter().map(|t| t.generation_cost).sum::<f64>() / window.len() as f64;
    Ok(RunResult {
        total_cost: trace.iter().map(|t| t.generation_cost).sum(),
        mean_coop,
        window_cost,
        absorbed_at,
        final_state: classify(&state),
        trace,
    })
}

fn default_graphs() -> usize {
    DEFAULT_GRAPHS
}

fn default_realisations() -> usize {
    DEFAULT_REALISATIONS
}

/// Shared settings of every parameter point in a sweep.
///
/// Graph seeds and replicate seeds derive from `master_seed` only, so every
/// parameter point is evaluated on the same graphs and initial states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Network family and size; the seed field is ignored.
    pub network: NetworkConfig,
    #[serde(default)]
    pub payoff: PayoffParams,
    #[serde(default = "default_update")]
    pub update: UpdateRuleConfig,
    #[serde(default)]
    pub generations: Option<usize>,
    #[serde(default = "default_window")]
    pub stats_window: usize,
    #[serde(default = "default_graphs")]
    pub graphs: usize,
    #[serde(default = "default_realisations")]
    pub realisations: usize,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(network: NetworkConfig, update: UpdateRuleConfig) -> Self {
        ExperimentConfig {
            network,
            payoff: PayoffParams::default(),
            update,
            generations: None,
            stats_window: DEFAULT_STATS_WINDOW,
            graphs: DEFAULT_GRAPHS,
            realisations: DEFAULT_REALISATIONS,
            master_seed: 0,
        }
    }

    /// Per-replicate configuration for one interference setting.
    pub fn run_config(&self, interference: &InterferenceConfig) -> RunConfig {
        RunConfig {
            network: NetworkSpec::Generate(self.network.clone()),
            payoff: self.payoff,
            update: self.update,
            interference: interference.clone(),
            generations: self.generations,
            stats_window: self.stats_window,
            run_seed: self.master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.graphs == 0 || self.realisations == 0 {
            return Err(Error::InvalidRun("graphs and realisations must be at least 1".into()));
        }
        self.run_config(&InterferenceConfig::baseline()).validate()
    }

    pub fn replicate_seeds(&self) -> Vec<ReplicateSeeds> {
        (0..self.graphs)
            .flat_map(|g| (0..self.realisations).map(move |r| ReplicateSeeds::derive(self.master_seed, g, r)))
            .collect()
    }
}

/// The pre-seeded graphs of an experiment.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub graphs: Vec<Graph>,
    pub seeds: Vec<u64>,
}

impl Ensemble {
    pub fn generate(exp: &ExperimentConfig) -> Result<Self> {
        exp.network.validate()?;
        let seeds: Vec<u64> = (0..exp.graphs).map(|i| seed::graph_seed(exp.master_seed, i)).collect();
        let graphs = seeds
            .par_iter()
            .map(|&s| {
                let cfg = NetworkConfig { seed: s, ..exp.network.clone() };
                network::generate_seeded(&cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { graphs, seeds })
    }
}

/// Aggregate statistics of one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub model: NetworkModel,
    pub n: usize,
    pub b: f64,
    pub update_rule: UpdateRule,
    /// Present for stochastic runs only.
    pub k: Option<f64>,
    pub interference: InterferenceConfig,
    pub replicates: usize,
    pub coop_mean: f64,
    pub coop_std: f64,
    pub cost_mean: f64,
    pub cost_std: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub graph_seeds: Vec<u64>,
    #[serde(default)]
    pub replicate_seeds: Vec<ReplicateSeeds>,
}

/// Arithmetic mean and sample standard deviation, summed in slice order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Every replicate of one parameter point, ordered by (graph, realisation).
pub fn run_replicates(
    exp: &ExperimentConfig,
    ensemble: &Ensemble,
    interference: &InterferenceConfig,
) -> Result<Vec<RunResult>> {
    let cfg = exp.run_config(interference);
    cfg.validate()?;
    if ensemble.graphs.len() != exp.graphs {
        return Err(Error::Mismatch(format!(
            "experiment expects {} graphs, ensemble has {}",
            exp.graphs,
            ensemble.graphs.len()
        )));
    }
    let jobs: Vec<(usize, usize)> = (0..exp.graphs)
        .flat_map(|g| (0..exp.realisations).map(move |r| (g, r)))
        .collect();
    jobs.par_iter()
        .map(|&(gi, r)| {
            run_replicate(&cfg, &ensemble.graphs[gi], ReplicateSeeds::derive(exp.master_seed, gi, r))
        })
        .collect()
}

pub fn summarise(
    exp: &ExperimentConfig,
    ensemble: &Ensemble,
    interference: &InterferenceConfig,
    results: &[RunResult],
) -> SweepSummary {
    let coop: Vec<f64> = results.iter().map(|r| r.mean_coop).collect();
    let cost: Vec<f64> = results.iter().map(|r| r.total_cost).collect();
    let (coop_mean, coop_std) = mean_std(&coop);
    let (cost_mean, cost_std) = mean_std(&cost);
    SweepSummary {
        model: exp.network.model,
        n: exp.network.n,
        b: exp.payoff.b,
        update_rule: exp.update.rule,
        k: (exp.update.rule == UpdateRule::Stochastic).then_some(exp.update.k),
        interference: interference.clone(),
        replicates: results.len(),
        coop_mean,
        coop_std,
        cost_mean,
        cost_std,
        master_seed: exp.master_seed,
        graph_seeds: ensemble.seeds.clone(),
        replicate_seeds: exp.replicate_seeds(),
    }
}

/// Run all `graphs x realisations` replicates of one point and aggregate them.
pub fn run_parameter_point(
    exp: &ExperimentConfig,
    ensemble: &Ensemble,
    interference: &InterferenceConfig,
) -> Result<SweepSummary> {
    let results = run_replicates(exp, ensemble, interference)?;
    Ok(summarise(exp, ensemble, interference, &results))
}

/// Grid of interference settings.
///
/// Each scheme set is crossed with every `theta` and with the thresholds of
/// its active schemes only. An empty scheme set contributes one baseline
/// point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub schemes: Vec<SchemeSet>,
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default)]
    pub p_c: Vec<f64>,
    #[serde(default)]
    pub n_c: Vec<f64>,
    #[serde(default, rename = "c_I")]
    pub c_i: Vec<f64>,
    #[serde(default)]
    pub composition: Composition,
    #[serde(default)]
    pub centrality: Centrality,
}

impl SweepGrid {
    pub fn baseline() -> Self {
        SweepGrid {
            schemes: vec![SchemeSet::none()],
            ..Default::default()
        }
    }

    pub fn points(&self) -> Vec<InterferenceConfig> {
        use crate::interference::Scheme;
        let axis = |active: bool, values: &[f64]| -> Vec<Option<f64>> {
            if active {
                values.iter().copied().map(Some).collect()
            } else {
                vec![None]
            }
        };
        let mut out = Vec::new();
        for schemes in &self.schemes {
            if schemes.is_empty() {
                out.push(InterferenceConfig::baseline());
                continue;
            }
            for &theta in &self.theta {
                for p_c in axis(schemes.contains(Scheme::Pop), &self.p_c) {
                    for n_c in axis(schemes.contains(Scheme::Neb), &self.n_c) {
                        for c_i in axis(schemes.contains(Scheme::Ni), &self.c_i) {
                            out.push(InterferenceConfig {
                                schemes: schemes.clone(),
                                theta: Some(theta),
                                p_c,
                                n_c,
                                c_i,
                                composition: self.composition,
                                centrality: self.centrality,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One summary per grid point, in grid order.
pub fn sweep(exp: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<SweepSummary>> {
    exp.validate()?;
    let points = grid.points();
    for p in &points {
        p.validate()?;
    }
    let ensemble = Ensemble::generate(exp)?;
    points
        .par_iter()
        .map(|p| run_parameter_point(exp, &ensemble, p))
        .collect()
}

/// Run [`sweep`] on a dedicated pool of `jobs` threads.
pub fn sweep_with_jobs(exp: &ExperimentConfig, grid: &SweepGrid, jobs: usize) -> Result<Vec<SweepSummary>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidRun(format!("cannot build thread pool: {e}")))?;
    pool.install(|| sweep(exp, grid))
}

/// Result of one cooperation target.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierRow {
    pub target: f64,
    /// Cheapest configuration reaching the target, or `None` if unreachable.
    pub choice: Option<SweepSummary>,
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.total_cmp(&y),
    }
}

/// Order used to break cost ties: scheme set, then `theta`, then thresholds.
pub fn config_order(a: &InterferenceConfig, b: &InterferenceConfig) -> Ordering {
    a.schemes
        .to_string()
        .cmp(&b.schemes.to_string())
        .then_with(|| cmp_opt(a.theta, b.theta))
        .then_with(|| cmp_opt(a.p_c, b.p_c))
        .then_with(|| cmp_opt(a.n_c, b.n_c))
        .then_with(|| cmp_opt(a.c_i, b.c_i))
}

/// For each target, the configuration with the lowest mean total cost among
/// those whose mean cooperation reaches the target.
///
/// Configurations that never paid anything are not candidates.
pub fn efficiency_frontier(summaries: &[SweepSummary], targets: &[f64]) -> Vec<FrontierRow> {
    let candidates: Vec<&SweepSummary> = summaries.iter().filter(|s| s.cost_mean > 0.0).collect();
    targets
        .iter()
        .map(|&target| {
            let choice = candidates
                .iter()
                .filter(|s| s.coop_mean >= target)
                .min_by(|a, b| {
                    a.cost_mean
                        .total_cmp(&b.cost_mean)
                        .then_with(|| config_order(&a.interference, &b.interference))
                })
                .map(|s| (*s).clone());
            FrontierRow { target, choice }
        })
        .collect()
}
