//! Command-line front end: network generation, single runs, sweeps,
//! baselines and frontier extraction.
//!
//! Configs are JSON, tabular output is CSV. Every output file gets a sibling
//! `<stem>.meta.json` with the fully resolved configuration and seeds.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use coopsim::engine::{self, efficiency_frontier, ExperimentConfig, RunConfig, SweepGrid, SweepSummary};
use coopsim::network::{self, NetworkConfig, NetworkModel};
use coopsim::table::{format_sig9, read_sweep_csv, write_sweep_csv};

pub mod overrides;

pub const SEED_ENV: &str = "COOPSIM_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coopsim", version, about = "Incentive interference on scale-free Prisoner's Dilemma populations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a network and write it as JSON.
    GenNet(GenNetArgs),
    /// Simulate one replicate and write its per-generation trace.
    Run(ConfigArgs),
    /// Run every point of a parameter grid.
    Sweep(SweepArgs),
    /// Run the no-interference reference point of a sweep config.
    Baseline(SweepArgs),
    /// Cheapest configuration per cooperation target from a sweep table.
    Frontier(FrontierArgs),
}

#[derive(Debug, Args)]
pub struct GenNetArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: NetworkModel,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub m0: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Override a config value, e.g. `--set payoff.b=1.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Comma-separated cooperation targets in [0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    pub targets: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_model(s: &str) -> Result<NetworkModel, String> {
    s.parse().map_err(|e: coopsim::Error| e.to_string())
}

/// A problem with how the program was invoked rather than with the run.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Sweep config file: shared experiment settings plus the grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub experiment: ExperimentConfig,
    #[serde(default = "SweepGrid::baseline")]
    pub grid: SweepGrid,
}

/// Parse `argv` (including the program name), run the subcommand and return
/// the process exit status.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

pub fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenNet(a) => gen_net(&a),
        Command::Run(a) => run(&a),
        Command::Sweep(a) => sweep(&a, false),
        Command::Baseline(a) => sweep(&a, true),
        Command::Frontier(a) => frontier(&a),
    }
}

/// `out.csv` -> `out.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn write_meta(out: &Path, meta: &Value) -> anyhow::Result<()> {
    let path = meta_path(out);
    let text = serde_json::to_string_pretty(meta)?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| UsageError(format!("{SEED_ENV}=`{v}` is not an unsigned 64-bit integer")).into()),
        Err(_) => Ok(None),
    }
}

/// Read a JSON config, fill the seed from the environment when the file
/// omits it, apply overrides and deserialize.
fn load_config<T>(path: &Path, seed_key: &[&str], sets: &[String]) -> anyhow::Result<T>
where
    T: Serialize + for<'de> Deserialize<'de>,
{
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(seed) = env_seed()? {
        overrides::insert_if_absent(&mut value, seed_key, Value::from(seed));
    }
    let typed: T = serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))?;
    if sets.is_empty() {
        return Ok(typed);
    }
    let mut value = serde_json::to_value(&typed)?;
    for s in sets {
        overrides::apply(&mut value, s).map_err(UsageError)?;
    }
    serde_json::from_value(value).map_err(|e| UsageError(format!("override rejected: {e}")).into())
}

fn gen_net(a: &GenNetArgs) -> anyhow::Result<()> {
    let cfg = NetworkConfig {
        model: a.model,
        n: a.n,
        m0: a.m0,
        m: a.m,
        seed: a.seed,
    };
    let g = network::generate_seeded(&cfg)?;
    g.save_json(&a.out)?;
    write_meta(
        &a.out,
        &serde_json::json!({
            "command": "gen-net",
            "network": cfg,
            "edges": g.edge_count(),
            "average_degree": g.average_degree(),
            "transitivity": network::global_transitivity(&g),
        }),
    )
}

pub const TRACE_HEADER: &str = "generation,coop_fraction,invested_count,generation_cost,cumulative_cost";

fn run(a: &ConfigArgs) -> anyhow::Result<()> {
    let mut cfg: RunConfig = load_config(&a.config, &["run_seed"], &a.overrides)?;
    // Relative graph files are resolved against the config's directory.
    if let engine::NetworkSpec::File { graph_file, .. } = &mut cfg.network {
        if graph_file.is_relative() {
            if let Some(dir) = a.config.parent() {
                *graph_file = dir.join(&*graph_file);
            }
        }
    }
    cfg.validate()?;
    let g = cfg.network.load()?;
    let seeds = cfg.seeds();
    let result = engine::run_replicate(&cfg, &g, seeds)?;

    let mut w = create(&a.out)?;
    writeln!(w, "{TRACE_HEADER}")?;
    let mut cumulative = 0.0;
    for t in &result.trace {
        cumulative += t.generation_cost;
        writeln!(
            w,
            "{},{},{},{},{}",
            t.generation,
            format_sig9(t.coop_fraction),
            t.invested_count,
            format_sig9(t.generation_cost),
            format_sig9(cumulative)
        )?;
    }
    w.flush()?;
    write_meta(
        &a.out,
        &serde_json::json!({
            "command": "run",
            "config": cfg,
            "seeds": seeds,
            "graph": g.provenance().map(|(m, s)| serde_json::json!({"model": m, "seed": s})),
            "total_cost": result.total_cost,
            "mean_coop": result.mean_coop,
            "window_cost": result.window_cost,
            "absorbed_at": result.absorbed_at,
            "final_state": result.final_state,
        }),
    )
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn sweep(a: &SweepArgs, baseline: bool) -> anyhow::Result<()> {
    let mut file: SweepFile = load_config(&a.common.config, &["experiment", "master_seed"], &a.common.overrides)?;
    if baseline {
        file.grid = SweepGrid::baseline();
    }
    if file.grid.points().is_empty() {
        bail!("grid has no points (check `schemes` and `theta`)");
    }
    let jobs = match a.jobs {
        Some(0) => return Err(UsageError("--jobs must be at least 1".into()).into()),
        Some(j) => j,
        None => default_jobs(),
    };
    let summaries = engine::sweep_with_jobs(&file.experiment, &file.grid, jobs)?;
    let mut w = create(&a.common.out)?;
    write_sweep_csv(&summaries, &mut w)?;
    w.flush()?;
    let (graph_seeds, replicate_seeds) = summaries
        .first()
        .map(|s| (s.graph_seeds.clone(), s.replicate_seeds.clone()))
        .unwrap_or_default();
    write_meta(
        &a.common.out,
        &serde_json::json!({
            "command": if baseline { "baseline" } else { "sweep" },
            "config": file,
            "points": summaries.len(),
            "graph_seeds": graph_seeds,
            "replicate_seeds": replicate_seeds,
        }),
    )
}

pub const FRONTIER_HEADER: &str =
    "model,n,b,update_rule,K,target,status,schemes,theta,p_c,n_c,c_I,coop_mean,cost_mean,cost_std";

type GroupKey = (NetworkModel, usize, String, String, String);

fn group_key(s: &SweepSummary) -> GroupKey {
    (
        s.model,
        s.n,
        format_sig9(s.b),
        s.update_rule.as_str().to_string(),
        s.k.map(format_sig9).unwrap_or_default(),
    )
}

fn frontier(a: &FrontierArgs) -> anyhow::Result<()> {
    if let Some(t) = a.targets.iter().find(|t| !(0.0..=1.0).contains(*t) && t.is_finite()) {
        eprintln!("warning: target {t} lies outside [0, 1] and can never be reached");
    }
    let input = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let rows = read_sweep_csv(BufReader::new(input)).with_context(|| format!("reading {}", a.input.display()))?;
    if rows.is_empty() {
        bail!("{} contains no sweep rows", a.input.display());
    }

    let mut groups: Vec<(GroupKey, Vec<SweepSummary>)> = Vec::new();
    for row in rows {
        let key = group_key(&row);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }

    let opt = |x: Option<f64>| x.map(format_sig9).unwrap_or_default();
    let mut w = create(&a.out)?;
    writeln!(w, "{FRONTIER_HEADER}")?;
    for ((model, n, b, rule, k), members) in &groups {
        for row in efficiency_frontier(members, &a.targets) {
            let prefix = format!("{model},{n},{b},{rule},{k},{}", format_sig9(row.target));
            match &row.choice {
                Some(s) => {
                    let i = &s.interference;
                    writeln!(
                        w,
                        "{prefix},ok,{},{},{},{},{},{},{},{}",
                        i.schemes,
                        opt(i.theta),
                        opt(i.p_c),
                        opt(i.n_c),
                        opt(i.c_i),
                        format_sig9(s.coop_mean),
                        format_sig9(s.cost_mean),
                        format_sig9(s.cost_std)
                    )?;
                }
                None => writeln!(w, "{prefix},unreachable,,,,,,,,")?,
            }
        }
    }
    w.flush()?;
    write_meta(
        &a.out,
        &serde_json::json!({
            "command": "frontier",
            "input": a.input,
            "targets": a.targets,
            "groups": groups.len(),
        }),
    )
}
