//! `hierarchy-abm`: run single replicates or sweeps, score edge lists, and
//! re-label stored trajectories.
//!
//! Exit codes: 0 on success, 2 for invalid flags or configuration, 1 for any
//! other failure.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use hierarchy_abm::config::{RunConfig, SEED_ENV_VAR};
use hierarchy_abm::error::ConfigError;
use hierarchy_abm::harness::{
    read_trajectories, run_replicate, run_sweep, write_meta, write_network, write_summary, write_summary_rows,
    write_trajectories, CellSummary, OutputError, Sampling, Trajectory,
};
use hierarchy_abm::trophic::{analyze, parse_edge_list, EdgeListError, TrophicError};

#[derive(Parser)]
#[command(name = "hierarchy-abm", version, about = "Hierarchy emergence simulation and trophic incoherence tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one replicate and write its trajectory, final network and metadata.
    Simulate(SimulateArgs),
    /// Run a (c, u) grid of replicates and write the full run directory.
    Sweep(SweepArgs),
    /// Compute trophic incoherence of an edge-list file.
    Ti(TiArgs),
    /// Recompute cell summaries and regime labels from a run directory.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct Common {
    /// TOML file with [model], [env] and [sweep] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Simulation length in steps.
    #[arg(long)]
    steps: Option<u64>,
    /// Steps between TI samples.
    #[arg(long)]
    sample_every: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Initial heterogeneity.
    #[arg(long)]
    c: Option<f64>,
    /// Mutation amplitude.
    #[arg(long)]
    u: Option<f64>,
    /// World seed; overrides the configured base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated initial heterogeneity values.
    #[arg(long, value_delimiter = ',')]
    grid_c: Option<Vec<f64>>,
    /// Comma-separated mutation amplitudes.
    #[arg(long, value_delimiter = ',')]
    grid_u: Option<Vec<f64>>,
    /// Replicates per cell.
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed for per-replicate seeds; overrides the configured one.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Does not affect results.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct TiArgs {
    /// Edge list: `source target weight` per line, `#` comments.
    file: PathBuf,
    /// Levels output path (default: `<file>.levels.csv`).
    #[arg(long)]
    levels: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Run directory containing trajectories.csv.
    dir: PathBuf,
    /// Stability window; defaults to the value recorded in meta.json.
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    EdgeList { path: PathBuf, source: EdgeListError },
    #[error("{path}: {source}")]
    Trophic { path: PathBuf, source: TrophicError },
    #[error("{path}: {message}")]
    Meta { path: PathBuf, message: String },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Ti(a) => ti(a),
        Command::Classify(a) => classify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Defaults, then the file, then the seed variable, then flags.
fn resolve(common: &Common, seed: Option<u64>) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_seed_var(std::env::var(SEED_ENV_VAR).ok().as_deref())?;
    if let Some(s) = seed {
        cfg.sweep.base_seed = s;
    }
    if let Some(s) = common.steps {
        cfg.sweep.steps = s;
    }
    if let Some(s) = common.sample_every {
        cfg.sweep.sample_every = s;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })
}

fn unix_time() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&a.common, a.seed)?;
    if let Some(c) = a.c {
        cfg.model.c = c;
    }
    if let Some(u) = a.u {
        cfg.model.u = u;
    }
    // a single replicate at the model's own (c, u)
    cfg.sweep.c = vec![cfg.model.c];
    cfg.sweep.u = vec![cfg.model.u];
    cfg.sweep.replicates = 1;
    cfg.validate()?;
    let seed = cfg.sweep.base_seed;
    let (traj, network, stats, extinct) = run_replicate(&cfg.model, &cfg.env, seed, Sampling::from(&cfg.sweep))?;
    let dir = &a.common.out;
    create_dir(dir)?;
    let (c, u) = (cfg.model.c, cfg.model.u);
    write_trajectories(dir, [(c, u, 0, &traj)])?;
    write_network(dir, c, u, 0, &network)?;
    let meta = json!({
        "command": "simulate",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seeds": [{ "c": c, "u": u, "replicate": 0, "seed": seed }],
        "extinct": extinct,
        "stats": stats_json(&stats),
        "created_unix": unix_time(),
    });
    write_meta(dir, &meta)?;
    Ok(())
}

fn stats_json(s: &hierarchy_abm::world::WorldStats) -> serde_json::Value {
    serde_json::to_value(s).unwrap_or(serde_json::Value::Null)
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&a.common, a.seed)?;
    if let Some(c) = a.grid_c {
        cfg.sweep.c = c;
    }
    if let Some(u) = a.grid_u {
        cfg.sweep.u = u;
    }
    if let Some(r) = a.reps {
        cfg.sweep.replicates = r;
    }
    if a.workers == 0 {
        return Err(ConfigError::invalid("--workers", "must be at least 1").into());
    }
    cfg.validate()?;
    let result = run_sweep(&cfg.sweep, &cfg.model, &cfg.env, a.workers)?;
    let dir = &a.common.out;
    create_dir(dir)?;
    // a stale summary must not outlive a failed rerun
    let summary = dir.join("summary.csv");
    if summary.exists() {
        fs::remove_file(&summary).map_err(|source| CliError::Io { path: summary, source })?;
    }
    write_trajectories(
        dir,
        result
            .replicates
            .iter()
            .map(|r| (r.key.c, r.key.u, r.key.replicate, &r.trajectory)),
    )?;
    for r in &result.replicates {
        write_network(dir, r.key.c, r.key.u, r.key.replicate, &r.network)?;
    }
    let seeds: Vec<serde_json::Value> = result
        .replicates
        .iter()
        .map(|r| json!({ "c": r.key.c, "u": r.key.u, "replicate": r.key.replicate, "seed": r.seed, "extinct": r.extinct }))
        .collect();
    let meta = json!({
        "command": "sweep",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seeds": seeds,
        "created_unix": unix_time(),
    });
    write_meta(dir, &meta)?;
    write_summary(dir, &result.cells)?;
    Ok(())
}

fn ti(a: TiArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.file).map_err(|source| CliError::Io {
        path: a.file.clone(),
        source,
    })?;
    let g = parse_edge_list(&text).map_err(|source| CliError::EdgeList {
        path: a.file.clone(),
        source,
    })?;
    let result = analyze(&g).map_err(|source| CliError::Trophic {
        path: a.file.clone(),
        source,
    })?;
    if result.self_loops_removed > 0 {
        eprintln!(
            "warning: {} self-loop(s) ignored in {}",
            result.self_loops_removed,
            a.file.display()
        );
    }
    if !result.omitted.is_empty() {
        eprintln!(
            "warning: {} node(s) outside the largest weakly connected component have no level",
            result.omitted.len()
        );
    }
    let levels_path = a.levels.unwrap_or_else(|| {
        let mut p = a.file.clone().into_os_string();
        p.push(".levels.csv");
        PathBuf::from(p)
    });
    let csv_err = |e: csv::Error| CliError::Io {
        path: levels_path.clone(),
        source: io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(&levels_path).map_err(csv_err)?;
    w.write_record(["node", "level", "in_component"]).map_err(csv_err)?;
    for k in 0..g.node_count() {
        let level = result.level_of(k);
        w.write_record([
            g.label(k).to_owned(),
            level.map_or_else(|| "NA".to_owned(), |v| v.to_string()),
            level.is_some().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: levels_path.clone(),
        source,
    })?;
    println!("F = {:.6}", result.incoherence);
    Ok(())
}

fn classify(a: ClassifyArgs) -> Result<(), CliError> {
    let mut cfg = RunConfig::default();
    let meta_path = a.dir.join("meta.json");
    if meta_path.exists() {
        let text = fs::read_to_string(&meta_path).map_err(|source| CliError::Io {
            path: meta_path.clone(),
            source,
        })?;
        let meta: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Meta {
            path: meta_path.clone(),
            message: e.to_string(),
        })?;
        if let Some(c) = meta.get("config") {
            cfg = serde_json::from_value(c.clone()).map_err(|e| CliError::Meta {
                path: meta_path.clone(),
                message: e.to_string(),
            })?;
        }
    }
    if let Some(w) = a.window {
        cfg.sweep.window = w;
    }
    cfg.sweep.validate()?;
    let stored = read_trajectories(&a.dir.join("trajectories.csv"))?;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    for s in &stored {
        if !cells.contains(&(s.c, s.u)) {
            cells.push((s.c, s.u));
        }
    }
    let thresholds = cfg.sweep.thresholds();
    let summaries: Vec<CellSummary> = cells
        .into_iter()
        .map(|(c, u)| {
            let members: Vec<&Trajectory> = stored
                .iter()
                .filter(|s| s.c == c && s.u == u)
                .map(|s| &s.trajectory)
                .collect();
            let extinct = members.iter().filter(|t| t.population.last() == Some(&0)).count();
            CellSummary::from_trajectories(c, u, &members, extinct, &thresholds, cfg.sweep.window)
        })
        .collect();
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    write_summary_rows(&mut w, &summaries).map_err(|e| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: io::Error::other(e),
    })?;
    Ok(())
}
