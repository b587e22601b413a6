//! Parameter sweeps over `(c, u)`, replicate management and per-cell summaries.
//!
//! Every replicate owns its world and its seed, so replicates can run on any
//! number of workers; results are merged by `(c, u, replicate)` key and never
//! depend on completion order.

mod output;
mod regime;

pub use output::{
    format_number, network_file_name, read_trajectories, write_meta, write_network, write_summary, write_summary_rows, write_trajectories, NetworkEdge,
    NetworkNode, NetworkSnapshot, OutputError, StoredTrajectory,
};
pub use regime::{
    classify_regime, cross_section, median_trajectory, stability_onset, RegimeLabel, RegimeThresholds,
};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::ModelParams;
use crate::env::EnvParams;
use crate::error::ConfigError;
use crate::rng::replicate_seed;
use crate::stats::{summarize, Summary};
use crate::trophic::{analyze_with, layered_layout, LayoutOptions, Solver, TrophicResult};
use crate::world::{World, WorldStats};

/// Grid, replicate count and sampling cadence of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub c: Vec<f64>,
    pub u: Vec<f64>,
    pub replicates: usize,
    pub steps: u64,
    pub sample_every: u64,
    pub base_seed: u64,
    /// Consecutive samples required by the stability-onset rule.
    pub window: usize,
    /// Margin above the ordered band that a relapse must reach to count as a rebound.
    pub rebound_margin: f64,
    /// Restrict the ledger to agents alive at sampling time.
    pub survivors_only: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            c: vec![0.05, 0.2, 0.5, 1.0, 2.0],
            u: vec![0.1, 0.2, 0.5, 1.0, 2.0],
            replicates: 20,
            steps: 30_000,
            sample_every: 100,
            base_seed: 1,
            window: 5,
            rebound_margin: 0.05,
            survivors_only: true,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.c.is_empty() || self.c.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
            return Err(ConfigError::invalid("sweep.c", "need at least one finite value ≥ 0"));
        }
        if self.u.is_empty() || self.u.iter().any(|&u| !(u >= 0.0) || !u.is_finite()) {
            return Err(ConfigError::invalid("sweep.u", "need at least one finite value ≥ 0"));
        }
        if self.replicates == 0 {
            return Err(ConfigError::invalid("sweep.replicates", "must be at least 1"));
        }
        if self.sample_every == 0 {
            return Err(ConfigError::invalid("sweep.sample_every", "must be at least 1"));
        }
        if self.steps != 0 && self.steps < self.sample_every {
            return Err(ConfigError::invalid("sweep.steps", "must be 0 or at least sample_every"));
        }
        if self.window == 0 {
            return Err(ConfigError::invalid("sweep.window", "must be at least 1"));
        }
        if !(self.rebound_margin >= 0.0) {
            return Err(ConfigError::invalid("sweep.rebound_margin", "must be non-negative"));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> RegimeThresholds {
        RegimeThresholds {
            rebound_margin: self.rebound_margin,
            ..RegimeThresholds::default()
        }
    }

    /// Every `(c, u, replicate)` job in output order.
    pub fn jobs(&self) -> Vec<ReplicateKey> {
        let mut jobs = Vec::with_capacity(self.c.len() * self.u.len() * self.replicates);
        for &c in &self.c {
            for &u in &self.u {
                for replicate in 0..self.replicates {
                    jobs.push(ReplicateKey { c, u, replicate });
                }
            }
        }
        jobs
    }
}

/// Sampling options for a single replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub steps: u64,
    pub sample_every: u64,
    pub survivors_only: bool,
}

impl From<&SweepSpec> for Sampling {
    fn from(s: &SweepSpec) -> Self {
        Self {
            steps: s.steps,
            sample_every: s.sample_every,
            survivors_only: s.survivors_only,
        }
    }
}

/// TI and population sampled every `sample_every` steps. `None` marks a
/// sample with no usable ledger (no edges, or nobody alive).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<u64>,
    pub ti: Vec<Option<f64>>,
    pub population: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Last defined TI sample.
    pub fn final_ti(&self) -> Option<f64> {
        self.ti.iter().rev().find_map(|&v| v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ReplicateKey {
    pub c: f64,
    pub u: f64,
    pub replicate: usize,
}

#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub key: ReplicateKey,
    pub seed: u64,
    pub trajectory: Trajectory,
    /// Population hit zero before the run ended.
    pub extinct: bool,
    pub network: NetworkSnapshot,
    pub stats: WorldStats,
}

/// TI of the cumulative ledger, optionally restricted to living agents.
pub fn ledger_analysis(world: &World, survivors_only: bool) -> Option<(crate::trophic::DirectedGraph<f64>, TrophicResult<f64>)> {
    let g = world.ledger().to_graph(|id| !survivors_only || world.is_alive(id));
    if g.node_count() == 0 {
        return None;
    }
    let result = analyze_with(&g, Solver::auto(g.node_count())).ok()?;
    Some((g, result))
}

/// Runs one replicate: simulates `steps` ticks, sampling TI on the ledger
/// every `sample_every` ticks.
pub fn run_replicate(
    params: &ModelParams,
    env: &EnvParams,
    seed: u64,
    sampling: Sampling,
) -> Result<(Trajectory, NetworkSnapshot, WorldStats, bool), ConfigError> {
    let mut world = World::new(params.clone(), env.clone(), seed)?;
    let mut traj = Trajectory::default();
    let mut extinct = world.population() == 0;
    if sampling.steps > 0 {
        let every = sampling.sample_every.max(1);
        let mut t = 0;
        while t + every <= sampling.steps {
            world.run(every);
            t += every;
            let population = world.population();
            extinct |= population == 0;
            let ti = if population == 0 {
                None
            } else {
                ledger_analysis(&world, sampling.survivors_only).map(|(_, r)| r.incoherence)
            };
            traj.times.push(t);
            traj.ti.push(ti);
            traj.population.push(population);
        }
        if t < sampling.steps {
            world.run(sampling.steps - t);
            extinct |= world.population() == 0;
        }
    }
    let network = NetworkSnapshot::capture(&world, sampling.survivors_only);
    Ok((traj, network, *world.stats(), extinct))
}

impl NetworkSnapshot {
    /// Final endorsement network with levels, layout and speaking frequency.
    pub fn capture(world: &World, survivors_only: bool) -> Self {
        let g = world.ledger().to_graph(|id| !survivors_only || world.is_alive(id));
        let id_of = |k: usize| -> u64 { g.label(k).parse().expect("ledger labels are agent ids") };
        let analysis = if g.edge_count() == 0 {
            None
        } else {
            analyze_with(&g, Solver::auto(g.node_count())).ok()
        };
        let strengths = g.strengths();
        let mut nodes: Vec<NetworkNode> = (0..g.node_count())
            .map(|k| NetworkNode {
                id: id_of(k),
                level: None,
                in_component: false,
                speaking_frequency: strengths[k].0,
                x: None,
                y: None,
                layer: None,
            })
            .collect();
        if let Some(result) = &analysis {
            for p in layered_layout(&g, result, &LayoutOptions::default()) {
                let n = &mut nodes[p.node];
                n.in_component = true;
                n.level = Some(p.y);
                n.x = Some(p.x);
                n.y = Some(p.y);
                n.layer = Some(p.layer);
            }
        }
        let edges = g
            .edges()
            .map(|(s, t, w)| NetworkEdge {
                listener: id_of(s),
                speaker: id_of(t),
                weight: w,
            })
            .collect();
        NetworkSnapshot {
            step: world.time(),
            incoherence: analysis.as_ref().map(|r| r.incoherence),
            survivors_only,
            nodes,
            edges,
        }
    }
}

/// Per-cell statistics over replicates with a defined final TI.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub c: f64,
    pub u: f64,
    pub replicate_count: usize,
    pub final_ti: Vec<f64>,
    pub summary: Option<Summary<f64>>,
    pub regime: RegimeLabel,
    pub onset_step: Option<u64>,
    pub extinct_count: usize,
}

/// Mean, median and IQR of the final TIs.
pub fn summarize_cell(final_ti: &[f64]) -> Option<Summary<f64>> {
    summarize(final_ti)
}

impl CellSummary {
    pub fn from_trajectories(
        c: f64,
        u: f64,
        trajectories: &[&Trajectory],
        extinct_count: usize,
        thresholds: &RegimeThresholds,
        window: usize,
    ) -> Self {
        let final_ti: Vec<f64> = trajectories.iter().filter_map(|t| t.final_ti()).collect();
        CellSummary {
            c,
            u,
            replicate_count: trajectories.len(),
            summary: summarize_cell(&final_ti),
            regime: classify_regime(trajectories, thresholds),
            onset_step: stability_onset(trajectories, thresholds, window),
            final_ti,
            extinct_count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cells: Vec<CellSummary>,
    /// In `(c, u, replicate)` grid order.
    pub replicates: Vec<ReplicateOutcome>,
}

impl SweepResult {
    pub fn cell(&self, c: f64, u: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|s| s.c == c && s.u == u)
    }

    pub fn trajectories(&self, c: f64, u: f64) -> Vec<&Trajectory> {
        self.replicates
            .iter()
            .filter(|r| r.key.c == c && r.key.u == u)
            .map(|r| &r.trajectory)
            .collect()
    }
}

/// Runs every replicate of `spec` on a pool of `workers` threads.
pub fn run_sweep(
    spec: &SweepSpec,
    params: &ModelParams,
    env: &EnvParams,
    workers: usize,
) -> Result<SweepResult, ConfigError> {
    spec.validate()?;
    params.validate()?;
    env.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ConfigError::invalid("workers", e.to_string()))?;
    let jobs = spec.jobs();
    let sampling = Sampling::from(spec);
    let outcomes: Vec<Result<ReplicateOutcome, ConfigError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&key| {
                let seed = replicate_seed(spec.base_seed, key.c, key.u, key.replicate as u64);
                let cell_params = ModelParams {
                    c: key.c,
                    u: key.u,
                    ..params.clone()
                };
                let (trajectory, network, stats, extinct) = run_replicate(&cell_params, env, seed, sampling)?;
                Ok(ReplicateOutcome {
                    key,
                    seed,
                    trajectory,
                    extinct,
                    network,
                    stats,
                })
            })
            .collect()
    });
    // keyed merge: grid position, never completion order
    let mut by_key: BTreeMap<(usize, usize, usize), ReplicateOutcome> = BTreeMap::new();
    for outcome in outcomes {
        let o = outcome?;
        let ci = spec.c.iter().position(|&c| c == o.key.c).expect("c from grid");
        let ui = spec.u.iter().position(|&u| u == o.key.u).expect("u from grid");
        by_key.insert((ci, ui, o.key.replicate), o);
    }
    let replicates: Vec<ReplicateOutcome> = by_key.into_values().collect();
    let thresholds = spec.thresholds();
    let mut cells = Vec::with_capacity(spec.c.len() * spec.u.len());
    for &c in &spec.c {
        for &u in &spec.u {
            let members: Vec<&ReplicateOutcome> =
                replicates.iter().filter(|r| r.key.c == c && r.key.u == u).collect();
            let trajectories: Vec<&Trajectory> = members.iter().map(|r| &r.trajectory).collect();
            let extinct = members.iter().filter(|r| r.extinct).count();
            cells.push(CellSummary::from_trajectories(c, u, &trajectories, extinct, &thresholds, spec.window));
        }
    }
    Ok(SweepResult { cells, replicates })
}
