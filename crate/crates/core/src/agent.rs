//! Agent state, model parameters, and the per-agent decision rules.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cooperation::AgentId;
use crate::env::{SensedNeighborhood, Vec2, VillageProximity};
use crate::error::ConfigError;
use crate::genetics::CapabilityParams;

/// Energy level that separates foraging from reproduction behaviour.
pub const ENERGY_THRESHOLD: f64 = 10.0;
/// Idle neighbours an initiator needs before it can form a team.
pub const MIN_IDLE_NEIGHBORS: usize = 2;
pub const TEAM_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            Sex::Male
        } else {
            Sex::Female
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionState {
    Dead,
    MovingToVillage,
    Idle,
    WaitRepro,
    Reproduction { partner: AgentId },
    Cooperation { team: [AgentId; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub sex: Sex,
    /// Age in ticks of `age_tick_interval` steps.
    pub age: u32,
    pub energy: f64,
    pub pos: Vec2,
    pub ability: f64,
    pub action: ActionState,
    pub birth_step: u64,
}

impl Agent {
    pub fn is_alive(&self) -> bool {
        self.action != ActionState::Dead
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Intrinsic fertility `f`.
    pub fertility: f64,
    pub carrying_capacity: f64,
    pub initial_population: usize,
    /// Initial heterogeneity: standard deviation of founding capabilities.
    pub c: f64,
    /// Mutation amplitude: standard deviation of a mutation step.
    pub u: f64,
    pub mutation_probability: f64,
    pub heritability: f64,
    pub capability_mean: f64,
    pub initial_energy: f64,
    pub metabolic_cost: f64,
    pub movement_cost: f64,
    /// Energy in one food item, shared by the whole team.
    pub food_energy: f64,
    pub reproduction_cost: f64,
    pub mortality_base: f64,
    pub mortality_age: f64,
    /// Age (in ticks) from which the age hazard applies.
    pub age_threshold: u32,
    pub age_tick_interval: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            fertility: 0.8,
            carrying_capacity: 300.0,
            initial_population: 100,
            c: 0.05,
            u: 1.0,
            mutation_probability: 1.0,
            heritability: 0.9,
            capability_mean: 100.0,
            initial_energy: 20.0,
            metabolic_cost: 0.05,
            movement_cost: 0.1,
            food_energy: 10.0,
            reproduction_cost: 5.0,
            mortality_base: 0.00005,
            mortality_age: 0.01,
            age_threshold: 10,
            age_tick_interval: 1000,
        }
    }
}

impl ModelParams {
    pub fn capability(&self) -> CapabilityParams<f64> {
        CapabilityParams {
            mean: self.capability_mean,
            spread: self.c,
            heritability: self.heritability,
            mutation_probability: self.mutation_probability,
            mutation_amplitude: self.u,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, key: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, msg))
            }
        };
        check(self.fertility > 0.0 && self.fertility < 1.0, "model.fertility", "must lie in (0, 1)")?;
        check(self.carrying_capacity > 0.0, "model.carrying_capacity", "must be positive")?;
        check(self.capability_mean.is_finite(), "model.capability_mean", "must be finite")?;
        for (v, key) in [
            (self.initial_energy, "model.initial_energy"),
            (self.metabolic_cost, "model.metabolic_cost"),
            (self.movement_cost, "model.movement_cost"),
            (self.food_energy, "model.food_energy"),
            (self.reproduction_cost, "model.reproduction_cost"),
            (self.mortality_base, "model.mortality_base"),
            (self.mortality_age, "model.mortality_age"),
        ] {
            check(v >= 0.0 && v.is_finite(), key, "must be a finite non-negative number")?;
        }
        check(self.age_tick_interval > 0, "model.age_tick_interval", "must be positive")?;
        self.capability().validate()
    }
}

/// Logistic birth rate `f · (1 − N/K)`, floored at zero.
pub fn birth_rate(population: usize, capacity: f64, fertility: f64) -> f64 {
    (fertility * (1.0 - population as f64 / capacity)).max(0.0)
}

/// Per-step hazard: constant below the age threshold, rising linearly above.
pub fn hazard(age: u32, params: &ModelParams) -> f64 {
    let extra = if age >= params.age_threshold {
        params.mortality_age * f64::from(age + 1 - params.age_threshold)
    } else {
        0.0
    };
    params.mortality_base + extra
}

/// Probability of dying this step.
pub fn death_probability(agent: &Agent, params: &ModelParams) -> f64 {
    if agent.energy <= 0.0 {
        return 1.0;
    }
    1.0 - (-hazard(agent.age, params)).exp()
}

/// Draws one uniform and reports whether the agent dies this step.
pub fn death_check<R: Rng + ?Sized>(agent: &Agent, rng: &mut R, params: &ModelParams) -> bool {
    let draw: f64 = rng.random();
    agent.energy <= 0.0 || draw < death_probability(agent, params)
}

/// Mating rule: both well fed, both inside the same village, both waiting
/// in the previous step, opposite sexes.
pub fn reproduction_predicate(i: &Agent, j: &Agent, vi: &VillageProximity, vj: &VillageProximity) -> bool {
    i.energy > ENERGY_THRESHOLD
        && j.energy > ENERGY_THRESHOLD
        && vi.inside()
        && vj.inside()
        && vi.village == vj.village
        && i.action == ActionState::WaitRepro
        && j.action == ActionState::WaitRepro
        && i.sex != j.sex
}

/// Team initiation rule: hungry, at least two idle neighbours, food in reach.
pub fn cooperation_predicate(energy: f64, sensed: &SensedNeighborhood) -> bool {
    energy < ENERGY_THRESHOLD && sensed.idle_neighbors >= MIN_IDLE_NEIGHBORS && sensed.accessible_food >= 1
}

/// What an agent tries to do this step, before joint actions are matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    Die,
    InitiateCooperation,
    /// Was waiting last step and is still eligible: look for a partner.
    SeekPartner { village: usize },
    WaitRepro,
    MoveToVillage,
    Idle,
}

/// Highest-priority action whose condition holds for `agent` at the snapshot.
pub fn select_action(agent: &Agent, sensed: &SensedNeighborhood, village: &VillageProximity, dies: bool) -> Intent {
    if dies {
        return Intent::Die;
    }
    if cooperation_predicate(agent.energy, sensed) {
        return Intent::InitiateCooperation;
    }
    solo_action(agent, village)
}

/// [`select_action`] without death or cooperation; used when a joint action
/// cannot be formed.
pub fn solo_action(agent: &Agent, village: &VillageProximity) -> Intent {
    let fed = agent.energy > ENERGY_THRESHOLD;
    if fed && village.inside() {
        if agent.action == ActionState::WaitRepro {
            Intent::SeekPartner { village: village.village }
        } else {
            Intent::WaitRepro
        }
    } else if fed {
        Intent::MoveToVillage
    } else {
        Intent::Idle
    }
}
