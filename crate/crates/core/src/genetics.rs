//! Capability initialisation, inheritance, mutation and the viability floor.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::scalar::{Real, Scalar};

/// Smallest viable capability.
pub const VIABILITY_FLOOR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityParams<T> {
    /// Mean of the founding capability distribution.
    pub mean: T,
    /// Standard deviation of founding capabilities (`c`).
    pub spread: T,
    /// Weight on the stronger parent.
    pub heritability: T,
    pub mutation_probability: T,
    /// Standard deviation of the mutation step (`u`).
    pub mutation_amplitude: T,
}

impl<T: Real> CapabilityParams<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let zero = T::zero();
        let one = T::one();
        if !(self.spread >= zero) {
            return Err(ConfigError::invalid("model.c", "must be >= 0"));
        }
        if !(self.mutation_amplitude >= zero) {
            return Err(ConfigError::invalid("model.u", "must be >= 0"));
        }
        if !(self.heritability >= zero && self.heritability <= one) {
            return Err(ConfigError::invalid("model.heritability", "must lie in [0, 1]"));
        }
        if !(self.mutation_probability >= zero && self.mutation_probability <= one) {
            return Err(ConfigError::invalid("model.mutation_probability", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

pub fn viability_clamp<T: Real>(c: T) -> T {
    c.max(T::lit(VIABILITY_FLOOR))
}

fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z)
}

/// Founding capability: `N(mean, spread²)`, floored at the viability bound.
pub fn initial_capability<T: Real, R: Rng + ?Sized>(rng: &mut R, mean: T, spread: T) -> T {
    viability_clamp(mean + spread * standard_normal::<T, R>(rng))
}

/// `h · max(p1, p2) + (1 − h) · mean(p1, p2)`.
pub fn inherit<T: Scalar>(p1: T, p2: T, heritability: T) -> T {
    let hi = if p1 >= p2 { p1 } else { p2 };
    let two = T::one() + T::one();
    heritability * hi + (T::one() - heritability) * (p1 + p2) / two
}

/// With probability `p_m` adds `N(0, u²)` noise; otherwise returns `ck` unchanged.
pub fn mutate<T: Real, R: Rng + ?Sized>(ck: T, p_m: T, u: T, rng: &mut R) -> T {
    let draw = T::lit(rng.random::<f64>());
    if draw < p_m {
        ck + u * standard_normal::<T, R>(rng)
    } else {
        ck
    }
}

/// Offspring ability: inherit, mutate, then apply the viability floor.
pub fn make_offspring<T: Real, R: Rng + ?Sized>(p1: T, p2: T, params: &CapabilityParams<T>, rng: &mut R) -> T {
    let inherited = inherit(p1, p2, params.heritability);
    let mutated = mutate(inherited, params.mutation_probability, params.mutation_amplitude, rng);
    viability_clamp(mutated)
}
