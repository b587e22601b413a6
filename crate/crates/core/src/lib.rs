//! Agent-based simulation of hierarchy emergence among cooperating agents,
//! with a trophic-incoherence library for scoring the resulting endorsement
//! networks and a harness for parameter sweeps.
//!
//! Math modules are generic over the scalar type; the aliases below fix the
//! common choices.

pub mod agent;
pub mod config;
pub mod cooperation;
pub mod env;
pub mod error;
pub mod genetics;
pub mod harness;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod trophic;
pub mod world;

/// Exact rational scalar for closed-form checks.
pub type Exact = num_rational::Rational64;

pub type Graph64 = trophic::DirectedGraph<f64>;
pub type Graph32 = trophic::DirectedGraph<f32>;
pub type GraphExact = trophic::DirectedGraph<Exact>;
pub type TrophicResult64 = trophic::TrophicResult<f64>;
pub type TrophicResult32 = trophic::TrophicResult<f32>;
pub type TrophicResultExact = trophic::TrophicResult<Exact>;
pub type CapabilityParams64 = genetics::CapabilityParams<f64>;
pub type Summary64 = stats::Summary<f64>;
