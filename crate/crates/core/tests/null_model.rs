//! With no initial spread and no mutation every ability stays at the mean, the
//! speaker is a uniform draw, and the endorsement network stays disordered.

use hierarchy_abm::agent::ModelParams;
use hierarchy_abm::env::EnvParams;
use hierarchy_abm::harness::{run_replicate, Sampling};
use hierarchy_abm::world::World;

fn null_params(mutation_probability: f64) -> ModelParams {
    ModelParams {
        c: 0.0,
        u: 0.0,
        mutation_probability,
        ..ModelParams::default()
    }
}

#[test]
fn abilities_never_move() {
    let mut w = World::new(null_params(1.0), EnvParams::default(), 21).unwrap();
    w.run(3000);
    assert!(w.stats().births > 0);
    assert!(w.agents().iter().all(|a| a.ability == 100.0));
}

#[test]
fn null_model_stays_incoherent() {
    let sampling = Sampling {
        steps: 6000,
        sample_every: 100,
        survivors_only: true,
    };
    for (seed, p_m) in [(1, 0.0), (2, 0.5), (3, 1.0)] {
        let (traj, _, _, extinct) = run_replicate(&null_params(p_m), &EnvParams::default(), seed, sampling).unwrap();
        assert!(!extinct);
        let tail: Vec<f64> = traj.ti.iter().rev().take(10).map(|v| v.expect("defined sample")).collect();
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        assert!(mean > 0.7, "seed {seed}, p_m {p_m}: mean TI over last 10 samples {mean}");
    }
}
