#![allow(dead_code)]

use flgame::instances::{self, InstanceRanges};
use flgame::{EffortBounds, GameSpec, StrategyProfile};
use rand::Rng;

/// Random homogeneous game with the given reward factor.
pub fn homogeneous<R: Rng>(rng: &mut R, lambda: f64) -> GameSpec {
    instances::random_homogeneous(rng, &InstanceRanges::default())
        .with_reward_factor(lambda)
        .unwrap()
}

/// Random budget-constrained game whose payoffs are all concave.
pub fn heterogeneous<R: Rng>(rng: &mut R) -> GameSpec {
    let m = rng.random_range(2..=6);
    let rounds = rng.random_range(2..=5);
    let alpha: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..=4.0)).collect();
    let rho = instances::random_weights(rng, m);
    let min_total: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..=5.0)).collect();
    let max_total: Vec<f64> = min_total
        .iter()
        .map(|b| rng.random_range(b + 0.1..=b + 20.0))
        .collect();
    let concavity = alpha
        .iter()
        .zip(&rho)
        .map(|(a, r)| a / r)
        .fold(f64::INFINITY, f64::min);
    let lambda = rng.random_range(0.05..0.95) * concavity;
    GameSpec::new(
        rounds,
        lambda,
        alpha,
        Some(rho),
        EffortBounds::Heterogeneous {
            min_total,
            max_total,
        },
    )
    .unwrap()
}

/// Uniformly random feasible profile.
pub fn random_profile<R: Rng>(rng: &mut R, spec: &GameSpec) -> StrategyProfile {
    let cols = (0..spec.num_players())
        .map(|i| random_column(rng, spec, i))
        .collect();
    StrategyProfile::from_players(cols)
}

/// Random feasible strategy for one player.
pub fn random_column<R: Rng>(rng: &mut R, spec: &GameSpec, i: usize) -> Vec<f64> {
    match spec.bounds() {
        EffortBounds::Homogeneous { lower, upper } => vec![rng.random_range(lower[i]..=upper[i])],
        EffortBounds::Heterogeneous {
            min_total,
            max_total,
        } => {
            let raw: Vec<f64> = (0..spec.num_rounds())
                .map(|_| rng.random_range(0.0..1.0f64))
                .collect();
            let sum: f64 = raw.iter().sum::<f64>().max(1e-12);
            let total = rng.random_range(min_total[i]..=max_total[i]);
            raw.iter().map(|x| x / sum * total).collect()
        }
    }
}
