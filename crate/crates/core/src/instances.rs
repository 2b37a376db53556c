//! Seeded random game instances.
//!
//! All generators use ChaCha8 seeded from a `u64`, so an instance is fully
//! determined by its seed and parameters.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{EffortBounds, GameSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random positive weights summing to one.
pub fn random_weights<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Ranges for [`random_homogeneous`].
#[derive(Clone, Debug)]
pub struct InstanceRanges {
    pub players: (usize, usize),
    pub alpha: (f64, f64),
    pub q: (f64, f64),
    /// `Q_i` is drawn from `[q_i + gap.0, gap.1]`.
    pub upper: (f64, f64),
    pub uniform_weights: bool,
}

impl Default for InstanceRanges {
    fn default() -> Self {
        InstanceRanges {
            players: (2, 12),
            alpha: (0.5, 4.0),
            q: (0.0, 5.0),
            upper: (0.1, 50.0),
            uniform_weights: false,
        }
    }
}

/// Homogeneous game with parameters drawn from `ranges`; `λ = 1`.
pub fn random_homogeneous<R: Rng>(rng: &mut R, ranges: &InstanceRanges) -> GameSpec {
    let m = rng.random_range(ranges.players.0..=ranges.players.1);
    let alpha: Vec<f64> = (0..m)
        .map(|_| rng.random_range(ranges.alpha.0..=ranges.alpha.1))
        .collect();
    let q: Vec<f64> = (0..m).map(|_| rng.random_range(ranges.q.0..=ranges.q.1)).collect();
    let upper: Vec<f64> = q
        .iter()
        .map(|qi| {
            let lo = qi + ranges.upper.0;
            rng.random_range(lo..=ranges.upper.1.max(lo))
        })
        .collect();
    let weights = if ranges.uniform_weights {
        None
    } else {
        Some(random_weights(rng, m))
    };
    GameSpec::new(
        1,
        1.0,
        alpha,
        weights,
        EffortBounds::Homogeneous { lower: q, upper },
    )
    .expect("generated instance is valid")
}

fn scenario(seed: u64, m: usize, rounds: usize, q_range: (f64, f64)) -> GameSpec {
    let mut rng = rng(seed);
    let alpha: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..=2.0)).collect();
    let q: Vec<f64> = (0..m).map(|_| rng.random_range(q_range.0..=q_range.1)).collect();
    let upper: Vec<f64> = (0..m).map(|_| rng.random_range(20.0..=30.0)).collect();
    GameSpec::new(
        rounds,
        1.0,
        alpha,
        None,
        EffortBounds::Homogeneous { lower: q, upper },
    )
    .expect("scenario instance is valid")
}

/// Lower bounds fixed at one, `Q_i ~ U[20, 30]`, `α_i ~ U[1, 2]`, uniform weights.
pub fn scenario_one(seed: u64, m: usize, rounds: usize) -> GameSpec {
    scenario(seed, m, rounds, (1.0, 1.0))
}

/// As [`scenario_one`] but with `q_i ~ U[1, 20]`.
pub fn scenario_two(seed: u64, m: usize, rounds: usize) -> GameSpec {
    scenario(seed, m, rounds, (1.0, 20.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generation_is_reproducible() {
        assert_eq!(scenario_one(7, 20, 50), scenario_one(7, 20, 50));
        assert_ne!(scenario_one(7, 20, 50), scenario_one(8, 20, 50));
        let a = random_homogeneous(&mut rng(3), &InstanceRanges::default());
        let b = random_homogeneous(&mut rng(3), &InstanceRanges::default());
        assert_eq!(a, b);
    }

    #[test]
    fn weights_sum_to_one() {
        let mut r = rng(11);
        for m in 1..30 {
            let w = random_weights(&mut r, m);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
