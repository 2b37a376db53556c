//! FedAvg simulation driven by equilibrium training efforts.
//!
//! Each client trains a softmax-linear model for `⌈s_i⌉` local epochs per
//! round, starting from the current global model; the server then averages
//! the client models with the data weights `ρ_i`.

pub mod data;
pub mod model;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use data::{DatasetConfig, Samples, SyntheticDataset};
pub use model::{fedavg_round, local_update, ModelState};

use crate::error::{Error, Result};
use crate::fixed_point;
use crate::game::{GameSpec, StrategyProfile};
use crate::thresholds::ThresholdReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    /// `None` means half of each client's dataset.
    pub batch_size: Option<usize>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            rounds: 20,
            learning_rate: 0.01,
            batch_size: None,
        }
    }
}

/// Per-round record of one federated training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FederatedRunTrace {
    pub lambda: f64,
    /// Equilibrium efforts before rounding.
    pub equilibrium_efforts: Vec<f64>,
    /// Local epochs actually run per round, `⌈s_i⌉`.
    pub applied_efforts: Vec<usize>,
    /// `Σ_i ρ_i (1/T) Σ_t` of the applied efforts.
    pub average_effort: f64,
    /// Training loss of the global model after each round.
    pub loss: Vec<f64>,
    /// Test accuracy of the global model after each round.
    pub accuracy: Vec<f64>,
}

impl FederatedRunTrace {
    pub fn final_accuracy(&self) -> f64 {
        self.accuracy.last().copied().unwrap_or(0.0)
    }

    pub fn final_loss(&self) -> f64 {
        self.loss.last().copied().unwrap_or(f64::NAN)
    }
}

/// `⌈s⌉`, ignoring round-off just above an integer.
pub fn effort_to_epochs(s: f64) -> usize {
    (s - 1e-9).ceil().max(0.0) as usize
}

/// Trains with fixed per-client epoch counts (the same in every round).
pub fn run_federated(
    dataset: &SyntheticDataset,
    weights: &[f64],
    epochs: &[usize],
    config: &TrainingConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = dataset.clients.len();
    if weights.len() != m || epochs.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{m} clients, {} weights, {} effort values",
            weights.len(),
            epochs.len()
        )));
    }
    let train = dataset.all_training();
    let mut global = ModelState::zeros(dataset.num_classes, dataset.num_features);
    let mut losses = Vec::with_capacity(config.rounds);
    let mut accuracies = Vec::with_capacity(config.rounds);
    for round in 0..config.rounds {
        let locals = dataset
            .clients
            .par_iter()
            .zip(epochs)
            .map(|(client, &e)| {
                let batch = config.batch_size.unwrap_or((client.len() / 2).max(1));
                local_update(&global, client, e, config.learning_rate, batch).map_err(|err| match err {
                    Error::Divergence { .. } => Error::Divergence { round: Some(round) },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        global = fedavg_round(&locals, weights)?;
        let loss = global.loss(&train);
        if !loss.is_finite() {
            return Err(Error::Divergence { round: Some(round) });
        }
        losses.push(loss);
        accuracies.push(global.accuracy(&dataset.test));
    }
    Ok((losses, accuracies))
}

/// Solves the game at each `λ`, rounds the equilibrium efforts up and runs FedAvg.
///
/// When `λ` sits on a continuum of equilibria the interval midpoint is used.
pub fn run_cases(
    spec: &GameSpec,
    lambdas: &[f64],
    dataset: &SyntheticDataset,
    config: &TrainingConfig,
) -> Result<Vec<FederatedRunTrace>> {
    if spec.num_players() != dataset.clients.len() {
        return Err(Error::DimensionMismatch(format!(
            "game has {} players but dataset has {} clients",
            spec.num_players(),
            dataset.clients.len()
        )));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            let game = spec.with_reward_factor(lambda)?;
            let solution = fixed_point::solve_all_equilibria(&game)?;
            let efforts = solution.representative_profile().first_round();
            let applied: Vec<usize> = efforts.iter().map(|&s| effort_to_epochs(s)).collect();
            let applied_profile =
                StrategyProfile::homogeneous(applied.iter().map(|&e| e as f64).collect());
            let (loss, accuracy) = run_federated(dataset, game.data_weights(), &applied, config)?;
            Ok(FederatedRunTrace {
                lambda,
                equilibrium_efforts: efforts,
                average_effort: applied_profile.average_effort(game.data_weights()),
                applied_efforts: applied,
                loss,
                accuracy,
            })
        })
        .collect()
}

/// Four reward factors around the thresholds: below activation, just before
/// and just after the jump point, and past saturation.
pub fn threshold_cases(report: &ThresholdReport) -> [f64; 4] {
    let star = report.lambda_star;
    let offset = 0.01 * star;
    let before = if report.lambda_1 < star - offset {
        star - offset
    } else {
        0.5 * (report.lambda_1 + star)
    };
    let after = if star + offset < report.lambda_2 {
        star + offset
    } else {
        0.5 * (star + report.lambda_2)
    };
    [0.95 * report.lambda_1, before, after, 1.05 * report.lambda_2]
}
