//! Reward-driven training-effort games for federated learning.
//!
//! Clients choose how many local epochs to run per round. The server pays a
//! reward proportional to the aggregate effort `Σ_j ρ_j s_j`, and each client
//! pays a quadratic cost `α_i s_i²`. The crate computes the reward thresholds
//! that govern participation, finds Nash equilibria by best-response dynamics
//! and by enumerating the fixed points of the aggregate map, sweeps the reward
//! factor, and runs a small FedAvg simulation at the resulting efforts.

pub mod best_response;
pub mod error;
pub mod fixed_point;
pub mod fl_sim;
pub mod game;
pub mod instances;
pub mod sweep;
pub mod thresholds;

pub use best_response::{best_response_player, kkt_residual, run_best_response, BestResponseRun, Init};
pub use error::{Error, Result};
pub use fixed_point::{solve_all_equilibria, NeSolutionSet, SolutionKind};
pub use game::{
    eps_ne_gap, payoff, potential, EffortBounds, EpsNeCertificate, GameSpec, Mode, StrategyProfile, Tolerance,
};
pub use sweep::{detect_thresholds_empirically, sweep_lambda, Region, Solver, SweepRow};
pub use thresholds::{compute_thresholds, ThresholdReport};
