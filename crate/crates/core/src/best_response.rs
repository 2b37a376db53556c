//! Exact best responses and Gauss–Seidel best-response dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{self, EffortBounds, EpsNeCertificate, GameSpec, StrategyProfile};

const MULTIPLIER_ITERS: usize = 200;
const BUDGET_TOL: f64 = 1e-12;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 100_000;

/// Starting point for best-response dynamics.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// `q_i` (homogeneous) or `b_i` spread evenly over rounds (heterogeneous).
    Lower,
    /// `Q_i` or `B_i` spread evenly.
    Upper,
    /// Midpoint of the two.
    Mid,
    Profile(StrategyProfile),
}

impl Init {
    pub fn profile(&self, spec: &GameSpec) -> StrategyProfile {
        let bound_profile = |lower: &[f64], upper: &[f64], rounds: usize, w: f64| {
            let cols = lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| vec![((1.0 - w) * lo + w * hi) / rounds as f64; rounds])
                .collect();
            StrategyProfile::from_players(cols)
        };
        let weight = match self {
            Init::Lower => 0.0,
            Init::Upper => 1.0,
            Init::Mid => 0.5,
            Init::Profile(p) => return p.clone(),
        };
        match spec.bounds() {
            EffortBounds::Homogeneous { lower, upper } => bound_profile(lower, upper, 1, weight),
            EffortBounds::Heterogeneous {
                min_total,
                max_total,
            } => bound_profile(min_total, max_total, spec.num_rounds(), weight),
        }
    }
}

/// Outcome of [`run_best_response`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BestResponseRun {
    pub final_profile: StrategyProfile,
    /// Number of completed sweeps.
    pub iterations: usize,
    /// Potential before the first sweep and after each sweep (`iterations + 1` values).
    pub potential_trace: Vec<f64>,
    /// Euclidean norm of `s^k − s^{k−1}` for each sweep.
    pub step_norms: Vec<f64>,
    /// ε-NE gap of `s^k` after each sweep.
    pub eps_trace: Vec<f64>,
    pub certificate: EpsNeCertificate,
    pub converged: bool,
    /// Largest KKT residual over all budget-constrained solves (zero in homogeneous mode).
    pub max_kkt_residual: f64,
}

/// Other players' weighted effort in each round, `A^t = Σ_{j≠i} ρ_j s_j^t`.
fn others_aggregate(spec: &GameSpec, profile: &StrategyProfile, player: usize) -> Vec<f64> {
    let rho = spec.data_weights();
    (0..profile.num_rounds())
        .map(|t| {
            profile
                .players()
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != player)
                .map(|(j, col)| rho[j] * col[t])
                .sum()
        })
        .collect()
}

fn box_response(spec: &GameSpec, player: usize, others: f64, lower: f64, upper: f64) -> f64 {
    let lambda = spec.reward_factor();
    let alpha = spec.cost_coeffs()[player];
    let rho = spec.data_weights()[player];
    if alpha > lambda * rho {
        let unconstrained = lambda * others / (2.0 * (alpha - lambda * rho));
        unconstrained.clamp(lower, upper)
    } else {
        // Convex and nondecreasing on the box; ties (zero aggregate) go to the upper bound.
        upper
    }
}

/// Maximizer of `Σ_t [λ A^t x_t − d x_t²]` over `x ≥ 0`, `Σ x ∈ [min_total, max_total]`,
/// with curvature `d = α_i − λρ_i > 0`.
fn budget_response(lambda: f64, curvature: f64, others: &[f64], min_total: f64, max_total: f64) -> Vec<f64> {
    let free: Vec<f64> = others
        .iter()
        .map(|a| (lambda * a / (2.0 * curvature)).max(0.0))
        .collect();
    let free_total: f64 = free.iter().sum();
    if free_total >= min_total && free_total <= max_total {
        return free;
    }
    let target = if free_total < min_total { min_total } else { max_total };
    let at = |mu: f64| -> Vec<f64> {
        others
            .iter()
            .map(|a| ((lambda * a + mu) / (2.0 * curvature)).max(0.0))
            .collect()
    };
    let total = |mu: f64| -> f64 { at(mu).iter().sum() };

    let max_a = others.iter().copied().fold(0.0, f64::max);
    let alpha_scale = 2.0 * curvature.max(1.0) * max_total.max(1.0);
    let mut lo = -lambda * max_a - alpha_scale;
    let mut hi = alpha_scale;
    while total(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..MULTIPLIER_ITERS {
        let mid = 0.5 * (lo + hi);
        let residual = total(mid) - target;
        if residual.abs() <= BUDGET_TOL || mid <= lo || mid >= hi {
            lo = mid;
            hi = mid;
            break;
        }
        if residual < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);

    // Polish: with the active set fixed, the multiplier has a closed form.
    let active: Vec<usize> = (0..others.len())
        .filter(|&t| lambda * others[t] + mu > 0.0)
        .collect();
    if !active.is_empty() {
        let sum_a: f64 = active.iter().map(|&t| lambda * others[t]).sum();
        let exact = (2.0 * curvature * target - sum_a) / active.len() as f64;
        let consistent = (0..others.len()).all(|t| {
            let v = lambda * others[t] + exact;
            if active.contains(&t) {
                v >= 0.0
            } else {
                v <= 0.0
            }
        });
        if consistent {
            return at(exact);
        }
    }
    at(mu)
}

pub(crate) fn best_response_unchecked(
    spec: &GameSpec,
    profile: &StrategyProfile,
    player: usize,
) -> Result<Vec<f64>> {
    match spec.bounds() {
        EffortBounds::Homogeneous { lower, upper } => {
            let others = others_aggregate(spec, profile, player)[0];
            Ok(vec![box_response(spec, player, others, lower[player], upper[player])])
        }
        EffortBounds::Heterogeneous {
            min_total,
            max_total,
        } => {
            let lambda = spec.reward_factor();
            let alpha = spec.cost_coeffs()[player];
            let rho = spec.data_weights()[player];
            if !spec.is_concave_for(player) {
                return Err(Error::UnsupportedRegime {
                    player,
                    alpha,
                    lambda,
                    rho,
                });
            }
            let others = others_aggregate(spec, profile, player);
            Ok(budget_response(
                lambda,
                alpha - lambda * rho,
                &others,
                min_total[player],
                max_total[player],
            ))
        }
    }
}

/// Exact maximizer of `player`'s payoff given everyone else's efforts.
///
/// Homogeneous: the clamped stationary point when the payoff is concave
/// (`α_i > λρ_i`), otherwise `Q_i`. Heterogeneous: the budget-constrained
/// quadratic program solved through its KKT conditions.
pub fn best_response_player(
    spec: &GameSpec,
    profile: &StrategyProfile,
    player: usize,
) -> Result<Vec<f64>> {
    spec.check_player(player)?;
    spec.check_feasible(profile)?;
    best_response_unchecked(spec, profile, player)
}

/// KKT residual of `column` as player `player`'s budget-constrained best response.
///
/// Combines stationarity over positive rounds, dual feasibility over zero
/// rounds, budget feasibility and the sign of the budget multiplier.
pub fn kkt_residual(
    spec: &GameSpec,
    profile: &StrategyProfile,
    player: usize,
    column: &[f64],
) -> Result<f64> {
    let (min_total, max_total) = spec.budget_bounds()?;
    spec.check_player(player)?;
    let lambda = spec.reward_factor();
    let curvature = spec.cost_coeffs()[player] - lambda * spec.data_weights()[player];
    let others = others_aggregate(spec, profile, player);
    let grad: Vec<f64> = others
        .iter()
        .zip(column)
        .map(|(a, x)| lambda * a - 2.0 * curvature * x)
        .collect();
    let scale = 1.0 + grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let zero_tol = 1e-12 * (1.0 + max_total[player]);
    let positive: Vec<usize> = (0..column.len()).filter(|&t| column[t] > zero_tol).collect();
    let mu = if positive.is_empty() {
        0.0
    } else {
        -positive.iter().map(|&t| grad[t]).sum::<f64>() / positive.len() as f64
    };
    let total: f64 = column.iter().sum();
    let budget_tol = 1e-9 * (1.0 + max_total[player]);
    let at_min = (total - min_total[player]).abs() <= budget_tol;
    let at_max = (total - max_total[player]).abs() <= budget_tol;

    let mut residual = 0.0f64;
    for t in 0..column.len() {
        if column[t] < -zero_tol {
            residual = residual.max(-column[t]);
        }
        if positive.contains(&t) {
            residual = residual.max((grad[t] + mu).abs() / scale);
        } else {
            residual = residual.max((grad[t] + mu).max(0.0) / scale);
        }
    }
    residual = residual.max((min_total[player] - total).max(0.0));
    residual = residual.max((total - max_total[player]).max(0.0));
    let sign_violation = match (at_min, at_max) {
        (true, true) => 0.0,
        (true, false) => (-mu).max(0.0),
        (false, true) => mu.max(0.0),
        (false, false) => mu.abs(),
    };
    Ok(residual.max(sign_violation / scale))
}

/// Runs Gauss–Seidel best-response sweeps (players updated in index order,
/// each seeing the already-updated efforts of earlier players).
///
/// Stops when a sweep moves no effort by more than `tol` (max norm) or after
/// `max_iters` sweeps.
pub fn run_best_response(
    spec: &GameSpec,
    init: &StrategyProfile,
    max_iters: usize,
    tol: f64,
) -> Result<BestResponseRun> {
    if max_iters == 0 {
        return Err(Error::Domain("max_iters must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be > 0, got {tol}")));
    }
    spec.check_feasible(init)?;

    let heterogeneous = spec.budget_bounds().is_ok();
    let mut current = init.clone();
    let mut potential_trace = vec![game::potential_unchecked(spec, &current)];
    let mut step_norms = Vec::new();
    let mut eps_trace = Vec::new();
    let mut max_kkt_residual = 0.0f64;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        let previous = current.clone();
        for i in 0..spec.num_players() {
            let response = best_response_unchecked(spec, &current, i)?;
            if heterogeneous {
                max_kkt_residual = max_kkt_residual.max(kkt_residual(spec, &current, i, &response)?);
            }
            current.set_player(i, response);
        }
        iterations += 1;

        let p = game::potential_unchecked(spec, &current);
        if !p.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite potential after sweep {iterations}"
            )));
        }
        potential_trace.push(p);
        step_norms.push(current.l2_diff(&previous));
        eps_trace.push(game::eps_ne_gap_unchecked(spec, &current)?.eps);

        if current.max_abs_diff(&previous) <= tol {
            converged = true;
            break;
        }
    }

    let certificate = game::eps_ne_gap_unchecked(spec, &current)?;
    Ok(BestResponseRun {
        final_profile: current,
        iterations,
        potential_trace,
        step_norms,
        eps_trace,
        certificate,
        converged,
        max_kkt_residual,
    })
}
