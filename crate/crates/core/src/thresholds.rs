//! Critical reward factors of the homogeneous game.
//!
//! With `κ_i = α_i / ρ_i`:
//!
//! * concavity threshold `λ̄ = min_i κ_i`;
//! * jump point `λ*`, the root in `(0, λ̄]` of `Σ_i λ / (2κ_i − λ) = 1`;
//! * `c₁ = max_i (2α_i q_i/λ* − ρ_i q_i)`, `c₂ = min_i (2α_i Q_i/λ* − ρ_i Q_i)`;
//! * activation point `λ₁ = 2 min_i α_i q_i / (q̄ + ρ_i q_i)`;
//! * saturation point `λ₂ = 2 max_i α_i Q_i / (Q̄ + ρ_i Q_i)`;
//!
//! where `q̄ = Σ ρ_i q_i` and `Q̄ = Σ ρ_i Q_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, Mode};

const MAX_BISECTION_ITERS: usize = 200;
const BISECTION_TOL: f64 = 1e-12;

/// The critical constants of a homogeneous game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub lambda_bar: f64,
    pub lambda_star: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub c1: f64,
    pub c2: f64,
    /// `c₁ < c₂`: the equilibrium aggregate jumps at `λ*` and the NE set there is a continuum.
    pub jump_occurs: bool,
    /// Some `q_i = 0`, so the activation point collapses to zero.
    pub activation_degenerate: bool,
    /// `|c₁ − c₂| < 1e-9`: the jump classification is numerically fragile.
    pub jump_near_degenerate: bool,
}

fn homogeneous_only(spec: &GameSpec, op: &'static str) -> Result<()> {
    if spec.mode() != Mode::Homogeneous {
        return Err(Error::WrongMode {
            op,
            expected: "homogeneous",
        });
    }
    Ok(())
}

fn weighted_costs(spec: &GameSpec) -> Vec<f64> {
    spec.cost_coeffs()
        .iter()
        .zip(spec.data_weights())
        .map(|(a, r)| a / r)
        .collect()
}

/// `λ̄ = min_i α_i / ρ_i`.
pub fn concavity_threshold(spec: &GameSpec) -> f64 {
    weighted_costs(spec).into_iter().fold(f64::INFINITY, f64::min)
}

fn lhs(kappa: &[f64], lambda: f64) -> f64 {
    kappa.iter().map(|k| lambda / (2.0 * k - lambda)).sum()
}

/// Left-hand side of the jump-point equation, `Σ_i λ / (2α_i/ρ_i − λ)`.
///
/// Defined for `0 < λ ≤ λ̄` (the right end is included so that single-player
/// games, where `λ* = λ̄`, can be checked too).
pub fn lambda_star_equation_lhs(spec: &GameSpec, lambda: f64) -> Result<f64> {
    let bar = concavity_threshold(spec);
    if !(lambda > 0.0 && lambda <= bar) {
        return Err(Error::Domain(format!(
            "lambda = {lambda} outside (0, {bar}]"
        )));
    }
    Ok(lhs(&weighted_costs(spec), lambda))
}

/// Bisection on the strictly increasing jump-point equation.
///
/// Returns the root and every bracket visited; each bracket satisfies
/// `lhs(lo) < 1 <= lhs(hi)`.
pub(crate) fn bisect_lambda_star(kappa: &[f64]) -> (f64, Vec<(f64, f64)>) {
    let bar = kappa.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = 1e-12 * bar;
    let mut hi = bar;
    let mut brackets = vec![(lo, hi)];
    for _ in 0..MAX_BISECTION_ITERS {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lhs(kappa, mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        brackets.push((lo, hi));
    }
    // The closer endpoint in function value.
    let root = if (lhs(kappa, lo) - 1.0).abs() < (lhs(kappa, hi) - 1.0).abs() {
        lo
    } else {
        hi
    };
    (root, brackets)
}

/// Jump point `λ*` alone.
pub fn lambda_star(spec: &GameSpec) -> f64 {
    bisect_lambda_star(&weighted_costs(spec)).0
}

/// All critical reward factors of a homogeneous game.
pub fn compute_thresholds(spec: &GameSpec) -> Result<ThresholdReport> {
    homogeneous_only(spec, "compute_thresholds")?;
    let (q, upper) = spec.box_bounds()?;
    let alpha = spec.cost_coeffs();
    let rho = spec.data_weights();
    let m = spec.num_players();

    let lambda_bar = concavity_threshold(spec);
    let lambda_star = lambda_star(spec);

    let c1 = (0..m)
        .map(|i| 2.0 * alpha[i] * q[i] / lambda_star - rho[i] * q[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let c2 = (0..m)
        .map(|i| 2.0 * alpha[i] * upper[i] / lambda_star - rho[i] * upper[i])
        .fold(f64::INFINITY, f64::min);

    let q_bar: f64 = (0..m).map(|i| rho[i] * q[i]).sum();
    let upper_bar: f64 = (0..m).map(|i| rho[i] * upper[i]).sum();

    let lambda_1 = 2.0
        * (0..m)
            .map(|i| {
                if q[i] == 0.0 {
                    0.0
                } else {
                    alpha[i] * q[i] / (q_bar + rho[i] * q[i])
                }
            })
            .fold(f64::INFINITY, f64::min);
    let lambda_2 = 2.0
        * (0..m)
            .map(|i| alpha[i] * upper[i] / (upper_bar + rho[i] * upper[i]))
            .fold(f64::NEG_INFINITY, f64::max);

    let jump_near_degenerate = (c1 - c2).abs() < 1e-9;
    if jump_near_degenerate {
        log::warn!("c1 = {c1} and c2 = {c2} are within 1e-9; jump classification is fragile");
    }

    Ok(ThresholdReport {
        lambda_bar,
        lambda_star,
        lambda_1,
        lambda_2,
        c1,
        c2,
        jump_occurs: c1 < c2,
        activation_degenerate: lambda_1 == 0.0,
        jump_near_degenerate,
    })
}
