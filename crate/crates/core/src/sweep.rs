//! Reward-factor sweeps and empirical threshold localization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::best_response::{self, Init};
use crate::error::{Error, Result};
use crate::fixed_point::{self, SolutionKind};
use crate::game::{self, GameSpec};
use crate::thresholds::{self, ThresholdReport};

/// Grid points this close to `λ*` are resolved by the fixed-point enumerator.
pub const JUMP_POINT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    BestResponse,
    FixedPoint,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    BelowActivation,
    PreJump,
    Continuum,
    PostJump,
    Saturated,
    Nonconcave,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::BelowActivation => "below_activation",
            Region::PreJump => "pre_jump",
            Region::Continuum => "continuum",
            Region::PostJump => "post_jump",
            Region::Saturated => "saturated",
            Region::Nonconcave => "nonconcave",
        }
    }

    /// Classifies `lambda` against the thresholds of its game.
    pub fn classify(lambda: f64, report: &ThresholdReport) -> Region {
        if (lambda - report.lambda_star).abs() <= JUMP_POINT_TOL && report.jump_occurs {
            Region::Continuum
        } else if lambda > report.lambda_2 {
            Region::Saturated
        } else if lambda >= report.lambda_bar {
            Region::Nonconcave
        } else if lambda < report.lambda_1 {
            Region::BelowActivation
        } else if lambda < report.lambda_star {
            Region::PreJump
        } else {
            Region::PostJump
        }
    }
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    /// `Σ ρ_i s*_i` at the selected equilibrium (interval midpoint on a continuum).
    pub s_bar: f64,
    pub region: Region,
    /// Best-response sweeps used (0 when only the fixed-point solver ran).
    pub iterations: usize,
    pub eps: f64,
    /// Max-norm distance between the two solvers' profiles (solver = both).
    pub discrepancy: Option<f64>,
    /// `[c₁, c₂]` when the point sits on a continuum of equilibria.
    pub continuum: Option<(f64, f64)>,
    pub error: Option<String>,
}

fn solve_point(spec: &GameSpec, report: &ThresholdReport, lambda: f64, solver: Solver) -> SweepRow {
    let region = Region::classify(lambda, report);
    let mut row = SweepRow {
        lambda,
        s_bar: f64::NAN,
        region,
        iterations: 0,
        eps: f64::NAN,
        discrepancy: None,
        continuum: None,
        error: None,
    };
    if let Err(e) = fill_row(spec, lambda, solver, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn fill_row(spec: &GameSpec, lambda: f64, solver: Solver, row: &mut SweepRow) -> Result<()> {
    let spec = spec.with_reward_factor(lambda)?;
    let weights = spec.data_weights();
    let use_fixed = solver != Solver::BestResponse || row.region == Region::Continuum;
    let use_br = solver != Solver::FixedPoint && row.region != Region::Continuum;

    let fixed = if use_fixed {
        Some(fixed_point::solve_all_equilibria(&spec)?)
    } else {
        None
    };
    let run = if use_br {
        let init = Init::Lower.profile(&spec);
        Some(best_response::run_best_response(
            &spec,
            &init,
            best_response::DEFAULT_MAX_ITERS,
            best_response::DEFAULT_TOL,
        )?)
    } else {
        None
    };

    match (&fixed, &run) {
        (_, Some(run)) => {
            row.s_bar = run.final_profile.average_effort(weights);
            row.iterations = run.iterations;
            row.eps = run.certificate.eps;
        }
        (Some(sol), None) => {
            let profile = sol.representative_profile();
            row.s_bar = profile.average_effort(weights);
            row.eps = game::eps_ne_gap(&spec, &profile)?.eps;
        }
        (None, None) => unreachable!("at least one solver runs"),
    }
    if let Some(sol) = &fixed {
        if sol.kind == SolutionKind::Continuum {
            row.continuum = Some((sol.aggregates[0], sol.aggregates[1]));
        }
        if let (Some(run), SolutionKind::Unique) = (&run, sol.kind) {
            row.discrepancy = Some(run.final_profile.max_abs_diff(&sol.representative_profile()));
        }
    }
    Ok(())
}

/// Solves the game at every `λ` in `lambda_grid` (in parallel, rows returned in grid order).
pub fn sweep_lambda(spec_template: &GameSpec, lambda_grid: &[f64], solver: Solver) -> Result<Vec<SweepRow>> {
    if lambda_grid.is_empty() {
        return Err(Error::Domain("lambda grid is empty".into()));
    }
    if let Some(l) = lambda_grid.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::Domain(format!("grid value {l} is not a finite nonnegative number")));
    }
    if lambda_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("lambda grid must be sorted".into()));
    }
    let report = thresholds::compute_thresholds(spec_template)?;
    Ok(lambda_grid
        .par_iter()
        .map(|&lambda| solve_point(spec_template, &report, lambda, solver))
        .collect())
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Thresholds read off sweep data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalThresholds {
    /// Largest `λ` whose `s̄` is still at the floor.
    pub activation: f64,
    /// Left end of the grid step with the largest increase of `s̄`.
    pub jump: f64,
    /// Smallest `λ` whose `s̄` reached the ceiling.
    pub saturation: f64,
    /// Size of that largest increase.
    pub jump_size: f64,
    /// `false` when `s̄` never increases.
    pub has_jump: bool,
}

/// Locates activation, jump and saturation points from sweep rows.
///
/// The floor and ceiling are the `s̄` values of the first and last rows, so the
/// grid should start below the activation point and end above saturation.
pub fn detect_thresholds_empirically(rows: &[SweepRow], tol: f64) -> Result<EmpiricalThresholds> {
    if rows.len() < 10 {
        return Err(Error::DataQuality(format!(
            "need at least 10 rows, got {}",
            rows.len()
        )));
    }
    if let Some(r) = rows.iter().find(|r| !r.s_bar.is_finite()) {
        return Err(Error::DataQuality(format!("row at lambda = {} has no solution", r.lambda)));
    }
    if rows.windows(2).any(|w| w[1].lambda < w[0].lambda) {
        return Err(Error::DataQuality("rows are not sorted by lambda".into()));
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, w) in rows.windows(2).enumerate() {
        let diff = w[1].s_bar - w[0].s_bar;
        if diff < -tol {
            return Err(Error::DataQuality(format!(
                "s_bar decreases by {} between lambda = {} and {}",
                -diff, w[0].lambda, w[1].lambda
            )));
        }
        if diff > best.1 {
            best = (k, diff);
        }
    }
    let floor = rows[0].s_bar;
    let ceiling = rows[rows.len() - 1].s_bar;
    let activation = rows
        .iter()
        .rev()
        .find(|r| r.s_bar <= floor + tol)
        .map_or(rows[0].lambda, |r| r.lambda);
    let saturation = rows
        .iter()
        .find(|r| r.s_bar >= ceiling - tol)
        .map_or(rows[rows.len() - 1].lambda, |r| r.lambda);
    let has_jump = best.1 > tol;
    Ok(EmpiricalThresholds {
        activation,
        jump: rows[best.0].lambda,
        saturation,
        jump_size: best.1.max(0.0),
        has_jump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym3() -> GameSpec {
        GameSpec::homogeneous(1.0, vec![1.0; 3], vec![1.0; 3], vec![5.0; 3]).unwrap()
    }

    #[test]
    fn symmetric_grid_jumps_at_one_and_a_half() {
        let rows = sweep_lambda(&sym3(), &[0.5, 1.0, 1.4, 1.6, 2.0], Solver::Both).unwrap();
        let s: Vec<f64> = rows.iter().map(|r| r.s_bar).collect();
        for (got, want) in s.iter().zip([1.0, 1.0, 1.0, 5.0, 5.0]) {
            assert!((got - want).abs() < 1e-8, "{s:?}");
        }
        for r in &rows {
            assert!(r.error.is_none());
            assert!(r.discrepancy.unwrap() < 1e-6);
        }
        assert_eq!(rows[0].region, Region::BelowActivation);
        assert_eq!(rows[4].region, Region::Saturated);
    }

    #[test]
    fn jump_point_is_labelled_continuum() {
        let rows = sweep_lambda(&sym3(), &[1.5], Solver::BestResponse).unwrap();
        assert_eq!(rows[0].region, Region::Continuum);
        assert_eq!(rows[0].iterations, 0);
        let (c1, c2) = rows[0].continuum.unwrap();
        assert!((c1 - 1.0).abs() < 1e-9 && (c2 - 5.0).abs() < 1e-9);
        assert!(rows[0].eps <= 1e-8);
    }

    #[test]
    fn grid_below_activation_is_flat() {
        let spec = GameSpec::homogeneous(1.0, vec![1.0, 2.0], vec![1.0, 2.0], vec![10.0; 2]).unwrap();
        let report = thresholds::compute_thresholds(&spec).unwrap();
        let grid = linspace(0.0, 0.99 * report.lambda_1, 12);
        let rows = sweep_lambda(&spec, &grid, Solver::FixedPoint).unwrap();
        for r in rows {
            assert!((r.s_bar - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn detector_on_symmetric_sweep() {
        let grid = linspace(0.5, 2.5, 41);
        let rows = sweep_lambda(&sym3(), &grid, Solver::FixedPoint).unwrap();
        let found = detect_thresholds_empirically(&rows, 1e-8).unwrap();
        let step = 0.05;
        assert!(found.has_jump);
        assert!((found.activation - 1.5).abs() <= step + 1e-12);
        assert!((found.jump - 1.5).abs() <= step + 1e-12);
        assert!((found.saturation - 1.5).abs() <= step + 1e-12);
    }

    #[test]
    fn detector_flags_constant_rows() {
        let rows: Vec<SweepRow> = (0..12)
            .map(|k| SweepRow {
                lambda: k as f64,
                s_bar: 2.0,
                region: Region::BelowActivation,
                iterations: 0,
                eps: 0.0,
                discrepancy: None,
                continuum: None,
                error: None,
            })
            .collect();
        let found = detect_thresholds_empirically(&rows, 1e-8).unwrap();
        assert!(!found.has_jump);
        let mut bad = rows.clone();
        bad[5].s_bar = 1.0;
        assert!(matches!(
            detect_thresholds_empirically(&bad, 1e-8),
            Err(Error::DataQuality(_))
        ));
        assert!(detect_thresholds_empirically(&rows[..5], 1e-8).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(sweep_lambda(&sym3(), &[], Solver::Both).is_err());
        assert!(sweep_lambda(&sym3(), &[1.0, 0.5], Solver::Both).is_err());
        assert!(sweep_lambda(&sym3(), &[-1.0], Solver::Both).is_err());
    }
}
