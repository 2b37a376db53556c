//! Equilibrium enumeration for the homogeneous game through the aggregate map.
//!
//! At an equilibrium every player's effort is a function of the weighted
//! aggregate `x = Σ_j ρ_j s_j` only:
//!
//! ```text
//! β_i(x) = q_i            if α_i > λρ_i and k_i x <= q_i
//!        = k_i x          if q_i < k_i x < Q_i
//!        = Q_i            if k_i x >= Q_i or α_i <= λρ_i
//! ```
//!
//! with `k_i = λ / (2α_i − λρ_i)`. Equilibrium aggregates are exactly the
//! fixed points of `φ(x) = Σ_i ρ_i β_i(x)`. Since `φ` is piecewise affine,
//! every fixed point (including a whole segment of them) can be found in
//! closed form, segment by segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameSpec, Mode, StrategyProfile};
use crate::thresholds;

const DEDUP_TOL: f64 = 1e-12;
/// Slope/intercept tolerance for recognising a segment of fixed points.
const CONTINUUM_TOL: f64 = 1e-9;

/// Which branch of `β_i` is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Lower-clamped (`I₁`).
    Lower,
    /// Interior (`I₂`).
    Interior,
    /// Upper-clamped with a concave payoff (`I₃`).
    Upper,
    /// Non-concave payoff, always at the upper bound (`I₄`).
    NonConcave,
}

/// Partition of the players by active branch at a given aggregate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSets {
    pub lower: Vec<usize>,
    pub interior: Vec<usize>,
    pub upper: Vec<usize>,
    pub nonconcave: Vec<usize>,
}

/// One affine piece `φ(x) = slope·x + intercept` on `[start, end]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    /// `f64::INFINITY` for the last segment.
    pub end: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// The piecewise-affine aggregate map `φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateMap {
    pub breakpoints: Vec<f64>,
    pub segments: Vec<Segment>,
}

impl AggregateMap {
    pub fn eval(&self, x: f64) -> f64 {
        let seg = self
            .segments
            .iter()
            .find(|s| x <= s.end)
            .unwrap_or_else(|| self.segments.last().expect("at least one segment"));
        seg.slope * x + seg.intercept
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Unique,
    /// A closed interval of equilibrium aggregates `[c₁, c₂]`.
    Continuum,
}

/// Every Nash equilibrium of a homogeneous game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeSolutionSet {
    pub kind: SolutionKind,
    /// The unique aggregate, or the two interval endpoints `[c₁, c₂]`.
    pub aggregates: Vec<f64>,
    /// `β(x)` for each entry of `aggregates` (for a continuum: `c₁`, midpoint, `c₂`).
    pub profiles: Vec<Vec<f64>>,
}

impl NeSolutionSet {
    /// Aggregate used when one representative is needed: the unique value or the interval midpoint.
    pub fn representative_aggregate(&self) -> f64 {
        match self.kind {
            SolutionKind::Unique => self.aggregates[0],
            SolutionKind::Continuum => 0.5 * (self.aggregates[0] + self.aggregates[1]),
        }
    }

    /// Profile matching [`representative_aggregate`](Self::representative_aggregate).
    pub fn representative_profile(&self) -> StrategyProfile {
        let idx = match self.kind {
            SolutionKind::Unique => 0,
            SolutionKind::Continuum => 1,
        };
        StrategyProfile::homogeneous(self.profiles[idx].clone())
    }
}

struct Player {
    q: f64,
    upper: f64,
    rho: f64,
    /// `None` when the payoff is not concave.
    slope: Option<f64>,
}

fn players(spec: &GameSpec) -> Result<Vec<Player>> {
    let (q, upper) = spec.box_bounds()?;
    let lambda = spec.reward_factor();
    Ok((0..spec.num_players())
        .map(|i| {
            let alpha = spec.cost_coeffs()[i];
            let rho = spec.data_weights()[i];
            let slope = (alpha > lambda * rho).then(|| lambda / (2.0 * alpha - lambda * rho));
            Player {
                q: q[i],
                upper: upper[i],
                rho,
                slope,
            }
        })
        .collect())
}

fn branch_of(p: &Player, x: f64) -> Branch {
    match p.slope {
        None => Branch::NonConcave,
        Some(k) => {
            let v = k * x;
            if p.q >= v {
                Branch::Lower
            } else if v < p.upper {
                Branch::Interior
            } else {
                Branch::Upper
            }
        }
    }
}

fn beta_of(p: &Player, x: f64) -> f64 {
    match branch_of(p, x) {
        Branch::Lower => p.q,
        Branch::Interior => p.slope.unwrap_or(0.0) * x,
        Branch::Upper | Branch::NonConcave => p.upper,
    }
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

fn check_aggregate(x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("aggregate must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// `β_i(x)`: player `i`'s equilibrium effort when the weighted aggregate is `x`.
pub fn beta(spec: &GameSpec, player: usize, x: f64) -> Result<f64> {
    homogeneous_only(spec, "beta")?;
    spec.check_player(player)?;
    check_aggregate(x)?;
    Ok(beta_of(&players(spec)?[player], x))
}

/// `β(x)` for every player.
pub fn beta_profile(spec: &GameSpec, x: f64) -> Result<Vec<f64>> {
    homogeneous_only(spec, "beta_profile")?;
    check_aggregate(x)?;
    Ok(players(spec)?.iter().map(|p| beta_of(p, x)).collect())
}

/// The branch partition `I₁(x) … I₄(x)`.
pub fn index_sets(spec: &GameSpec, x: f64) -> Result<IndexSets> {
    homogeneous_only(spec, "index_sets")?;
    check_aggregate(x)?;
    let mut sets = IndexSets::default();
    for (i, p) in players(spec)?.iter().enumerate() {
        match branch_of(p, x) {
            Branch::Lower => sets.lower.push(i),
            Branch::Interior => sets.interior.push(i),
            Branch::Upper => sets.upper.push(i),
            Branch::NonConcave => sets.nonconcave.push(i),
        }
    }
    Ok(sets)
}

/// Builds `φ` exactly: breakpoints where a concave player's `k_i x` crosses
/// `q_i` or `Q_i`, and the affine coefficients between them.
pub fn aggregate_map(spec: &GameSpec) -> Result<AggregateMap> {
    homogeneous_only(spec, "aggregate_map")?;
    let ps = players(spec)?;
    let mut breakpoints: Vec<f64> = ps
        .iter()
        .filter_map(|p| p.slope.filter(|&k| k > 0.0).map(|k| [p.q / k, p.upper / k]))
        .flatten()
        .filter(|b| *b > 0.0)
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let mut edges = vec![0.0];
    edges.extend(breakpoints.iter().copied());
    let mut segments = Vec::with_capacity(edges.len());
    for (idx, &start) in edges.iter().enumerate() {
        let end = edges.get(idx + 1).copied().unwrap_or(f64::INFINITY);
        let probe = if end.is_finite() {
            0.5 * (start + end)
        } else {
            start + 1.0
        };
        let (mut slope, mut intercept) = (0.0, 0.0);
        for p in &ps {
            match branch_of(p, probe) {
                Branch::Lower => intercept += p.rho * p.q,
                Branch::Interior => slope += p.rho * p.slope.unwrap_or(0.0),
                Branch::Upper | Branch::NonConcave => intercept += p.rho * p.upper,
            }
        }
        segments.push(Segment {
            start,
            end,
            slope,
            intercept,
        });
    }
    Ok(AggregateMap {
        breakpoints,
        segments,
    })
}

/// Fixed points of `φ` on each segment: isolated points, or whole segments of slope 1.
enum SegmentSolution {
    Point(f64),
    Interval(f64, f64),
}

fn solve_segments(map: &AggregateMap) -> Vec<SegmentSolution> {
    let mut out = Vec::new();
    for seg in &map.segments {
        let scale = 1.0 + seg.start.abs() + if seg.end.is_finite() { seg.end.abs() } else { 0.0 };
        if (seg.slope - 1.0).abs() <= CONTINUUM_TOL {
            if seg.intercept.abs() <= CONTINUUM_TOL * scale && seg.end.is_finite() {
                out.push(SegmentSolution::Interval(seg.start, seg.end));
            }
            continue;
        }
        let x = seg.intercept / (1.0 - seg.slope);
        let slack = DEDUP_TOL * scale;
        if x >= seg.start - slack && x <= seg.end + slack {
            out.push(SegmentSolution::Point(x.clamp(seg.start, seg.end)));
        }
    }
    out
}

/// Enumerates every equilibrium aggregate and reconstructs `s*_i = β_i(s̄*)`.
pub fn solve_all_equilibria(spec: &GameSpec) -> Result<NeSolutionSet> {
    homogeneous_only(spec, "solve_all_equilibria")?;
    let map = aggregate_map(spec)?;
    let solutions = solve_segments(&map);
    let ps = players(spec)?;
    let profile_at = |x: f64| ps.iter().map(|p| beta_of(p, x)).collect::<Vec<f64>>();

    let intervals: Vec<(f64, f64)> = solutions
        .iter()
        .filter_map(|s| match s {
            SegmentSolution::Interval(a, b) => Some((*a, *b)),
            _ => None,
        })
        .collect();
    if !intervals.is_empty() {
        let lo = intervals.iter().map(|i| i.0).fold(f64::INFINITY, f64::min);
        let hi = intervals.iter().map(|i| i.1).fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (lo + hi);
        return Ok(NeSolutionSet {
            kind: SolutionKind::Continuum,
            aggregates: vec![lo, hi],
            profiles: vec![profile_at(lo), profile_at(mid), profile_at(hi)],
        });
    }

    let mut points: Vec<f64> = solutions
        .iter()
        .filter_map(|s| match s {
            SegmentSolution::Point(x) => Some(*x),
            _ => None,
        })
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL * (1.0 + b.abs()));

    match points.len() {
        0 => Err(Error::Numerical(
            "no fixed point of the aggregate map was found".into(),
        )),
        1 => Ok(NeSolutionSet {
            kind: SolutionKind::Unique,
            aggregates: points.clone(),
            profiles: vec![profile_at(points[0])],
        }),
        _ => {
            // Distinct isolated fixed points only arise from round-off at λ ≈ λ*.
            let lambda_star = thresholds::lambda_star(spec);
            Err(Error::Numerical(format!(
                "{} isolated fixed points {:?} at lambda = {} (lambda* = {lambda_star})",
                points.len(),
                points,
                spec.reward_factor()
            )))
        }
    }
}

/// Profile `s_i = λ c / (2α_i − λρ_i)` of the equilibrium family at the jump
/// point, clamped into the box.
///
/// For `c ∈ [c₁, c₂]` at `λ = λ*` no clamping happens and the profile is an
/// equilibrium; outside that interval the clamped profile is not.
pub fn continuum_profile(spec: &GameSpec, c: f64) -> Result<StrategyProfile> {
    homogeneous_only(spec, "continuum_profile")?;
    let ps = players(spec)?;
    let efforts = ps
        .iter()
        .map(|p| match p.slope {
            Some(k) => (k * c).clamp(p.q, p.upper),
            None => p.upper,
        })
        .collect();
    Ok(StrategyProfile::homogeneous(efforts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::EffortBounds;

    fn sym3(lambda: f64) -> GameSpec {
        GameSpec::homogeneous(lambda, vec![1.0; 3], vec![1.0; 3], vec![5.0; 3]).unwrap()
    }

    #[test]
    fn beta_branches() {
        let spec = sym3(1.0);
        assert!((beta(&spec, 0, 2.0).unwrap() - 1.2).abs() < 1e-15);
        assert_eq!(beta(&spec, 0, 0.5).unwrap(), 1.0);
        assert_eq!(beta(&spec, 0, 100.0).unwrap(), 5.0);
        let nonconcave = GameSpec::homogeneous(3.0, vec![1.0, 2.0], vec![1.0; 2], vec![10.0; 2]).unwrap();
        for x in [0.0, 1.0, 50.0] {
            assert_eq!(beta(&nonconcave, 0, x).unwrap(), 10.0);
        }
        assert!(beta(&spec, 0, -1.0).is_err());
    }

    #[test]
    fn index_set_examples() {
        let spec = sym3(0.1);
        assert_eq!(index_sets(&spec, 0.5).unwrap().lower, vec![0, 1, 2]);
        let spec = GameSpec::homogeneous(3.0, vec![1.0, 2.0], vec![1.0; 2], vec![10.0; 2]).unwrap();
        let sets = index_sets(&spec, 1.0).unwrap();
        assert_eq!(sets.nonconcave, vec![0]);
        assert!(!sets.nonconcave.contains(&1));
    }

    #[test]
    fn symmetric_unique_lower() {
        let sol = solve_all_equilibria(&sym3(1.0)).unwrap();
        assert_eq!(sol.kind, SolutionKind::Unique);
        assert!((sol.aggregates[0] - 1.0).abs() < 1e-12);
        assert_eq!(sol.profiles[0], vec![1.0; 3]);
    }

    #[test]
    fn saturated_unique_upper() {
        let sol = solve_all_equilibria(&sym3(2.0)).unwrap();
        assert_eq!(sol.kind, SolutionKind::Unique);
        assert_eq!(sol.profiles[0], vec![5.0; 3]);
    }

    #[test]
    fn continuum_at_jump_point() {
        let base = GameSpec::homogeneous(1.0, vec![1.0, 2.0], vec![1.0; 2], vec![10.0; 2]).unwrap();
        let lambda_star = thresholds::lambda_star(&base);
        let spec = base.with_reward_factor(lambda_star).unwrap();
        let sol = solve_all_equilibria(&spec).unwrap();
        assert_eq!(sol.kind, SolutionKind::Continuum);
        assert!((sol.aggregates[0] - 1.86603).abs() < 1e-5);
        assert!((sol.aggregates[1] - 6.83013).abs() < 1e-5);
        let c = sol.aggregates[0];
        let p = &sol.profiles[0];
        assert!((p[0] / c - 1.46410).abs() < 1e-5);
        assert!((p[1] / c - 0.53590).abs() < 1e-5);
        // Coefficients average (with ρ = 1/2) to one.
        assert!((0.5 * (p[0] + p[1]) / c - 1.0).abs() < 1e-10);
    }

    #[test]
    fn map_is_monotone_and_bounded() {
        let spec = GameSpec::new(
            1,
            1.7,
            vec![1.0, 0.6, 2.0, 3.0],
            Some(vec![0.4, 0.1, 0.3, 0.2]),
            EffortBounds::Homogeneous {
                lower: vec![0.5, 0.0, 2.0, 1.0],
                upper: vec![3.0, 8.0, 4.0, 9.0],
            },
        )
        .unwrap();
        let map = aggregate_map(&spec).unwrap();
        let (q, upper) = spec.box_bounds().unwrap();
        let rho = spec.data_weights();
        let q_bar: f64 = (0..4).map(|i| rho[i] * q[i]).sum();
        let upper_bar: f64 = (0..4).map(|i| rho[i] * upper[i]).sum();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..4000 {
            let x = k as f64 * 0.01;
            let direct: f64 = beta_profile(&spec, x)
                .unwrap()
                .iter()
                .zip(rho)
                .map(|(b, r)| b * r)
                .sum();
            let v = map.eval(x);
            assert!((v - direct).abs() < 1e-12);
            assert!(v >= prev - 1e-15);
            assert!(v >= q_bar - 1e-12 && v <= upper_bar + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn zero_lower_bounds_admit_zero_profile() {
        let spec = GameSpec::homogeneous(0.5, vec![1.0, 2.0], vec![0.0; 2], vec![3.0; 2]).unwrap();
        let sol = solve_all_equilibria(&spec).unwrap();
        assert_eq!(sol.kind, SolutionKind::Unique);
        assert_eq!(sol.aggregates, vec![0.0]);
    }

    #[test]
    fn heterogeneous_rejected() {
        let spec = GameSpec::new(
            2,
            1.0,
            vec![1.0],
            None,
            EffortBounds::Heterogeneous {
                min_total: vec![0.0],
                max_total: vec![1.0],
            },
        )
        .unwrap();
        assert!(solve_all_equilibria(&spec).is_err());
    }
}
