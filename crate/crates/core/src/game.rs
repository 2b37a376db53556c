//! Game instances, payoffs, the weighted potential and the ε-NE certificate.
//!
//! A game has `m` players (clients) who choose per-round training efforts
//! `s_i^t ≥ 0`. Player `i` is paid `λ (Σ_j ρ_j s_j^t) s_i^t` and pays a
//! quadratic cost `α_i (s_i^t)²` in every round `t`.
//!
//! Two strategy-set shapes are supported:
//!
//! * **homogeneous**: one effort per player, constant across rounds, in a box
//!   `[q_i, Q_i]`. Profiles store a single column and payoffs/potentials are
//!   per-round values (the `T`-round totals are `T` times larger, so the
//!   equilibrium set is the same);
//! * **heterogeneous**: `T` nonnegative efforts per player whose total lies in
//!   `[b_i, B_i]`.
//!
//! The data weights `ρ_i` are general; uniform weights `ρ_i = 1/m` give the
//! equal-data-size game.

use serde::{Deserialize, Serialize};

use crate::best_response;
use crate::error::{Error, Result};

/// Absolute plus relative comparison tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-9,
            rel: 1e-9,
        }
    }
}

impl Tolerance {
    /// Slack allowed around a bound of the given magnitude.
    pub fn slack(&self, magnitude: f64) -> f64 {
        self.abs + self.rel * magnitude.abs()
    }
}

/// Strategy-set family of a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Homogeneous,
    Heterogeneous,
}

/// Per-player effort constraints.
#[derive(Clone, Debug, PartialEq)]
pub enum EffortBounds {
    /// Constant effort per round in `[lower_i, upper_i]`.
    Homogeneous { lower: Vec<f64>, upper: Vec<f64> },
    /// Nonnegative per-round efforts with total in `[min_total_i, max_total_i]`.
    Heterogeneous {
        min_total: Vec<f64>,
        max_total: Vec<f64>,
    },
}

impl EffortBounds {
    pub fn mode(&self) -> Mode {
        match self {
            EffortBounds::Homogeneous { .. } => Mode::Homogeneous,
            EffortBounds::Heterogeneous { .. } => Mode::Heterogeneous,
        }
    }
}

/// Full parameterization of an effort game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameSpecJson", into = "GameSpecJson")]
pub struct GameSpec {
    num_players: usize,
    num_rounds: usize,
    reward_factor: f64,
    cost_coeffs: Vec<f64>,
    data_weights: Vec<f64>,
    bounds: EffortBounds,
}

fn check_len(field: &'static str, v: &[f64], m: usize) -> Result<()> {
    if v.len() != m {
        return Err(Error::InvalidSpec {
            field,
            reason: format!("expected {m} entries, got {}", v.len()),
        });
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidSpec {
            field,
            reason: format!("entry {i} is not finite"),
        });
    }
    Ok(())
}

impl GameSpec {
    /// Builds and validates a game. `data_weights = None` means uniform weights.
    pub fn new(
        num_rounds: usize,
        reward_factor: f64,
        cost_coeffs: Vec<f64>,
        data_weights: Option<Vec<f64>>,
        bounds: EffortBounds,
    ) -> Result<Self> {
        let m = cost_coeffs.len();
        let data_weights = data_weights.unwrap_or_else(|| vec![1.0 / m as f64; m]);
        let spec = GameSpec {
            num_players: m,
            num_rounds,
            reward_factor,
            cost_coeffs,
            data_weights,
            bounds,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Homogeneous game with uniform data weights.
    pub fn homogeneous(
        reward_factor: f64,
        cost_coeffs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        GameSpec::new(
            1,
            reward_factor,
            cost_coeffs,
            None,
            EffortBounds::Homogeneous { lower, upper },
        )
    }

    /// Same game with a different data-weight vector.
    pub fn with_data_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let mut spec = self.clone();
        spec.data_weights = weights;
        spec.validate()?;
        Ok(spec)
    }

    /// Same game with a different reward factor λ.
    pub fn with_reward_factor(&self, reward_factor: f64) -> Result<Self> {
        let mut spec = self.clone();
        spec.reward_factor = reward_factor;
        spec.validate()?;
        Ok(spec)
    }

    /// Same game with a different number of rounds.
    pub fn with_rounds(&self, num_rounds: usize) -> Result<Self> {
        let mut spec = self.clone();
        spec.num_rounds = num_rounds;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.num_players;
        if m == 0 {
            return Err(Error::InvalidSpec {
                field: "m",
                reason: "at least one player is required".into(),
            });
        }
        if self.num_rounds == 0 {
            return Err(Error::InvalidSpec {
                field: "T",
                reason: "at least one round is required".into(),
            });
        }
        if !(self.reward_factor.is_finite() && self.reward_factor >= 0.0) {
            return Err(Error::InvalidSpec {
                field: "lambda",
                reason: format!("must be finite and >= 0, got {}", self.reward_factor),
            });
        }
        check_len("alpha", &self.cost_coeffs, m)?;
        if let Some(i) = self.cost_coeffs.iter().position(|&a| a <= 0.0) {
            return Err(Error::InvalidSpec {
                field: "alpha",
                reason: format!("entry {i} must be > 0"),
            });
        }
        check_len("rho", &self.data_weights, m)?;
        if let Some(i) = self.data_weights.iter().position(|&r| r <= 0.0) {
            return Err(Error::InvalidSpec {
                field: "rho",
                reason: format!("entry {i} must be > 0"),
            });
        }
        let total: f64 = self.data_weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec {
                field: "rho",
                reason: format!("weights must sum to 1, got {total}"),
            });
        }
        match &self.bounds {
            EffortBounds::Homogeneous { lower, upper } => {
                check_len("q", lower, m)?;
                check_len("Q", upper, m)?;
                for i in 0..m {
                    if lower[i] < 0.0 {
                        return Err(Error::InvalidSpec {
                            field: "q",
                            reason: format!("entry {i} must be >= 0"),
                        });
                    }
                    if upper[i] < lower[i] {
                        return Err(Error::InvalidSpec {
                            field: "Q",
                            reason: format!("entry {i} is below q[{i}]"),
                        });
                    }
                }
            }
            EffortBounds::Heterogeneous {
                min_total,
                max_total,
            } => {
                check_len("b", min_total, m)?;
                check_len("B", max_total, m)?;
                for i in 0..m {
                    if min_total[i] < 0.0 {
                        return Err(Error::InvalidSpec {
                            field: "b",
                            reason: format!("entry {i} must be >= 0"),
                        });
                    }
                    if max_total[i] <= 0.0 {
                        return Err(Error::InvalidSpec {
                            field: "B",
                            reason: format!("entry {i} must be > 0"),
                        });
                    }
                    if max_total[i] < min_total[i] {
                        return Err(Error::InvalidSpec {
                            field: "B",
                            reason: format!("entry {i} is below b[{i}]"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_rounds(&self) -> usize {
        self.num_rounds
    }

    pub fn reward_factor(&self) -> f64 {
        self.reward_factor
    }

    pub fn cost_coeffs(&self) -> &[f64] {
        &self.cost_coeffs
    }

    pub fn data_weights(&self) -> &[f64] {
        &self.data_weights
    }

    pub fn bounds(&self) -> &EffortBounds {
        &self.bounds
    }

    pub fn mode(&self) -> Mode {
        self.bounds.mode()
    }

    /// Number of effort columns a profile of this game stores per player.
    pub fn profile_rounds(&self) -> usize {
        match self.mode() {
            Mode::Homogeneous => 1,
            Mode::Heterogeneous => self.num_rounds,
        }
    }

    /// `(q, Q)` of a homogeneous game.
    pub fn box_bounds(&self) -> Result<(&[f64], &[f64])> {
        match &self.bounds {
            EffortBounds::Homogeneous { lower, upper } => Ok((lower, upper)),
            _ => Err(Error::WrongMode {
                op: "box_bounds",
                expected: "homogeneous",
            }),
        }
    }

    /// `(b, B)` of a heterogeneous game.
    pub fn budget_bounds(&self) -> Result<(&[f64], &[f64])> {
        match &self.bounds {
            EffortBounds::Heterogeneous {
                min_total,
                max_total,
            } => Ok((min_total, max_total)),
            _ => Err(Error::WrongMode {
                op: "budget_bounds",
                expected: "heterogeneous",
            }),
        }
    }

    /// `α_i > λ ρ_i`, i.e. player `i`'s payoff is strictly concave in its own effort.
    pub fn is_concave_for(&self, player: usize) -> bool {
        self.cost_coeffs[player] > self.reward_factor * self.data_weights[player]
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.num_players {
            return Err(Error::DimensionMismatch(format!(
                "player index {player} out of range for {} players",
                self.num_players
            )));
        }
        Ok(())
    }

    /// Checks that `profile` lies in the strategy set, with the default tolerance.
    pub fn check_feasible(&self, profile: &StrategyProfile) -> Result<()> {
        self.check_feasible_with(profile, Tolerance::default())
    }

    pub fn check_feasible_with(&self, profile: &StrategyProfile, tol: Tolerance) -> Result<()> {
        if profile.num_players() != self.num_players {
            return Err(Error::DimensionMismatch(format!(
                "profile has {} players, game has {}",
                profile.num_players(),
                self.num_players
            )));
        }
        let rounds = self.profile_rounds();
        for i in 0..self.num_players {
            let col = profile.player(i);
            if col.len() != rounds {
                return Err(Error::DimensionMismatch(format!(
                    "player {i} has {} rounds, expected {rounds}",
                    col.len()
                )));
            }
            if let Some(t) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::Infeasible {
                    player: i,
                    reason: format!("effort in round {t} is not finite"),
                });
            }
            match &self.bounds {
                EffortBounds::Homogeneous { lower, upper } => {
                    let s = col[0];
                    if s < lower[i] - tol.slack(lower[i]) {
                        return Err(Error::Infeasible {
                            player: i,
                            reason: format!("effort {s} below lower bound q = {}", lower[i]),
                        });
                    }
                    if s > upper[i] + tol.slack(upper[i]) {
                        return Err(Error::Infeasible {
                            player: i,
                            reason: format!("effort {s} above upper bound Q = {}", upper[i]),
                        });
                    }
                }
                EffortBounds::Heterogeneous {
                    min_total,
                    max_total,
                } => {
                    if let Some(t) = col.iter().position(|&x| x < -tol.abs) {
                        return Err(Error::Infeasible {
                            player: i,
                            reason: format!("negative effort {} in round {t}", col[t]),
                        });
                    }
                    let total: f64 = col.iter().sum();
                    if total < min_total[i] - tol.slack(min_total[i]) {
                        return Err(Error::Infeasible {
                            player: i,
                            reason: format!(
                                "total effort {total} below budget minimum b = {}",
                                min_total[i]
                            ),
                        });
                    }
                    if total > max_total[i] + tol.slack(max_total[i]) {
                        return Err(Error::Infeasible {
                            player: i,
                            reason: format!(
                                "total effort {total} above budget maximum B = {}",
                                max_total[i]
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Wire form of [`GameSpec`].
#[derive(Serialize, Deserialize)]
struct GameSpecJson {
    m: usize,
    #[serde(rename = "T")]
    t: usize,
    lambda: f64,
    alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<Vec<f64>>,
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<Vec<f64>>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    upper_q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    upper_b: Option<Vec<f64>>,
}

impl TryFrom<GameSpecJson> for GameSpec {
    type Error = Error;

    fn try_from(raw: GameSpecJson) -> Result<Self> {
        let missing = |field: &'static str| Error::InvalidSpec {
            field,
            reason: "missing".into(),
        };
        let bounds = match raw.mode {
            Mode::Homogeneous => EffortBounds::Homogeneous {
                lower: raw.q.ok_or_else(|| missing("q"))?,
                upper: raw.upper_q.ok_or_else(|| missing("Q"))?,
            },
            Mode::Heterogeneous => EffortBounds::Heterogeneous {
                min_total: raw.b.ok_or_else(|| missing("b"))?,
                max_total: raw.upper_b.ok_or_else(|| missing("B"))?,
            },
        };
        if raw.alpha.len() != raw.m {
            return Err(Error::InvalidSpec {
                field: "alpha",
                reason: format!("expected m = {} entries, got {}", raw.m, raw.alpha.len()),
            });
        }
        GameSpec::new(raw.t, raw.lambda, raw.alpha, raw.rho, bounds)
    }
}

impl From<GameSpec> for GameSpecJson {
    fn from(spec: GameSpec) -> Self {
        let mode = spec.bounds.mode();
        let (q, upper_q, b, upper_b) = match spec.bounds {
            EffortBounds::Homogeneous { lower, upper } => (Some(lower), Some(upper), None, None),
            EffortBounds::Heterogeneous {
                min_total,
                max_total,
            } => (None, None, Some(min_total), Some(max_total)),
        };
        GameSpecJson {
            m: spec.num_players,
            t: spec.num_rounds,
            lambda: spec.reward_factor,
            alpha: spec.cost_coeffs,
            rho: Some(spec.data_weights),
            mode,
            q,
            upper_q,
            b,
            upper_b,
        }
    }
}

/// Efforts `s_i^t`, stored per player. Homogeneous profiles hold one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    efforts: Vec<Vec<f64>>,
}

impl StrategyProfile {
    /// One constant effort per player.
    pub fn homogeneous(efforts: Vec<f64>) -> Self {
        StrategyProfile {
            efforts: efforts.into_iter().map(|s| vec![s]).collect(),
        }
    }

    /// `efforts[i][t]` is player `i`'s effort in round `t`.
    pub fn from_players(efforts: Vec<Vec<f64>>) -> Self {
        StrategyProfile { efforts }
    }

    pub fn num_players(&self) -> usize {
        self.efforts.len()
    }

    pub fn num_rounds(&self) -> usize {
        self.efforts.first().map_or(0, Vec::len)
    }

    pub fn player(&self, i: usize) -> &[f64] {
        &self.efforts[i]
    }

    pub fn set_player(&mut self, i: usize, efforts: Vec<f64>) {
        self.efforts[i] = efforts;
    }

    pub fn players(&self) -> &[Vec<f64>] {
        &self.efforts
    }

    /// First-round effort of every player (the whole profile in homogeneous mode).
    pub fn first_round(&self) -> Vec<f64> {
        self.efforts.iter().map(|c| c[0]).collect()
    }

    /// `Σ_j ρ_j s_j^t` for round `t`.
    pub fn round_aggregate(&self, weights: &[f64], t: usize) -> f64 {
        self.efforts
            .iter()
            .zip(weights)
            .map(|(col, r)| r * col[t])
            .sum()
    }

    /// Average effort `s̄ = Σ_i ρ_i (1/T) Σ_t s_i^t`.
    pub fn average_effort(&self, weights: &[f64]) -> f64 {
        self.efforts
            .iter()
            .zip(weights)
            .map(|(col, r)| r * col.iter().sum::<f64>() / col.len() as f64)
            .sum()
    }

    /// `max_{i,t} |a_i^t − b_i^t|`.
    pub fn max_abs_diff(&self, other: &StrategyProfile) -> f64 {
        self.efforts
            .iter()
            .zip(&other.efforts)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Euclidean distance over all entries.
    pub fn l2_diff(&self, other: &StrategyProfile) -> f64 {
        self.efforts
            .iter()
            .zip(&other.efforts)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
            .sum::<f64>()
            .sqrt()
    }

    /// Exchanges rounds `t1` and `t2` for every player.
    pub fn swap_rounds(&mut self, t1: usize, t2: usize) {
        for col in &mut self.efforts {
            col.swap(t1, t2);
        }
    }
}

/// Per-player unilateral-improvement gaps of a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsNeCertificate {
    pub per_player_gap: Vec<f64>,
    pub eps: f64,
}

impl EpsNeCertificate {
    /// Whether the profile is an ε-NE for the given ε.
    pub fn certifies(&self, eps: f64) -> bool {
        self.eps <= eps
    }
}

pub(crate) fn payoff_unchecked(spec: &GameSpec, profile: &StrategyProfile, player: usize) -> f64 {
    let alpha = spec.cost_coeffs[player];
    let lambda = spec.reward_factor;
    let own = profile.player(player);
    (0..own.len())
        .map(|t| {
            let price = lambda * profile.round_aggregate(&spec.data_weights, t);
            price * own[t] - alpha * own[t] * own[t]
        })
        .sum()
}

/// Payoff of `player`: `Σ_t [λ (Σ_j ρ_j s_j^t) s_i^t − α_i (s_i^t)²]`.
pub fn payoff(spec: &GameSpec, profile: &StrategyProfile, player: usize) -> Result<f64> {
    spec.check_player(player)?;
    spec.check_feasible(profile)?;
    Ok(payoff_unchecked(spec, profile, player))
}

pub(crate) fn potential_unchecked(spec: &GameSpec, profile: &StrategyProfile) -> f64 {
    let lambda = spec.reward_factor;
    let own: f64 = (0..spec.num_players)
        .map(|i| {
            let r = spec.data_weights[i];
            let coeff = 0.5 * lambda * r * r - spec.cost_coeffs[i] * r;
            coeff * profile.player(i).iter().map(|s| s * s).sum::<f64>()
        })
        .sum();
    let aggregate: f64 = (0..profile.num_rounds())
        .map(|t| {
            let a = profile.round_aggregate(&spec.data_weights, t);
            0.5 * lambda * a * a
        })
        .sum();
    own + aggregate
}

/// Weighted potential with weights `w_i = 1/ρ_i`:
/// `Σ_i Σ_t (λρ_i²/2 − α_iρ_i)(s_i^t)² + Σ_t (λ/2)(Σ_i ρ_i s_i^t)²`.
pub fn potential(spec: &GameSpec, profile: &StrategyProfile) -> Result<f64> {
    spec.check_feasible(profile)?;
    Ok(potential_unchecked(spec, profile))
}

/// How far each player is from best-responding.
///
/// `gap_i = max_x P_i(x, s_{-i}) − P_i(s_i, s_{-i})`, using the exact best
/// response. Round-off negatives are clamped to zero.
pub fn eps_ne_gap(spec: &GameSpec, profile: &StrategyProfile) -> Result<EpsNeCertificate> {
    spec.check_feasible(profile)?;
    eps_ne_gap_unchecked(spec, profile)
}

pub(crate) fn eps_ne_gap_unchecked(
    spec: &GameSpec,
    profile: &StrategyProfile,
) -> Result<EpsNeCertificate> {
    let mut scratch = profile.clone();
    let mut per_player_gap = Vec::with_capacity(spec.num_players);
    for i in 0..spec.num_players {
        let current = payoff_unchecked(spec, profile, i);
        let best = best_response::best_response_unchecked(spec, profile, i)?;
        scratch.set_player(i, best);
        let improved = payoff_unchecked(spec, &scratch, i);
        scratch.set_player(i, profile.player(i).to_vec());
        let gap = improved - current;
        if !gap.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite payoff gap for player {i}"
            )));
        }
        let slack = 1e-10 * (1.0 + current.abs().max(improved.abs()));
        if gap < -slack {
            return Err(Error::Numerical(format!(
                "best response for player {i} is worse than the current effort by {}",
                -gap
            )));
        }
        per_player_gap.push(gap.max(0.0));
    }
    let eps = per_player_gap.iter().copied().fold(0.0, f64::max);
    Ok(EpsNeCertificate {
        per_player_gap,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_player() -> GameSpec {
        GameSpec::homogeneous(1.0, vec![1.0, 1.0], vec![0.0, 0.0], vec![10.0, 10.0]).unwrap()
    }

    #[test]
    fn payoff_two_player_example() {
        let spec = two_player();
        let s = StrategyProfile::homogeneous(vec![2.0, 2.0]);
        assert_eq!(payoff(&spec, &s, 0).unwrap(), 0.0);
    }

    #[test]
    fn payoff_without_reward_is_pure_cost() {
        let spec = GameSpec::new(
            3,
            0.0,
            vec![1.5, 2.0],
            None,
            EffortBounds::Heterogeneous {
                min_total: vec![0.0, 0.0],
                max_total: vec![10.0, 10.0],
            },
        )
        .unwrap();
        let s = StrategyProfile::from_players(vec![vec![1.0, 2.0, 0.5], vec![3.0, 0.0, 1.0]]);
        let expected = -1.5 * (1.0 + 4.0 + 0.25);
        assert!((payoff(&spec, &s, 0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_effort_player_gets_zero() {
        let spec = two_player();
        let s = StrategyProfile::homogeneous(vec![0.0, 7.0]);
        assert_eq!(payoff(&spec, &s, 0).unwrap(), 0.0);
    }

    #[test]
    fn potential_examples() {
        let spec = two_player();
        let s = StrategyProfile::homogeneous(vec![2.0, 2.0]);
        assert!((potential(&spec, &s).unwrap() + 1.0).abs() < 1e-12);
        let zero = StrategyProfile::homogeneous(vec![0.0, 0.0]);
        assert_eq!(potential(&spec, &zero).unwrap(), 0.0);

        let no_reward = spec.with_reward_factor(0.0).unwrap();
        let s = StrategyProfile::homogeneous(vec![3.0, 1.0]);
        let expected = -(0.5 * 9.0 + 0.5 * 1.0);
        assert!((potential(&no_reward, &s).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn infeasible_profile_names_bound() {
        let spec = two_player();
        let s = StrategyProfile::homogeneous(vec![11.0, 2.0]);
        let err = payoff(&spec, &s, 1).unwrap_err();
        assert!(matches!(err, Error::Infeasible { player: 0, .. }));
        assert!(err.to_string().contains("upper bound"));
    }

    #[test]
    fn certificate_single_player_at_clamped_argmax() {
        // One player: payoff λ s² − α s² with λ < α is maximised at q.
        let spec = GameSpec::homogeneous(0.5, vec![1.0], vec![2.0], vec![4.0]).unwrap();
        let s = StrategyProfile::homogeneous(vec![2.0]);
        let cert = eps_ne_gap(&spec, &s).unwrap();
        assert_eq!(cert.eps, 0.0);
    }

    #[test]
    fn certificate_symmetric_lower_equilibrium() {
        let spec = GameSpec::homogeneous(1.0, vec![1.0; 3], vec![1.0; 3], vec![5.0; 3]).unwrap();
        let s = StrategyProfile::homogeneous(vec![1.0; 3]);
        let cert = eps_ne_gap(&spec, &s).unwrap();
        assert!(cert.eps <= 1e-10);
        let off = StrategyProfile::homogeneous(vec![3.0, 1.0, 1.0]);
        assert!(eps_ne_gap(&spec, &off).unwrap().eps > 1e-3);
    }

    #[test]
    fn spec_validation() {
        assert!(GameSpec::homogeneous(1.0, vec![0.0], vec![0.0], vec![1.0]).is_err());
        assert!(GameSpec::homogeneous(-1.0, vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(GameSpec::homogeneous(1.0, vec![1.0], vec![2.0], vec![1.0]).is_err());
        let bad_rho = GameSpec::new(
            1,
            1.0,
            vec![1.0, 1.0],
            Some(vec![0.5, 0.6]),
            EffortBounds::Homogeneous {
                lower: vec![0.0; 2],
                upper: vec![1.0; 2],
            },
        );
        assert!(matches!(
            bad_rho,
            Err(Error::InvalidSpec { field: "rho", .. })
        ));
        let empty_budget = GameSpec::new(
            2,
            1.0,
            vec![1.0],
            None,
            EffortBounds::Heterogeneous {
                min_total: vec![0.0],
                max_total: vec![0.0],
            },
        );
        assert!(matches!(
            empty_budget,
            Err(Error::InvalidSpec { field: "B", .. })
        ));
    }

    #[test]
    fn json_defaults_to_uniform_weights() {
        let text = r#"{"m":2,"T":5,"lambda":1.5,"alpha":[1,2],"mode":"homogeneous","q":[1,1],"Q":[10,10]}"#;
        let spec: GameSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.data_weights(), &[0.5, 0.5]);
        assert_eq!(spec.num_rounds(), 5);
        let back = serde_json::to_string(&spec).unwrap();
        let again: GameSpec = serde_json::from_str(&back).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn json_rejects_missing_bounds() {
        let text = r#"{"m":1,"T":1,"lambda":1,"alpha":[1],"mode":"heterogeneous","q":[1],"Q":[2]}"#;
        let err = serde_json::from_str::<GameSpec>(text).unwrap_err();
        assert!(err.to_string().contains("`b`"));
    }
}
