//! Logit quantal response equilibria with status-quo bias.
//!
//! Each player pays a switching cost `kappa` for any action other than
//! their default and mixes over actions with logit weights
//! `exp(beta * effective_payoff)`. Equilibria are fixed points of the
//! simultaneous logit-response map, found by damped iteration.

mod binary;
mod select;

pub use binary::{
    comparative_statics, find_all_fixed_points, finite_difference_statics, logistic, solve_binary, BinaryCoordParams, BinaryOptions,
    BinaryResult, ScalarLogit, Sensitivities, LOGIT_CUTOFF,
};
pub use select::{select_equilibrium, symmetric_binary_reduction, MultiplicityPolicy, Selection};

use crate::error::{domain, Error, Result};
use crate::game::{Game, MixedProfile};

/// Default sup-norm residual tolerance of the fixed-point solvers.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration budget of the fixed-point solvers.
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Per-player precision, switching cost and status-quo action.
#[derive(Debug, Clone, PartialEq)]
pub struct QreConfig {
    pub beta: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Default action label of each player.
    pub default_action: Vec<String>,
}

impl QreConfig {
    pub fn new(beta: Vec<f64>, kappa: Vec<f64>, default_action: Vec<String>) -> Self {
        Self { beta, kappa, default_action }
    }

    /// Same `beta` and `kappa` for every player; each player's first action
    /// is the default.
    pub fn symmetric(game: &Game, beta: f64, kappa: f64) -> Self {
        let m = game.num_players();
        Self {
            beta: vec![beta; m],
            kappa: vec![kappa; m],
            default_action: (0..m).map(|i| game.actions(i)[0].clone()).collect(),
        }
    }

    pub fn validate(&self, game: &Game) -> Result<()> {
        let m = game.num_players();
        if self.beta.len() != m || self.kappa.len() != m || self.default_action.len() != m {
            return Err(domain(format!("QRE configuration must cover all {m} players")));
        }
        for i in 0..m {
            let (b, k) = (self.beta[i], self.kappa[i]);
            if !b.is_finite() || b < 0.0 {
                return Err(domain(format!("precision of player `{}` must be finite and >= 0, got {b}", game.player_label(i))));
            }
            if !k.is_finite() || k < 0.0 {
                return Err(domain(format!("switching cost of player `{}` must be finite and >= 0, got {k}", game.player_label(i))));
            }
            game.action_index(i, &self.default_action[i])?;
        }
        Ok(())
    }

    /// Default action indices in `game`.
    pub fn default_indices(&self, game: &Game) -> Result<Vec<usize>> {
        self.default_action
            .iter()
            .enumerate()
            .map(|(i, label)| game.action_index(i, label))
            .collect()
    }

    /// Adapts the configuration to a transformed game. A player whose
    /// default action no longer exists is re-anchored at the
    /// lexicographically first remaining action, so the forced move carries
    /// no switching cost.
    pub fn rebased(&self, game: &Game) -> QreConfig {
        let default_action = self
            .default_action
            .iter()
            .enumerate()
            .map(|(i, label)| {
                if game.actions(i).iter().any(|a| a == label) {
                    label.clone()
                } else {
                    game.actions(i).iter().min().cloned().expect("players always keep one action")
                }
            })
            .collect();
        QreConfig { beta: self.beta.clone(), kappa: self.kappa.clone(), default_action }
    }
}

/// Outcome of a fixed-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct QreResult {
    pub profile: MixedProfile,
    /// Sup-norm of `sigma - logit_response(sigma)` at `profile`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// A contraction certificate guarantees this is the only equilibrium.
    pub unique_certified: bool,
}

/// Expected payoff net of the switching cost for leaving the default.
pub fn effective_payoff(
    game: &Game,
    cfg: &QreConfig,
    player: &str,
    action: &str,
    others: &MixedProfile,
) -> Result<f64> {
    cfg.validate(game)?;
    let i = game.player_index(player)?;
    let a = game.action_index(i, action)?;
    let base = game.expected_payoff_at(i, a, others)?;
    Ok(if action == cfg.default_action[i] { base } else { base - cfg.kappa[i] })
}

/// Logit choice probabilities of `player` against `others`.
pub fn logit_response(game: &Game, cfg: &QreConfig, others: &MixedProfile, player: usize) -> Result<Vec<f64>> {
    cfg.validate(game)?;
    others.check_shape(game)?;
    if player >= game.num_players() {
        return Err(domain(format!("player index {player} out of range")));
    }
    let defaults = cfg.default_indices(game)?;
    response(game, cfg, &defaults, others, player)
}

fn response(game: &Game, cfg: &QreConfig, defaults: &[usize], others: &MixedProfile, player: usize) -> Result<Vec<f64>> {
    let mut values = game.action_values(player, others);
    for (a, v) in values.iter_mut().enumerate() {
        if a != defaults[player] {
            *v -= cfg.kappa[player];
        }
    }
    softmax(cfg.beta[player], &values)
}

/// Logit weights `exp(beta * v)` normalized, with max-subtraction.
pub(crate) fn softmax(beta: f64, values: &[f64]) -> Result<Vec<f64>> {
    let scaled: Vec<f64> = values.iter().map(|v| beta * v).collect();
    if let Some(x) = scaled.iter().find(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("non-finite scaled payoff {x}")));
    }
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scaled.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Simultaneous logit response of every player.
fn response_map(game: &Game, cfg: &QreConfig, defaults: &[usize], sigma: &MixedProfile) -> Result<MixedProfile> {
    let probs = (0..game.num_players())
        .map(|i| response(game, cfg, defaults, sigma, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(MixedProfile::from_raw(probs))
}

/// Upper bound on the sup-norm Lipschitz constant of the logit-response map.
///
/// For two-player 2×2 games the bound is exact: `max_i beta_i |D_i| / 4`,
/// where `D_i` is player i's cross difference of payoffs. Otherwise a
/// generic bound `beta_i * R_i * sum_{j != i} |A_j| / 4` is used, with
/// `R_i` the range of player i's payoffs. The map is a contraction, and
/// the equilibrium unique, when the bound is below one.
pub fn contraction_bound(game: &Game, cfg: &QreConfig) -> f64 {
    let m = game.num_players();
    let active: Vec<usize> = (0..m).filter(|&i| game.num_actions(i) > 1).collect();
    if active.is_empty() || active.iter().all(|&i| cfg.beta[i] == 0.0) {
        return 0.0;
    }
    if m == 2 && game.num_actions(0) == 2 && game.num_actions(1) == 2 {
        return (0..2)
            .map(|i| {
                let u = |own: usize, other: usize| {
                    let profile = if i == 0 { [own, other] } else { [other, own] };
                    game.payoff(&profile, i)
                };
                let cross = (u(0, 0) - u(1, 0)) - (u(0, 1) - u(1, 1));
                cfg.beta[i] * cross.abs() / 4.0
            })
            .fold(0.0, f64::max);
    }
    (0..m)
        .filter(|&i| game.num_actions(i) > 1)
        .map(|i| {
            let (lo, hi) = game
                .profiles()
                .map(|p| game.payoff(&p, i))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let spread: usize = active.iter().filter(|&&j| j != i).map(|&j| game.num_actions(j)).sum();
            cfg.beta[i] * (hi - lo) * spread as f64 / 4.0
        })
        .fold(0.0, f64::max)
}

/// Damped simultaneous-update iteration `sigma <- (1-damping) sigma + damping * L(sigma)`.
///
/// `iterations` counts updates; the returned residual is measured at the
/// returned profile. Exhausting `max_iter` is reported through
/// `converged = false`, not as an error.
pub fn solve_qre(
    game: &Game,
    cfg: &QreConfig,
    init: &MixedProfile,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<QreResult> {
    cfg.validate(game)?;
    init.check_shape(game)?;
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(domain(format!("damping must lie in (0, 1], got {damping}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let defaults = cfg.default_indices(game)?;
    let unique_certified = contraction_bound(game, cfg) < 1.0;

    let mut sigma = init.clone();
    let mut iterations = 0;
    loop {
        let image = response_map(game, cfg, &defaults, &sigma)?;
        let residual = sigma.sup_distance(&image);
        if residual <= tol || iterations >= max_iter {
            return Ok(QreResult {
                profile: sigma,
                residual,
                iterations,
                converged: residual <= tol,
                unique_certified,
            });
        }
        for i in 0..game.num_players() {
            let next = sigma
                .probs(i)
                .iter()
                .zip(image.probs(i))
                .map(|(s, l)| (1.0 - damping) * s + damping * l)
                .collect::<Vec<_>>();
            sigma.set(i, normalize(next));
        }
        iterations += 1;
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Sup-norm distance between `profile` and its logit response.
pub fn fixed_point_residual(game: &Game, cfg: &QreConfig, profile: &MixedProfile) -> Result<f64> {
    cfg.validate(game)?;
    profile.check_shape(game)?;
    let defaults = cfg.default_indices(game)?;
    Ok(profile.sup_distance(&response_map(game, cfg, &defaults, profile)?))
}

/// Damping used by default: plain iteration under a contraction
/// certificate, half steps otherwise.
pub fn default_damping(certified: bool) -> f64 {
    if certified {
        1.0
    } else {
        0.5
    }
}

/// Expected effective payoff of every player at a mixed profile: the
/// logit-weighted average of their effective action values.
pub fn realized_payoffs(game: &Game, cfg: &QreConfig, profile: &MixedProfile) -> Result<Vec<f64>> {
    cfg.validate(game)?;
    profile.check_shape(game)?;
    let defaults = cfg.default_indices(game)?;
    Ok((0..game.num_players())
        .map(|i| {
            game.action_values(i, profile)
                .iter()
                .enumerate()
                .map(|(a, v)| {
                    let cost = if a == defaults[i] { 0.0 } else { cfg.kappa[i] };
                    profile.probs(i)[a] * (v - cost)
                })
                .sum()
        })
        .collect())
}
