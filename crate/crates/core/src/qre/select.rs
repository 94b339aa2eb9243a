//! Within-game equilibrium selection: one outcome per game.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{Game, MixedProfile};

use super::binary::{solve_scalar, BinaryOptions, ScalarLogit};
use super::{contraction_bound, default_damping, fixed_point_residual, solve_qre, QreConfig, QreResult, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Which root to report when several equilibria exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplicityPolicy {
    /// Smallest status-quo probability.
    #[default]
    Lowest,
    /// Largest status-quo probability.
    Highest,
    /// Closest to the starting point.
    NearestToInit,
}

impl MultiplicityPolicy {
    pub fn pick(&self, sorted_roots: &[f64], init: f64) -> Option<f64> {
        match self {
            Self::Lowest => sorted_roots.first().copied(),
            Self::Highest => sorted_roots.last().copied(),
            Self::NearestToInit => sorted_roots
                .iter()
                .copied()
                .min_by(|a, b| (a - init).abs().total_cmp(&(b - init).abs())),
        }
    }
}

/// Selection rule configuration: solver settings plus the multiplicity
/// policy applied when uniqueness is not certified.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub qre: QreConfig,
    pub policy: MultiplicityPolicy,
    pub tol: f64,
    pub max_iter: usize,
    pub grid_size: usize,
}

impl Selection {
    pub fn new(qre: QreConfig) -> Self {
        Self { qre, policy: MultiplicityPolicy::Lowest, tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, grid_size: 10_001 }
    }
}

/// If `game` is a symmetric two-player 2×2 game played under a symmetric
/// configuration, returns the scalar problem for the probability of the
/// shared default action, together with that action's index.
pub fn symmetric_binary_reduction(game: &Game, cfg: &QreConfig) -> Option<(ScalarLogit, usize)> {
    if game.num_players() != 2 || game.num_actions(0) != 2 || game.num_actions(1) != 2 {
        return None;
    }
    if game.actions(0) != game.actions(1)
        || cfg.beta[0] != cfg.beta[1]
        || cfg.kappa[0] != cfg.kappa[1]
        || cfg.default_action[0] != cfg.default_action[1]
    {
        return None;
    }
    for r in 0..2 {
        for c in 0..2 {
            if game.payoff(&[r, c], 0) != game.payoff(&[c, r], 1) {
                return None;
            }
        }
    }
    let sq = game.action_index(0, &cfg.default_action[0]).ok()?;
    let alt = 1 - sq;
    let u = |own: usize, other: usize| game.payoff(&[own, other], 0);
    // delta(p) = U_alt(p) - kappa - U_sq(p), with p the status-quo share
    let intercept = u(alt, alt) - cfg.kappa[0] - u(sq, alt);
    let slope = (u(alt, sq) - u(alt, alt)) - (u(sq, sq) - u(sq, alt));
    Some((ScalarLogit { beta: cfg.beta[0], intercept, slope }, sq))
}

/// Selects one logit QRE of `game`.
///
/// Under a contraction certificate the unique equilibrium is found by plain
/// iteration from the uniform profile. Otherwise symmetric 2×2 games are
/// reduced to their scalar equation, every symmetric root is enumerated and
/// `selection.policy` picks one (the starting point for
/// [`MultiplicityPolicy::NearestToInit`] is 1/2); other games fall back to
/// half-damped iteration from the uniform profile. The result always
/// carries `unique_certified`.
pub fn select_equilibrium(game: &Game, selection: &Selection) -> Result<QreResult> {
    let cfg = &selection.qre;
    cfg.validate(game)?;
    let certified = contraction_bound(game, cfg) < 1.0;
    let uniform = MixedProfile::uniform(game);
    if certified {
        return solve_qre(game, cfg, &uniform, default_damping(true), selection.tol, selection.max_iter);
    }
    if let Some((problem, sq)) = symmetric_binary_reduction(game, cfg) {
        let opts = BinaryOptions {
            tol: selection.tol,
            max_iter: selection.max_iter,
            grid_size: selection.grid_size,
            policy: selection.policy,
        };
        let res = solve_scalar(&problem, 0.5, &opts)?;
        let mut v = vec![0.0; 2];
        v[sq] = res.p;
        v[1 - sq] = 1.0 - res.p;
        let profile = MixedProfile::from_raw(vec![v.clone(), v]);
        let residual = fixed_point_residual(game, cfg, &profile)?;
        return Ok(QreResult {
            profile,
            residual,
            iterations: res.iterations,
            converged: residual <= selection.tol,
            unique_certified: false,
        });
    }
    solve_qre(game, cfg, &uniform, default_damping(false), selection.tol, selection.max_iter)
}
