//! Meta-games over game transformations.
//!
//! Players choose meta-actions (votes, proposals); a rule maps each
//! meta-profile to a sequence of transformations of the base game; the
//! transformed game is solved by the selection rule and each player's
//! meta-payoff is their realized payoff there minus an implementation cost.
//! Hyper-meta-payoffs add weighted payoffs of the other players.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::game::Game;
use crate::qre::{realized_payoffs, select_equilibrium, QreResult, Selection};
use crate::transform::{apply_sequence, Transformation};

pub const APPROVE: &str = "Approve";
pub const REJECT: &str = "Reject";

/// Default limit on the number of meta-profiles enumerated.
pub const DEFAULT_MAX_PROFILES: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Unanimity,
    AtLeast(usize),
}

/// Maps meta-profiles to transformation sequences.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// Players vote Approve/Reject; the reform is applied when enough
    /// players approve, otherwise the base game is kept.
    Vote { reform: Vec<Transformation>, threshold: Threshold },
    /// Explicit image for every meta-profile, in profile-index order.
    Table(Vec<Vec<Transformation>>),
}

/// Reform applied iff every player approves.
pub fn unanimity_rule(reform: Vec<Transformation>) -> Rule {
    Rule::Vote { reform, threshold: Threshold::Unanimity }
}

/// Reform applied iff at least `threshold` players approve.
pub fn majority_rule(reform: Vec<Transformation>, threshold: usize) -> Rule {
    Rule::Vote { reform, threshold: Threshold::AtLeast(threshold) }
}

/// Implementation costs `C_i(y)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Costs {
    Zero,
    /// Cost per player, charged whenever the rule changes the game.
    Implementation(Vec<f64>),
    /// Cost per player and own meta-action.
    PerAction(Vec<Vec<f64>>),
    /// Cost vector for every meta-profile, in profile-index order.
    Table(Vec<Vec<f64>>),
}

/// A meta-profile: one meta-action index per player plus an environment move.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaProfile {
    pub actions: Vec<usize>,
    pub env: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaGame {
    base_game: Game,
    meta_actions: Vec<Vec<String>>,
    env_moves: Vec<String>,
    env_payoff: Option<Vec<f64>>,
    rule: Rule,
    costs: Costs,
    selection: Selection,
    weights: Vec<Vec<f64>>,
    max_profiles: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaOutcome {
    pub profile: MetaProfile,
    pub transformed_game: Game,
    pub inner_result: QreResult,
    /// Realized payoff of each player at the selected inner equilibrium.
    pub realized: Vec<f64>,
    pub costs: Vec<f64>,
    /// Meta-payoffs `realized - costs`.
    pub v: Vec<f64>,
    /// Hyper-meta-payoffs `v_i + sum_j w_ij v_j`.
    pub h: Vec<f64>,
    pub gamma_unique: bool,
}

/// Every outcome of a meta-game plus its pure equilibria (as indices into
/// `outcomes`).
#[derive(Debug, Clone, PartialEq)]
pub struct MetaAnalysis {
    pub outcomes: Vec<MetaOutcome>,
    pub meta_nash: Vec<usize>,
    pub hyper_meta_nash: Vec<usize>,
}

impl MetaAnalysis {
    /// False when some inner outcome came from an uncertified selection.
    pub fn all_gamma_unique(&self) -> bool {
        self.outcomes.iter().all(|o| o.gamma_unique)
    }

    pub fn meta_nash_profiles(&self) -> Vec<MetaProfile> {
        self.meta_nash.iter().map(|&k| self.outcomes[k].profile.clone()).collect()
    }

    pub fn hyper_meta_nash_profiles(&self) -> Vec<MetaProfile> {
        self.hyper_meta_nash.iter().map(|&k| self.outcomes[k].profile.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Payoff {
    Selfish,
    Hyper,
}

impl MetaGame {
    pub fn new(base_game: Game, meta_actions: Vec<Vec<String>>, rule: Rule, selection: Selection) -> Result<Self> {
        Self::with_environment_moves(base_game, meta_actions, vec!["none".into()], None, rule, selection)
    }

    /// Meta-game with explicit environment moves; the environment is
    /// strategic when `env_payoff` (one value per meta-profile) is given.
    pub fn with_environment_moves(
        base_game: Game,
        meta_actions: Vec<Vec<String>>,
        env_moves: Vec<String>,
        env_payoff: Option<Vec<f64>>,
        rule: Rule,
        selection: Selection,
    ) -> Result<Self> {
        let m = base_game.num_players();
        let mg = Self {
            base_game,
            meta_actions,
            env_moves,
            env_payoff,
            rule,
            costs: Costs::Zero,
            selection,
            weights: vec![vec![0.0; m]; m],
            max_profiles: DEFAULT_MAX_PROFILES,
        };
        mg.validate()?;
        Ok(mg)
    }

    /// Approve/Reject meta-game for a voting rule.
    pub fn vote(base_game: Game, rule: Rule, selection: Selection) -> Result<Self> {
        let m = base_game.num_players();
        let actions = vec![vec![APPROVE.to_string(), REJECT.to_string()]; m];
        Self::new(base_game, actions, rule, selection)
    }

    pub fn with_costs(mut self, costs: Costs) -> Result<Self> {
        self.costs = costs;
        self.validate()?;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<Vec<f64>>) -> Result<Self> {
        self.weights = weights;
        self.validate()?;
        Ok(self)
    }

    /// Environment moves, strategic when `payoffs` (one value per
    /// meta-profile) is given.
    pub fn with_environment(mut self, moves: Vec<String>, payoffs: Option<Vec<f64>>) -> Result<Self> {
        self.env_moves = moves;
        self.env_payoff = payoffs;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_profiles(mut self, limit: u128) -> Self {
        self.max_profiles = limit;
        self
    }

    pub fn base_game(&self) -> &Game {
        &self.base_game
    }

    pub fn meta_actions(&self) -> &[Vec<String>] {
        &self.meta_actions
    }

    pub fn env_moves(&self) -> &[String] {
        &self.env_moves
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn selection(&self) -> &Selection {
        &self.selection
    }

    pub fn num_players(&self) -> usize {
        self.base_game.num_players()
    }

    /// Size of the meta-profile space, saturating at `u128::MAX`.
    pub fn num_profiles(&self) -> u128 {
        self.meta_actions
            .iter()
            .map(|x| x.len() as u128)
            .chain(std::iter::once(self.env_moves.len() as u128))
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }

    pub fn profile_index(&self, y: &MetaProfile) -> usize {
        let mut idx = 0;
        for (i, &x) in y.actions.iter().enumerate() {
            idx = idx * self.meta_actions[i].len() + x;
        }
        idx * self.env_moves.len() + y.env
    }

    pub fn profile_at(&self, mut index: usize) -> MetaProfile {
        let env = index % self.env_moves.len();
        index /= self.env_moves.len();
        let mut actions = vec![0; self.meta_actions.len()];
        for i in (0..self.meta_actions.len()).rev() {
            let n = self.meta_actions[i].len();
            actions[i] = index % n;
            index /= n;
        }
        MetaProfile { actions, env }
    }

    /// Builds a profile from meta-action labels.
    pub fn profile(&self, labels: &[&str], env: &str) -> Result<MetaProfile> {
        if labels.len() != self.num_players() {
            return Err(domain("one meta-action per player is required"));
        }
        let actions = labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                self.meta_actions[i]
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| domain(format!("unknown meta-action `{l}` for player `{}`", self.base_game.player_label(i))))
            })
            .collect::<Result<Vec<_>>>()?;
        let env = self
            .env_moves
            .iter()
            .position(|e| e == env)
            .ok_or_else(|| domain(format!("unknown environment move `{env}`")))?;
        Ok(MetaProfile { actions, env })
    }

    /// Every player choosing meta-action `label`, first environment move.
    pub fn uniform_profile(&self, label: &str) -> Result<MetaProfile> {
        let labels = vec![label; self.num_players()];
        self.profile(&labels, &self.env_moves[0].clone())
    }

    pub fn profile_labels(&self, y: &MetaProfile) -> Vec<&str> {
        y.actions.iter().enumerate().map(|(i, &x)| self.meta_actions[i][x].as_str()).collect()
    }

    pub fn describe(&self, y: &MetaProfile) -> String {
        let mut s = format!("({})", self.profile_labels(y).join(", "));
        if self.env_moves.len() > 1 || self.env_payoff.is_some() {
            s.push_str(&format!(" env={}", self.env_moves[y.env]));
        }
        s
    }

    fn check_profile(&self, y: &MetaProfile) -> Result<()> {
        if y.actions.len() != self.num_players()
            || y.actions.iter().enumerate().any(|(i, &x)| x >= self.meta_actions[i].len())
            || y.env >= self.env_moves.len()
        {
            return Err(domain(format!("meta-profile {y:?} outside the profile space")));
        }
        Ok(())
    }

    /// Transformation sequence the rule assigns to `y`.
    pub fn transformations(&self, y: &MetaProfile) -> &[Transformation] {
        match &self.rule {
            Rule::Vote { reform, threshold } => {
                let approvals = self
                    .profile_labels(y)
                    .iter()
                    .filter(|l| **l == APPROVE)
                    .count();
                let needed = match threshold {
                    Threshold::Unanimity => self.num_players(),
                    Threshold::AtLeast(k) => *k,
                };
                if approvals >= needed {
                    reform
                } else {
                    &[]
                }
            }
            Rule::Table(images) => &images[self.profile_index(y)],
        }
    }

    fn changes_game(&self, y: &MetaProfile) -> bool {
        !self.transformations(y).iter().all(Transformation::is_identity)
    }

    pub fn cost(&self, player: usize, y: &MetaProfile) -> f64 {
        match &self.costs {
            Costs::Zero => 0.0,
            Costs::Implementation(c) => {
                if self.changes_game(y) {
                    c[player]
                } else {
                    0.0
                }
            }
            Costs::PerAction(c) => c[player][y.actions[player]],
            Costs::Table(rows) => rows[self.profile_index(y)][player],
        }
    }

    pub fn env_payoff(&self, y: &MetaProfile) -> Option<f64> {
        self.env_payoff.as_ref().map(|v| v[self.profile_index(y)])
    }

    pub fn evaluate(&self, y: &MetaProfile) -> Result<MetaOutcome> {
        self.check_profile(y)?;
        let game = apply_sequence(self.transformations(y), &self.base_game)?;
        let selection = Selection { qre: self.selection.qre.rebased(&game), ..self.selection.clone() };
        let inner = select_equilibrium(&game, &selection)?;
        if !inner.converged {
            return Err(Error::NotConverged { profile: self.describe(y), residual: inner.residual });
        }
        let realized = realized_payoffs(&game, &selection.qre, &inner.profile)?;
        let costs: Vec<f64> = (0..self.num_players()).map(|i| self.cost(i, y)).collect();
        let v: Vec<f64> = realized.iter().zip(&costs).map(|(p, c)| p - c).collect();
        let h = hyper_payoffs(&v, &self.weights);
        Ok(MetaOutcome {
            profile: y.clone(),
            transformed_game: game,
            gamma_unique: inner.unique_certified,
            inner_result: inner,
            realized,
            costs,
            v,
            h,
        })
    }

    fn check_capacity(&self) -> Result<usize> {
        let n = self.num_profiles();
        if n > self.max_profiles {
            return Err(Error::Capacity { profiles: n, limit: self.max_profiles });
        }
        Ok(n as usize)
    }

    /// Evaluates every meta-profile and collects both equilibrium sets.
    pub fn analyze(&self) -> Result<MetaAnalysis> {
        let n = self.check_capacity()?;
        let outcomes = (0..n)
            .into_par_iter()
            .map(|k| self.evaluate(&self.profile_at(k)))
            .collect::<Result<Vec<_>>>()?;
        let meta_nash = self.equilibria(&outcomes, Payoff::Selfish);
        let hyper_meta_nash = self.equilibria(&outcomes, Payoff::Hyper);
        Ok(MetaAnalysis { outcomes, meta_nash, hyper_meta_nash })
    }

    pub fn meta_nash(&self) -> Result<Vec<MetaProfile>> {
        Ok(self.analyze()?.meta_nash_profiles())
    }

    pub fn hyper_meta_nash(&self) -> Result<Vec<MetaProfile>> {
        Ok(self.analyze()?.hyper_meta_nash_profiles())
    }

    fn equilibria(&self, outcomes: &[MetaOutcome], kind: Payoff) -> Vec<usize> {
        let value = |k: usize, i: usize| match kind {
            Payoff::Selfish => outcomes[k].v[i],
            Payoff::Hyper => outcomes[k].h[i],
        };
        (0..outcomes.len())
            .filter(|&k| {
                let y = &outcomes[k].profile;
                for i in 0..self.num_players() {
                    let current = value(k, i);
                    for alt in 0..self.meta_actions[i].len() {
                        if alt == y.actions[i] {
                            continue;
                        }
                        let mut dev = y.clone();
                        dev.actions[i] = alt;
                        if value(self.profile_index(&dev), i) > current {
                            return false;
                        }
                    }
                }
                if let Some(v0) = &self.env_payoff {
                    let current = v0[k];
                    for e in 0..self.env_moves.len() {
                        let dev = MetaProfile { actions: y.actions.clone(), env: e };
                        if v0[self.profile_index(&dev)] > current {
                            return false;
                        }
                    }
                }
                true
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let m = self.num_players();
        if self.meta_actions.len() != m {
            return Err(domain(format!("meta-action sets for {} players, base game has {m}", self.meta_actions.len())));
        }
        for (i, x) in self.meta_actions.iter().enumerate() {
            if x.is_empty() {
                return Err(domain(format!("player `{}` has no meta-actions", self.base_game.player_label(i))));
            }
            let mut sorted = x.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != x.len() {
                return Err(domain(format!("duplicate meta-action for player `{}`", self.base_game.player_label(i))));
            }
        }
        if self.env_moves.is_empty() {
            return Err(domain("the environment needs at least one move"));
        }
        self.selection.qre.validate(&self.base_game)?;
        let n = self.num_profiles();
        let sized = |len: usize, what: &str| -> Result<()> {
            if len as u128 != n {
                return Err(Error::NotTotal(format!("{what} has {len} entries for {n} meta-profiles")));
            }
            Ok(())
        };
        match &self.rule {
            Rule::Vote { reform, threshold } => {
                if let Threshold::AtLeast(k) = threshold {
                    if *k < 1 || *k > m {
                        return Err(domain(format!("vote threshold must lie in 1..={m}, got {k}")));
                    }
                }
                for (i, x) in self.meta_actions.iter().enumerate() {
                    if !x.iter().any(|a| a == APPROVE) {
                        return Err(domain(format!(
                            "voting rules need an `{APPROVE}` meta-action for player `{}`",
                            self.base_game.player_label(i)
                        )));
                    }
                }
                apply_sequence(reform, &self.base_game)?;
            }
            Rule::Table(images) => {
                sized(images.len(), "rule table")?;
                for seq in images {
                    apply_sequence(seq, &self.base_game)?;
                }
            }
        }
        let check_cost = |c: f64| -> Result<()> {
            if !c.is_finite() || c < 0.0 {
                return Err(domain(format!("costs must be finite and nonnegative, got {c}")));
            }
            Ok(())
        };
        match &self.costs {
            Costs::Zero => {}
            Costs::Implementation(c) => {
                if c.len() != m {
                    return Err(domain("implementation costs need one entry per player"));
                }
                c.iter().try_for_each(|&x| check_cost(x))?;
            }
            Costs::PerAction(c) => {
                if c.len() != m || c.iter().zip(&self.meta_actions).any(|(row, x)| row.len() != x.len()) {
                    return Err(domain("per-action costs need one entry per meta-action"));
                }
                c.iter().flatten().try_for_each(|&x| check_cost(x))?;
            }
            Costs::Table(rows) => {
                sized(rows.len(), "cost table")?;
                if rows.iter().any(|r| r.len() != m) {
                    return Err(domain("every cost row needs one entry per player"));
                }
                rows.iter().flatten().try_for_each(|&x| check_cost(x))?;
            }
        }
        validate_weights(&self.weights, m)?;
        if let Some(v0) = &self.env_payoff {
            sized(v0.len(), "environment payoff table")?;
            if v0.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric("non-finite environment payoff".into()));
            }
        }
        Ok(())
    }
}

fn validate_weights(weights: &[Vec<f64>], m: usize) -> Result<()> {
    if weights.len() != m || weights.iter().any(|r| r.len() != m) {
        return Err(domain(format!("weight matrix must be {m}x{m}")));
    }
    for (i, row) in weights.iter().enumerate() {
        if row.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numeric("non-finite social weight".into()));
        }
        if row[i] != 0.0 {
            return Err(domain(format!("weight matrix diagonal must be zero (row {i})")));
        }
    }
    Ok(())
}

/// `h_i = v_i + sum_{j != i} w_ij v_j`.
pub fn hyper_payoffs(v: &[f64], weights: &[Vec<f64>]) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            v[i] + (0..v.len()).filter(|&j| j != i).map(|j| weights[i][j] * v[j]).sum::<f64>()
        })
        .collect()
}

/// Whether each player's unilateral Reject strictly raises their
/// hyper-payoff at unanimous approval, i.e.
/// `sum_{j != i} w_ij g_j < -g_i` for gains `g = U^D - U^S`.
pub fn check_blocking(gains: &[f64], weights: &[Vec<f64>]) -> Result<Vec<bool>> {
    let m = gains.len();
    validate_weights(weights, m)?;
    if let Some((i, g)) = gains.iter().enumerate().find(|(_, g)| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::Precondition(format!("reform gain of player {i} must be strictly positive, got {g}")));
    }
    Ok((0..m)
        .map(|i| {
            let spite: f64 = (0..m).filter(|&j| j != i).map(|j| weights[i][j] * gains[j]).sum();
            spite < -gains[i]
        })
        .collect())
}

/// Payoffs, gains and per-player conditions for unanimous approval.
#[derive(Debug, Clone, PartialEq)]
pub struct ReformSupport {
    /// Realized payoffs under the reform.
    pub reform_payoffs: Vec<f64>,
    /// Realized payoffs under the status quo.
    pub status_quo_payoffs: Vec<f64>,
    /// `C_i(all Approve) - C_i(all Reject)`.
    pub cost_differences: Vec<f64>,
    /// `U^D_i - U^S_i > C_i(all Approve) - C_i(all Reject)`, per player.
    pub stated_condition: Vec<bool>,
    /// `V_i(all Approve) >= V_i(i rejects, others approve)`, per player.
    pub exact_condition: Vec<bool>,
    /// Approve-all found among the pure Meta-Nash equilibria by enumeration.
    pub approve_all_is_meta_nash: bool,
}

impl ReformSupport {
    pub fn gains(&self) -> Vec<f64> {
        self.reform_payoffs.iter().zip(&self.status_quo_payoffs).map(|(d, s)| d - s).collect()
    }

    pub fn stated_holds(&self) -> bool {
        self.stated_condition.iter().all(|&b| b)
    }

    /// Unanimous approval survives every unilateral deviation.
    pub fn supportable(&self) -> bool {
        self.exact_condition.iter().all(|&b| b)
    }
}

/// Checks whether unanimous approval of the reform is a Meta-Nash
/// equilibrium. Requires a unanimity rule and a single environment move.
pub fn check_reform_supportable(mg: &MetaGame) -> Result<ReformSupport> {
    if !matches!(mg.rule(), Rule::Vote { threshold: Threshold::Unanimity, .. }) {
        return Err(Error::Precondition("reform support is defined for unanimity rules".into()));
    }
    if mg.env_moves().len() != 1 {
        return Err(Error::Precondition("reform support needs a single environment move".into()));
    }
    if mg.meta_actions().iter().any(|x| !x.iter().any(|a| a == REJECT)) {
        return Err(Error::Precondition(format!("every player needs a `{REJECT}` meta-action")));
    }
    let approve_all = mg.uniform_profile(APPROVE)?;
    let reject_all = mg.uniform_profile(REJECT)?;
    let on = mg.evaluate(&approve_all)?;
    let off = mg.evaluate(&reject_all)?;
    let m = mg.num_players();
    let cost_differences: Vec<f64> = (0..m).map(|i| on.costs[i] - off.costs[i]).collect();
    let stated_condition = (0..m)
        .map(|i| on.realized[i] - off.realized[i] > cost_differences[i])
        .collect();
    let exact_condition = (0..m)
        .map(|i| {
            let mut dev = approve_all.clone();
            let mut ok = true;
            for alt in 0..mg.meta_actions()[i].len() {
                if alt == approve_all.actions[i] {
                    continue;
                }
                dev.actions[i] = alt;
                let out = mg.evaluate(&dev)?;
                ok &= on.v[i] >= out.v[i];
            }
            Ok(ok)
        })
        .collect::<Result<Vec<_>>>()?;
    let approve_all_is_meta_nash = mg.meta_nash()?.contains(&approve_all);
    Ok(ReformSupport {
        reform_payoffs: on.realized,
        status_quo_payoffs: off.realized,
        cost_differences,
        stated_condition,
        exact_condition,
        approve_all_is_meta_nash,
    })
}

/// A base game with one action per player and payoffs `status_quo`, and a
/// price-only reform moving every player to `reform`.
pub fn abstract_reform(status_quo: &[f64], reform: &[f64]) -> Result<(Game, Vec<Transformation>)> {
    if status_quo.len() != reform.len() || status_quo.is_empty() {
        return Err(domain("status-quo and reform payoffs need one entry per player"));
    }
    let m = status_quo.len();
    let players: Vec<String> = (1..=m).map(|i| i.to_string()).collect();
    let game = Game::from_fn(players.clone(), vec![vec!["play".to_string()]; m], |_| status_quo.to_vec())?;
    let adjustments = players
        .iter()
        .zip(status_quo.iter().zip(reform))
        .map(|(p, (s, d))| crate::transform::PayoffAdjustment { player: p.clone(), action: "play".into(), amount: d - s })
        .collect();
    Ok((game, vec![Transformation::PriceOnly { adjustments }]))
}
