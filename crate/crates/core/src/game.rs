//! Finite normal-form games, mixed profiles and pure-Nash enumeration.
//!
//! Payoffs are stored densely: one row of `m` reals per pure profile, with
//! profiles laid out in mixed radix (last player varies fastest).

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Absolute tolerance for probability vectors summing to one.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    players: Vec<String>,
    actions: Vec<Vec<String>>,
    strides: Vec<usize>,
    payoffs: Vec<f64>,
}

impl Game {
    /// Builds a game by evaluating `payoff` on every pure profile.
    ///
    /// The closure receives action indices (one per player) and must return
    /// one payoff per player.
    pub fn from_fn<F>(players: Vec<String>, actions: Vec<Vec<String>>, mut payoff: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        validate_structure(&players, &actions)?;
        let strides = strides_for(&actions);
        let total: usize = actions.iter().map(Vec::len).product();
        let m = players.len();
        let mut payoffs = Vec::with_capacity(total * m);
        let mut profile = vec![0usize; m];
        for idx in 0..total {
            decode(idx, &actions, &mut profile);
            let row = payoff(&profile);
            if row.len() != m {
                return Err(Error::NotTotal(format!(
                    "profile {} has {} payoff entries, expected {m}",
                    idx,
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite payoff {v}")));
            }
            payoffs.extend(row);
        }
        Ok(Self { players, actions, strides, payoffs })
    }

    /// Symmetric two-player 2×2 game with actions `X`, `Y` and payoffs
    /// `u(X,X)=a`, `u(X,Y)=c`, `u(Y,X)=d`, `u(Y,Y)=b` for the row player.
    pub fn symmetric_2x2(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let table = [[a, c], [d, b]];
        Self::from_fn(
            vec!["1".into(), "2".into()],
            vec![vec!["X".into(), "Y".into()], vec!["X".into(), "Y".into()]],
            |p| vec![table[p[0]][p[1]], table[p[1]][p[0]]],
        )
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn player_label(&self, player: usize) -> &str {
        &self.players[player]
    }

    pub fn player_index(&self, label: &str) -> Result<usize> {
        self.players
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| domain(format!("unknown player `{label}`")))
    }

    pub fn actions(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn all_actions(&self) -> &[Vec<String>] {
        &self.actions
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    pub fn action_index(&self, player: usize, label: &str) -> Result<usize> {
        self.actions[player].iter().position(|a| a == label).ok_or_else(|| {
            domain(format!("unknown action `{label}` for player `{}`", self.players[player]))
        })
    }

    pub fn num_profiles(&self) -> usize {
        self.payoffs.len() / self.players.len()
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// Decodes a flat profile index into per-player action indices.
    pub fn profile_at(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.players.len()];
        decode(index, &self.actions, &mut out);
        out
    }

    /// Payoff vector (one entry per player) of a pure profile.
    pub fn payoffs(&self, profile: &[usize]) -> &[f64] {
        let m = self.players.len();
        let start = self.profile_index(profile) * m;
        &self.payoffs[start..start + m]
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> f64 {
        self.payoffs(profile)[player]
    }

    /// Iterates over every pure profile in storage order.
    pub fn profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_profiles()).map(|i| self.profile_at(i))
    }

    /// Labels of a pure profile, one per player.
    pub fn profile_labels(&self, profile: &[usize]) -> Vec<&str> {
        profile.iter().enumerate().map(|(i, &a)| self.actions[i][a].as_str()).collect()
    }

    /// Expected payoff of `player` for every one of their actions when the
    /// other players mix according to `others`. `others[player]` is ignored.
    pub fn action_values(&self, player: usize, others: &MixedProfile) -> Vec<f64> {
        let m = self.players.len();
        let mut values = vec![0.0; self.actions[player].len()];
        let mut profile = vec![0usize; m];
        for idx in 0..self.num_profiles() {
            decode(idx, &self.actions, &mut profile);
            let mut weight = 1.0;
            for (j, &a) in profile.iter().enumerate() {
                if j != player {
                    weight *= others.probs[j][a];
                }
            }
            if weight != 0.0 {
                values[profile[player]] += weight * self.payoffs[idx * m + player];
            }
        }
        values
    }

    /// E[u_i(a_i, a_-i)] under the product distribution of the other
    /// players' mixes, with player and action given by index.
    pub fn expected_payoff_at(&self, player: usize, action: usize, others: &MixedProfile) -> Result<f64> {
        if player >= self.num_players() {
            return Err(domain(format!("player index {player} out of range")));
        }
        if action >= self.num_actions(player) {
            return Err(domain(format!("action index {action} out of range for player {player}")));
        }
        others.check_shape(self)?;
        Ok(self.action_values(player, others)[action])
    }

    /// Label-based variant of [`Game::expected_payoff_at`].
    pub fn expected_payoff(&self, player: &str, action: &str, others: &MixedProfile) -> Result<f64> {
        let i = self.player_index(player)?;
        let a = self.action_index(i, action)?;
        self.expected_payoff_at(i, a, others)
    }

    /// All pure profiles where no player gains strictly by a unilateral
    /// deviation.
    pub fn pure_nash(&self) -> Vec<Vec<usize>> {
        self.profiles().filter(|p| self.is_pure_nash(p)).collect()
    }

    pub fn is_pure_nash(&self, profile: &[usize]) -> bool {
        let mut dev = profile.to_vec();
        for i in 0..self.num_players() {
            let current = self.payoff(profile, i);
            for alt in 0..self.num_actions(i) {
                if alt == profile[i] {
                    continue;
                }
                dev[i] = alt;
                let gain = self.payoff(&dev, i) > current;
                dev[i] = profile[i];
                if gain {
                    return false;
                }
            }
        }
        true
    }

    /// Serializable description of the game.
    pub fn to_spec(&self) -> GameSpec {
        let actions = self
            .players
            .iter()
            .cloned()
            .zip(self.actions.iter().cloned())
            .collect();
        let payoffs = self
            .profiles()
            .map(|p| PayoffEntry {
                profile: self
                    .players
                    .iter()
                    .cloned()
                    .zip(self.profile_labels(&p).into_iter().map(String::from))
                    .collect(),
                values: self.players.iter().cloned().zip(self.payoffs(&p).iter().copied()).collect(),
            })
            .collect();
        GameSpec { players: self.players.clone(), actions, payoffs }
    }

    pub fn from_spec(spec: &GameSpec) -> Result<Self> {
        let mut actions = Vec::with_capacity(spec.players.len());
        for p in &spec.players {
            let list = spec
                .actions
                .get(p)
                .ok_or_else(|| Error::Input(format!("no action list for player `{p}`")))?;
            actions.push(list.clone());
        }
        if let Some(extra) = spec.actions.keys().find(|k| !spec.players.contains(k)) {
            return Err(Error::Input(format!("action list for unknown player `{extra}`")));
        }
        validate_structure(&spec.players, &actions)?;
        let strides = strides_for(&actions);
        let total: usize = actions.iter().map(Vec::len).product();
        let m = spec.players.len();
        let mut table: Vec<Option<Vec<f64>>> = vec![None; total];
        for entry in &spec.payoffs {
            let idx = resolve_entry_profile(&spec.players, &actions, &strides, &entry.profile)?;
            if table[idx].is_some() {
                return Err(Error::Input(format!("duplicate payoff entry for profile {:?}", entry.profile)));
            }
            table[idx] = Some(resolve_entry_values(&spec.players, &entry.values)?);
        }
        let mut payoffs = Vec::with_capacity(total * m);
        let mut profile = vec![0; m];
        for (idx, row) in table.into_iter().enumerate() {
            match row {
                Some(r) => payoffs.extend(r),
                None => {
                    decode(idx, &actions, &mut profile);
                    let labels: Vec<_> = profile.iter().enumerate().map(|(i, &a)| actions[i][a].as_str()).collect();
                    return Err(Error::NotTotal(format!("missing payoff entry for profile {labels:?}")));
                }
            }
        }
        Ok(Self { players: spec.players.clone(), actions, strides, payoffs })
    }
}

/// Per-player probability vectors over each player's actions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    probs: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        for (i, v) in probs.iter().enumerate() {
            check_distribution(v).map_err(|e| domain(format!("player {i}: {e}")))?;
        }
        Ok(Self { probs })
    }

    /// Builds a profile checked against the action counts of `game`.
    pub fn for_game(game: &Game, probs: Vec<Vec<f64>>) -> Result<Self> {
        let profile = Self::new(probs)?;
        profile.check_shape(game)?;
        Ok(profile)
    }

    pub fn uniform(game: &Game) -> Self {
        let probs = (0..game.num_players())
            .map(|i| {
                let n = game.num_actions(i);
                vec![1.0 / n as f64; n]
            })
            .collect();
        Self { probs }
    }

    /// Degenerate profile placing all mass on the given pure profile.
    pub fn pure(game: &Game, profile: &[usize]) -> Self {
        let probs = profile
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mut v = vec![0.0; game.num_actions(i)];
                v[a] = 1.0;
                v
            })
            .collect();
        Self { probs }
    }

    pub(crate) fn from_raw(probs: Vec<Vec<f64>>) -> Self {
        Self { probs }
    }

    pub fn probs(&self, player: usize) -> &[f64] {
        &self.probs[player]
    }

    pub fn all(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn num_players(&self) -> usize {
        self.probs.len()
    }

    pub(crate) fn set(&mut self, player: usize, probs: Vec<f64>) {
        self.probs[player] = probs;
    }

    /// Sup-norm distance between two profiles of the same shape.
    pub fn sup_distance(&self, other: &MixedProfile) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn min_probability(&self) -> f64 {
        self.probs.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_shape(&self, game: &Game) -> Result<()> {
        if self.probs.len() != game.num_players() {
            return Err(domain(format!(
                "profile has {} players, game has {}",
                self.probs.len(),
                game.num_players()
            )));
        }
        for (i, v) in self.probs.iter().enumerate() {
            if v.len() != game.num_actions(i) {
                return Err(domain(format!(
                    "player `{}` has {} actions but the profile lists {} probabilities",
                    game.player_label(i),
                    game.num_actions(i),
                    v.len()
                )));
            }
        }
        Ok(())
    }
}

fn check_distribution(v: &[f64]) -> std::result::Result<(), String> {
    if v.is_empty() {
        return Err("empty probability vector".into());
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(format!("invalid probability {x}"));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(format!("probabilities sum to {sum}"));
    }
    Ok(())
}

/// JSON description of a game: players, labeled action lists and a payoff
/// entry for every pure profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub players: Vec<String>,
    pub actions: BTreeMap<String, Vec<String>>,
    pub payoffs: Vec<PayoffEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffEntry {
    pub profile: BTreeMap<String, String>,
    pub values: BTreeMap<String, f64>,
}

pub(crate) fn validate_structure(players: &[String], actions: &[Vec<String>]) -> Result<()> {
    if players.is_empty() {
        return Err(domain("a game needs at least one player"));
    }
    if players.len() != actions.len() {
        return Err(domain("one action list per player is required"));
    }
    let mut seen = HashSet::new();
    for p in players {
        if !seen.insert(p.as_str()) {
            return Err(domain(format!("duplicate player `{p}`")));
        }
    }
    for (p, list) in players.iter().zip(actions) {
        if list.is_empty() {
            return Err(domain(format!("player `{p}` has no actions")));
        }
        let mut seen = HashSet::new();
        for a in list {
            if !seen.insert(a.as_str()) {
                return Err(domain(format!("duplicate action `{a}` for player `{p}`")));
            }
        }
    }
    Ok(())
}

fn strides_for(actions: &[Vec<String>]) -> Vec<usize> {
    let mut strides = vec![1; actions.len()];
    for i in (0..actions.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * actions[i + 1].len();
    }
    strides
}

fn decode(mut index: usize, actions: &[Vec<String>], out: &mut [usize]) {
    for i in (0..actions.len()).rev() {
        let n = actions[i].len();
        out[i] = index % n;
        index /= n;
    }
}

pub(crate) fn resolve_entry_profile(
    players: &[String],
    actions: &[Vec<String>],
    strides: &[usize],
    profile: &BTreeMap<String, String>,
) -> Result<usize> {
    if profile.len() != players.len() {
        return Err(Error::Input(format!("profile {profile:?} must name an action for every player")));
    }
    let mut idx = 0;
    for (i, p) in players.iter().enumerate() {
        let label = profile
            .get(p)
            .ok_or_else(|| Error::Input(format!("profile {profile:?} lacks player `{p}`")))?;
        let a = actions[i]
            .iter()
            .position(|x| x == label)
            .ok_or_else(|| domain(format!("unknown action `{label}` for player `{p}`")))?;
        idx += a * strides[i];
    }
    Ok(idx)
}

pub(crate) fn resolve_entry_values(players: &[String], values: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    if values.len() != players.len() {
        return Err(Error::Input(format!("payoff values {values:?} must list every player")));
    }
    players
        .iter()
        .map(|p| {
            let v = *values
                .get(p)
                .ok_or_else(|| Error::Input(format!("payoff values lack player `{p}`")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Numeric(format!("non-finite payoff for player `{p}`")))
            }
        })
        .collect()
}
