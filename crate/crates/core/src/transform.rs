//! Game transformations: payoff adjustments, action deletion, addition and
//! replacement. Every transformation maps a game to a new game; inputs are
//! never mutated.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::game::{resolve_entry_values, Game, PayoffEntry};

/// Additive change to one player's payoff in every profile where that
/// player uses `action`. A tax `t` is an amount of `-t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffAdjustment {
    pub player: String,
    pub action: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Transformation {
    #[serde(rename = "price")]
    PriceOnly { adjustments: Vec<PayoffAdjustment> },
    Delete { player: String, action: String },
    Add { player: String, action: String, payoffs: Vec<PayoffEntry> },
    Replace { player: String, old: String, new: String, payoffs: Vec<PayoffEntry> },
}

impl Transformation {
    pub fn identity() -> Self {
        Self::PriceOnly { adjustments: Vec::new() }
    }

    /// Tax `t` on one player's action.
    pub fn tax(player: &str, action: &str, t: f64) -> Self {
        Self::PriceOnly {
            adjustments: vec![PayoffAdjustment { player: player.into(), action: action.into(), amount: -t }],
        }
    }

    /// Tax `t` on `action` for every player who has it.
    pub fn tax_all(game: &Game, action: &str, t: f64) -> Self {
        let adjustments = game
            .players()
            .iter()
            .enumerate()
            .filter(|(i, _)| game.actions(*i).iter().any(|a| a == action))
            .map(|(_, p)| PayoffAdjustment { player: p.clone(), action: action.into(), amount: -t })
            .collect();
        Self::PriceOnly { adjustments }
    }

    /// Deletes `action` from every player who has it.
    pub fn delete_all(game: &Game, action: &str) -> Vec<Self> {
        game.players()
            .iter()
            .enumerate()
            .filter(|(i, _)| game.actions(*i).iter().any(|a| a == action))
            .map(|(_, p)| Self::Delete { player: p.clone(), action: action.into() })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::PriceOnly { adjustments } if adjustments.iter().all(|a| a.amount == 0.0))
    }

    pub fn apply(&self, game: &Game) -> Result<Game> {
        match self {
            Self::PriceOnly { adjustments } => apply_price(game, adjustments),
            Self::Delete { player, action } => {
                let i = game.player_index(player)?;
                let a = game.action_index(i, action)?;
                if game.num_actions(i) == 1 {
                    return Err(Error::Infeasible { player: player.clone() });
                }
                let mut actions = game.all_actions().to_vec();
                actions[i].remove(a);
                Game::from_fn(game.players().to_vec(), actions, |p| {
                    let mut old = p.to_vec();
                    if old[i] >= a {
                        old[i] += 1;
                    }
                    game.payoffs(&old).to_vec()
                })
            }
            Self::Add { player, action, payoffs } => {
                let i = game.player_index(player)?;
                if game.actions(i).iter().any(|x| x == action) {
                    return Err(Error::Collision { player: player.clone(), action: action.clone() });
                }
                let mut actions = game.all_actions().to_vec();
                actions[i].push(action.clone());
                extend(game, actions, i, None, payoffs)
            }
            Self::Replace { player, old, new, payoffs } => {
                let i = game.player_index(player)?;
                let a = game.action_index(i, old)?;
                if new != old && game.actions(i).iter().any(|x| x == new) {
                    return Err(Error::Collision { player: player.clone(), action: new.clone() });
                }
                let mut actions = game.all_actions().to_vec();
                actions[i].remove(a);
                actions[i].push(new.clone());
                extend(game, actions, i, Some(a), payoffs)
            }
        }
    }
}

fn apply_price(game: &Game, adjustments: &[PayoffAdjustment]) -> Result<Game> {
    let mut shift: Vec<Vec<f64>> = (0..game.num_players()).map(|i| vec![0.0; game.num_actions(i)]).collect();
    for adj in adjustments {
        if !adj.amount.is_finite() {
            return Err(Error::Numeric(format!("non-finite adjustment {}", adj.amount)));
        }
        let i = game.player_index(&adj.player)?;
        let a = game.action_index(i, &adj.action)?;
        shift[i][a] += adj.amount;
    }
    Game::from_fn(game.players().to_vec(), game.all_actions().to_vec(), |p| {
        game.payoffs(p).iter().enumerate().map(|(i, v)| v + shift[i][p[i]]).collect()
    })
}

/// Builds the game with `actions`, where the last action of `player` is
/// new and takes its payoffs from `entries`. Other profiles copy the old
/// game; `removed` is the index of an action dropped from `player`.
fn extend(
    game: &Game,
    actions: Vec<Vec<String>>,
    player: usize,
    removed: Option<usize>,
    entries: &[PayoffEntry],
) -> Result<Game> {
    let players = game.players().to_vec();
    let new_index = actions[player].len() - 1;
    let mut table: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    for entry in entries {
        if entry.profile.len() != players.len() {
            return Err(Error::Input(format!("extension profile {:?} must name every player", entry.profile)));
        }
        let mut profile = Vec::with_capacity(players.len());
        for (j, p) in players.iter().enumerate() {
            let label = entry
                .profile
                .get(p)
                .ok_or_else(|| Error::Input(format!("extension profile {:?} lacks player `{p}`", entry.profile)))?;
            let a = actions[j]
                .iter()
                .position(|x| x == label)
                .ok_or_else(|| domain(format!("unknown action `{label}` for player `{p}`")))?;
            profile.push(a);
        }
        if profile[player] != new_index {
            return Err(Error::Input(format!(
                "extension profile {:?} does not use the new action of player `{}`",
                entry.profile, players[player]
            )));
        }
        let values = resolve_entry_values(&players, &entry.values)?;
        if table.insert(profile, values).is_some() {
            return Err(Error::Input(format!("duplicate extension entry for {:?}", entry.profile)));
        }
    }
    let mut missing = None;
    let built = Game::from_fn(players.clone(), actions.clone(), |p| {
        if p[player] == new_index {
            match table.get(p) {
                Some(v) => v.clone(),
                None => {
                    missing.get_or_insert_with(|| p.to_vec());
                    vec![0.0; p.len()]
                }
            }
        } else {
            let mut old = p.to_vec();
            if let Some(r) = removed {
                if old[player] >= r {
                    old[player] += 1;
                }
            }
            game.payoffs(&old).to_vec()
        }
    })?;
    if let Some(p) = missing {
        let labels: Vec<_> = p.iter().enumerate().map(|(j, &a)| actions[j][a].as_str()).collect();
        return Err(Error::NotTotal(format!("extension lacks payoffs for profile {labels:?}")));
    }
    Ok(built)
}

/// Sequence equivalent to applying `first` and then `second`.
pub fn compose(first: Transformation, second: Transformation) -> Vec<Transformation> {
    vec![first, second]
}

/// Applies transformations left to right.
pub fn apply_sequence(seq: &[Transformation], game: &Game) -> Result<Game> {
    let mut out = game.clone();
    for t in seq {
        out = t.apply(&out)?;
    }
    Ok(out)
}
