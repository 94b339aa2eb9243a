//! JSON input files read by the command-line tool.
//!
//! Three file kinds are understood:
//!
//! * game files: a [`GameSpec`] plus an optional `qre` section,
//! * binary coordination files: `{a, b, c, d, kappa, beta, tax?}`,
//! * meta-game files: base game, rule, costs, weights and selection.
//!
//! Parse errors keep serde's line and column information.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coordination::WelfareMode;
use crate::error::{domain, Error, Result};
use crate::game::{Game, GameSpec, PayoffEntry};
use crate::metagame::{abstract_reform, Costs, MetaGame, Rule, Threshold, APPROVE, REJECT};
use crate::qre::{symmetric_binary_reduction, BinaryCoordParams, MultiplicityPolicy, QreConfig, Selection};
use crate::transform::Transformation;

/// A value given once for every player or per player label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerPlayer {
    All(f64),
    Each(BTreeMap<String, f64>),
}

impl PerPlayer {
    fn resolve(&self, game: &Game, what: &str) -> Result<Vec<f64>> {
        match self {
            Self::All(v) => Ok(vec![*v; game.num_players()]),
            Self::Each(map) => {
                for key in map.keys() {
                    game.player_index(key)?;
                }
                game.players()
                    .iter()
                    .map(|p| map.get(p).copied().ok_or_else(|| domain(format!("{what} missing for player `{p}`"))))
                    .collect()
            }
        }
    }
}

/// Precision, switching cost and default action. Unset fields fall back to
/// `beta = 1`, `kappa = 0` and each player's first action.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QreSection {
    #[serde(default)]
    pub beta: Option<PerPlayer>,
    #[serde(default)]
    pub kappa: Option<PerPlayer>,
    #[serde(default)]
    pub default: Option<BTreeMap<String, String>>,
}

impl QreSection {
    pub fn resolve(&self, game: &Game) -> Result<QreConfig> {
        let mut cfg = QreConfig::symmetric(game, 1.0, 0.0);
        if let Some(b) = &self.beta {
            cfg.beta = b.resolve(game, "beta")?;
        }
        if let Some(k) = &self.kappa {
            cfg.kappa = k.resolve(game, "kappa")?;
        }
        if let Some(map) = &self.default {
            for (player, action) in map {
                let i = game.player_index(player)?;
                game.action_index(i, action)?;
                cfg.default_action[i] = action.clone();
            }
        }
        cfg.validate(game)?;
        Ok(cfg)
    }

    /// Overlays `other` field by field.
    pub fn merged(&self, other: &QreSection) -> QreSection {
        QreSection {
            beta: other.beta.clone().or_else(|| self.beta.clone()),
            kappa: other.kappa.clone().or_else(|| self.kappa.clone()),
            default: other.default.clone().or_else(|| self.default.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFileRaw {
    players: Vec<String>,
    actions: BTreeMap<String, Vec<String>>,
    payoffs: Vec<PayoffEntry>,
    #[serde(default)]
    qre: Option<QreSection>,
}

impl GameFileRaw {
    fn build(self) -> Result<GameFile> {
        let spec = GameSpec { players: self.players, actions: self.actions, payoffs: self.payoffs };
        Ok(GameFile { game: Game::from_spec(&spec)?, qre: self.qre.unwrap_or_default() })
    }
}

/// A game together with its (possibly empty) QRE section.
#[derive(Debug, Clone, PartialEq)]
pub struct GameFile {
    pub game: Game,
    pub qre: QreSection,
}

fn parse_error(path: &Path, err: serde_json::Error) -> Error {
    Error::Input(format!("{}: {err}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn parse_game(text: &str, origin: &Path) -> Result<GameFile> {
    let raw: GameFileRaw = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    raw.build()
}

pub fn load_game(path: &Path) -> Result<GameFile> {
    parse_game(&read(path)?, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryFile {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub kappa: f64,
    pub beta: f64,
    #[serde(default)]
    pub tax: f64,
}

impl BinaryFile {
    pub fn params(&self) -> Result<BinaryCoordParams> {
        BinaryCoordParams::new(self.a, self.b, self.c, self.d, self.kappa, self.beta, self.tax)
    }
}

/// Settings of the baked coordination table and figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub params: BinaryFile,
    pub taxes: Vec<f64>,
    #[serde(default)]
    pub deletion: bool,
    #[serde(default)]
    pub welfare: WelfareMode,
    pub figure: FigureSection,
}

/// Uniform tax grid `[0, t_max]` with `points` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSection {
    pub t_max: f64,
    pub points: usize,
}

pub fn parse_table_config(text: &str, origin: &Path) -> Result<TableConfig> {
    serde_json::from_str(text).map_err(|e| parse_error(origin, e))
}

/// Reads binary coordination parameters. A symmetric two-player 2×2 game
/// file with a symmetric `qre` section is accepted as well; its default
/// action plays the role of `X`.
pub fn parse_binary(text: &str, origin: &Path) -> Result<BinaryCoordParams> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    if value.get("payoffs").is_some() {
        let file = parse_game(text, origin)?;
        return binary_from_game(&file.game, &file.qre.resolve(&file.game)?);
    }
    let raw: BinaryFile = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    raw.params()
}

pub fn load_binary(path: &Path) -> Result<BinaryCoordParams> {
    parse_binary(&read(path)?, path)
}

/// Binary coordination parameters of a symmetric 2×2 game.
pub fn binary_from_game(game: &Game, cfg: &QreConfig) -> Result<BinaryCoordParams> {
    let (_, sq) = symmetric_binary_reduction(game, cfg)
        .ok_or_else(|| domain("binary commands need a symmetric two-player 2x2 game with symmetric beta, kappa and default"))?;
    let alt = 1 - sq;
    let u = |own: usize, other: usize| game.payoff(&[own, other], 0);
    BinaryCoordParams::new(u(sq, sq), u(alt, alt), u(sq, alt), u(alt, sq), cfg.kappa[0], cfg.beta[0], 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum GameRef {
    Path(PathBuf),
    Inline(Box<GameFileRaw>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    #[serde(default)]
    pub policy: Option<MultiplicityPolicy>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub grid_size: Option<usize>,
}

impl SelectionSection {
    pub fn apply(&self, sel: &mut Selection) -> Result<()> {
        if let Some(p) = self.policy {
            sel.policy = p;
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(domain(format!("tolerance must be positive, got {t}")));
            }
            sel.tol = t;
        }
        if let Some(n) = self.max_iter {
            sel.max_iter = n;
        }
        if let Some(n) = self.grid_size {
            if n < 2 {
                return Err(domain("root grid needs at least 2 points"));
            }
            sel.grid_size = n;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentSection {
    moves: Vec<String>,
    #[serde(default)]
    payoffs: Option<Vec<ProfileValue>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileValue {
    profile: BTreeMap<String, String>,
    #[serde(default)]
    env: Option<String>,
    value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    profile: BTreeMap<String, String>,
    #[serde(default)]
    env: Option<String>,
    transformations: Vec<Transformation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostEntry {
    profile: BTreeMap<String, String>,
    #[serde(default)]
    env: Option<String>,
    values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RuleSection {
    Unanimity {
        #[serde(default)]
        reform: Option<Vec<Transformation>>,
    },
    Majority {
        threshold: usize,
        #[serde(default)]
        reform: Option<Vec<Transformation>>,
    },
    Table {
        entries: Vec<TableEntry>,
        #[serde(default)]
        default: Vec<Transformation>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum CostSection {
    Zero,
    Implementation { values: BTreeMap<String, f64> },
    PerAction { values: BTreeMap<String, BTreeMap<String, f64>> },
    Table { entries: Vec<CostEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AbstractReformSection {
    status_quo: Vec<f64>,
    reform: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFileRaw {
    #[serde(default)]
    game: Option<GameRef>,
    #[serde(default)]
    abstract_reform: Option<AbstractReformSection>,
    #[serde(default)]
    qre: Option<QreSection>,
    #[serde(default)]
    selection: Option<SelectionSection>,
    #[serde(default)]
    meta_actions: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default)]
    environment: Option<EnvironmentSection>,
    rule: RuleSection,
    #[serde(default)]
    costs: Option<CostSection>,
    #[serde(default)]
    weights: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Parses a meta-game description. Relative game paths are resolved
/// against `base_dir`.
pub fn parse_meta(text: &str, origin: &Path, base_dir: &Path) -> Result<MetaGame> {
    let raw: MetaFileRaw = serde_json::from_str(text).map_err(|e| parse_error(origin, e))?;
    let (game, game_qre, abstract_reform_images) = match (raw.game, raw.abstract_reform) {
        (Some(_), Some(_)) => return Err(Error::Input("give either `game` or `abstract_reform`, not both".into())),
        (None, None) => return Err(Error::Input("missing field `game`".into())),
        (Some(GameRef::Path(p)), None) => {
            let full = if p.is_absolute() { p } else { base_dir.join(p) };
            let file = load_game(&full)?;
            (file.game, file.qre, None)
        }
        (Some(GameRef::Inline(raw_game)), None) => {
            let file = raw_game.build()?;
            (file.game, file.qre, None)
        }
        (None, Some(ab)) => {
            let (g, reform) = abstract_reform(&ab.status_quo, &ab.reform)?;
            (g, QreSection::default(), Some(reform))
        }
    };
    let qre_section = match &raw.qre {
        Some(q) => game_qre.merged(q),
        None => game_qre,
    };
    let mut selection = Selection::new(qre_section.resolve(&game)?);
    if let Some(s) = &raw.selection {
        s.apply(&mut selection)?;
    }

    let m = game.num_players();
    let is_vote = !matches!(raw.rule, RuleSection::Table { .. });
    let meta_actions: Vec<Vec<String>> = match &raw.meta_actions {
        Some(map) => {
            for key in map.keys() {
                game.player_index(key)?;
            }
            game.players()
                .iter()
                .map(|p| map.get(p).cloned().ok_or_else(|| domain(format!("meta-actions missing for player `{p}`"))))
                .collect::<Result<_>>()?
        }
        None if is_vote => vec![vec![APPROVE.to_string(), REJECT.to_string()]; m],
        None => return Err(Error::Input("table rules need `meta_actions`".into())),
    };
    let env_moves = match &raw.environment {
        Some(e) => e.moves.clone(),
        None => vec!["none".to_string()],
    };

    let total = meta_actions
        .iter()
        .map(Vec::len)
        .chain(std::iter::once(env_moves.len()))
        .try_fold(1usize, |acc, n| acc.checked_mul(n))
        .ok_or(Error::Capacity { profiles: u128::MAX, limit: usize::MAX as u128 })?;

    let rule = match raw.rule {
        RuleSection::Unanimity { reform } => {
            Rule::Vote { reform: vote_reform(reform, &abstract_reform_images)?, threshold: Threshold::Unanimity }
        }
        RuleSection::Majority { threshold, reform } => {
            Rule::Vote { reform: vote_reform(reform, &abstract_reform_images)?, threshold: Threshold::AtLeast(threshold) }
        }
        RuleSection::Table { entries, default } => {
            let mut images: Vec<Option<Vec<Transformation>>> = vec![None; total];
            for e in entries {
                let k = index_of_table(&meta_actions, &env_moves, &game, &e.profile, &e.env)?;
                if images[k].replace(e.transformations).is_some() {
                    return Err(Error::Input(format!("duplicate rule entry for {:?}", e.profile)));
                }
            }
            Rule::Table(images.into_iter().map(|x| x.unwrap_or_else(|| default.clone())).collect())
        }
    };

    let env_payoff = match raw.environment.as_ref().and_then(|e| e.payoffs.as_ref()) {
        Some(list) => {
            let mut out: Vec<Option<f64>> = vec![None; total];
            for pv in list {
                let k = index_of_table(&meta_actions, &env_moves, &game, &pv.profile, &pv.env)?;
                if out[k].replace(pv.value).is_some() {
                    return Err(Error::Input(format!("duplicate environment payoff for {:?}", pv.profile)));
                }
            }
            Some(
                out.into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::NotTotal("environment payoffs must cover every meta-profile".into()))?,
            )
        }
        None => None,
    };

    let costs = match raw.costs {
        None | Some(CostSection::Zero) => Costs::Zero,
        Some(CostSection::Implementation { values }) => Costs::Implementation(per_player(&game, &values, 0.0)?),
        Some(CostSection::PerAction { values }) => {
            for key in values.keys() {
                game.player_index(key)?;
            }
            let rows = (0..m)
                .map(|i| {
                    let own = values.get(game.player_label(i));
                    if let Some(own) = own {
                        for a in own.keys() {
                            if !meta_actions[i].contains(a) {
                                return Err(domain(format!("unknown meta-action `{a}` in costs")));
                            }
                        }
                    }
                    Ok(meta_actions[i]
                        .iter()
                        .map(|a| own.and_then(|o| o.get(a)).copied().unwrap_or(0.0))
                        .collect())
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            Costs::PerAction(rows)
        }
        Some(CostSection::Table { entries }) => {
            let mut rows = vec![vec![0.0; m]; total];
            let mut seen = vec![false; total];
            for e in entries {
                let k = index_of_table(&meta_actions, &env_moves, &game, &e.profile, &e.env)?;
                if std::mem::replace(&mut seen[k], true) {
                    return Err(Error::Input(format!("duplicate cost entry for {:?}", e.profile)));
                }
                rows[k] = per_player(&game, &e.values, 0.0)?;
            }
            Costs::Table(rows)
        }
    };

    let mut weights = vec![vec![0.0; m]; m];
    for (from, row) in &raw.weights {
        let i = game.player_index(from)?;
        for (to, w) in row {
            let j = game.player_index(to)?;
            if i == j {
                return Err(domain(format!("self-weight for player `{from}` is not allowed")));
            }
            weights[i][j] = *w;
        }
    }

    MetaGame::with_environment_moves(game, meta_actions, env_moves, env_payoff, rule, selection)?
        .with_costs(costs)?
        .with_weights(weights)
}

pub fn load_meta(path: &Path) -> Result<MetaGame> {
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_meta(&read(path)?, path, base)
}

fn vote_reform(given: Option<Vec<Transformation>>, from_abstract: &Option<Vec<Transformation>>) -> Result<Vec<Transformation>> {
    match (given, from_abstract) {
        (Some(_), Some(_)) => Err(Error::Input("`abstract_reform` already defines the reform".into())),
        (Some(r), None) => Ok(r),
        (None, Some(r)) => Ok(r.clone()),
        (None, None) => Err(Error::Input("missing field `reform`".into())),
    }
}

fn per_player(game: &Game, values: &BTreeMap<String, f64>, missing: f64) -> Result<Vec<f64>> {
    for key in values.keys() {
        game.player_index(key)?;
    }
    Ok(game.players().iter().map(|p| values.get(p).copied().unwrap_or(missing)).collect())
}

/// Mixed-radix index of a labeled meta-profile (players first, environment
/// last), matching [`MetaGame::profile_index`].
fn index_of_table(
    meta_actions: &[Vec<String>],
    env_moves: &[String],
    game: &Game,
    profile: &BTreeMap<String, String>,
    env: &Option<String>,
) -> Result<usize> {
    if profile.len() != game.num_players() {
        return Err(domain(format!("meta-profile {profile:?} must name every player once")));
    }
    let mut index = 0usize;
    for (i, p) in game.players().iter().enumerate() {
        let label = profile.get(p).ok_or_else(|| domain(format!("meta-profile {profile:?} misses player `{p}`")))?;
        let a = meta_actions[i]
            .iter()
            .position(|x| x == label)
            .ok_or_else(|| domain(format!("unknown meta-action `{label}` for player `{p}`")))?;
        index = index * meta_actions[i].len() + a;
    }
    let e = match env {
        Some(label) => env_moves
            .iter()
            .position(|x| x == label)
            .ok_or_else(|| domain(format!("unknown environment move `{label}`")))?,
        None if env_moves.len() == 1 => 0,
        None => return Err(domain("entries must name the environment move")),
    };
    Ok(index * env_moves.len() + e)
}
