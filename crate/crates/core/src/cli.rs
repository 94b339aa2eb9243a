//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for malformed input, 2 for numeric or
//! capacity failures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::{self, parse_table_config, QreSection, TableConfig};
use crate::coordination::{critical_tax, sweep_tax, Regime, SweepRow, WelfareMode};
use crate::error::{Error, Result};
use crate::metagame::{check_blocking, check_reform_supportable, MetaAnalysis, MetaGame, Rule, Threshold, DEFAULT_MAX_PROFILES};
use crate::qre::{
    comparative_statics, finite_difference_statics, select_equilibrium, BinaryCoordParams, BinaryOptions,
    MultiplicityPolicy, QreConfig, Selection,
};
use crate::svg::tax_chart;
use crate::transform::{PayoffAdjustment, Transformation};

/// Environment variable overriding the meta-profile enumeration limit.
pub const MAX_PROFILES_ENV: &str = "METAGAME_MAX_PROFILES";

const TABLE_CONFIG: &str = include_str!("../configs/coordination_table.json");
const FD_STEP: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(name = "qresb", version, about = "Logit QRE with status-quo bias, game transformations and meta-games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the selected equilibrium of a game file.
    Solve(SolveArgs),
    /// Sweep taxes in the binary coordination model.
    SweepTax(SweepArgs),
    /// Analytic and finite-difference sensitivities of the binary model.
    ComparativeStatics(StaticsArgs),
    /// Enumerate pure Meta-Nash and Hyper-Meta-Nash profiles.
    Meta(MetaArgs),
    /// Reproduce the coordination table and figure from the shipped config.
    ReproduceTable(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Lowest,
    Highest,
    NearestToInit,
}

impl From<PolicyArg> for MultiplicityPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Lowest => Self::Lowest,
            PolicyArg::Highest => Self::Highest,
            PolicyArg::NearestToInit => Self::NearestToInit,
        }
    }
}

/// Numeric overrides shared by the solver commands; they take precedence
/// over values read from files.
#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// Precision (all players).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Switching cost (all players).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Grid size for root bracketing.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Root reported when the equilibrium is not certified unique.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
}

impl Overrides {
    fn check(&self) -> Result<()> {
        for (name, v) in [("beta", self.beta), ("kappa", self.kappa)] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Input(format!("--{name} must be finite and >= 0, got {v}")));
                }
            }
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Input(format!("--tol must be positive, got {t}")));
            }
        }
        if matches!(self.grid, Some(g) if g < 2) {
            return Err(Error::Input("--grid must be at least 2".into()));
        }
        Ok(())
    }

    fn binary_options(&self) -> BinaryOptions {
        let mut opts = BinaryOptions::default();
        if let Some(t) = self.tol {
            opts.tol = t;
        }
        if let Some(n) = self.max_iter {
            opts.max_iter = n;
        }
        if let Some(g) = self.grid {
            opts.grid_size = g;
        }
        if let Some(p) = self.policy {
            opts.policy = p.into();
        }
        opts
    }

    fn apply_binary(&self, mut params: BinaryCoordParams) -> Result<BinaryCoordParams> {
        if let Some(b) = self.beta {
            params.beta = b;
        }
        if let Some(k) = self.kappa {
            params.kappa = k;
        }
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Game file (JSON).
    #[arg(long)]
    pub game: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Tax on every player's default action.
    #[arg(long)]
    pub tax: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

/// Comma-separated tax list; the empty string is the empty list.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxList(pub Vec<f64>);

fn parse_tax_list(s: &str) -> std::result::Result<TaxList, String> {
    if s.trim().is_empty() {
        return Ok(TaxList(Vec::new()));
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("invalid tax `{x}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(TaxList)
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Binary parameter file or symmetric 2x2 game file (JSON).
    #[arg(long)]
    pub game: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Single tax, used when --taxes is absent.
    #[arg(long)]
    pub tax: Option<f64>,
    /// Ascending taxes, e.g. 0,0.5,1.
    #[arg(long, value_parser = parse_tax_list, allow_hyphen_values = true)]
    pub taxes: Option<TaxList>,
    /// Append the deletion row.
    #[arg(long)]
    pub deletion: bool,
    #[arg(long, default_value = "expected-full")]
    pub welfare: WelfareMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Also write an SVG chart of p against t (needs --out).
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StaticsArgs {
    /// Binary parameter file or symmetric 2x2 game file (JSON).
    #[arg(long)]
    pub game: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long)]
    pub tax: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct MetaArgs {
    /// Meta-game file (JSON).
    #[arg(long)]
    pub meta: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Directory receiving table.csv, and figure.svg with --svg.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long)]
    pub svg: bool,
}

/// Runs the tool on the process arguments and returns the exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Runs the tool on explicit arguments (the first is the program name).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut stdout = String::new();
    match dispatch(&cli.command, &mut stdout) {
        Ok(code) => {
            print!("{stdout}");
            code
        }
        Err(e) => {
            print!("{stdout}");
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric(_) | Error::NotConverged { .. } | Error::Capacity { .. } | Error::Precondition(_) => 2,
        Error::Domain(_)
        | Error::NotTotal(_)
        | Error::Input(_)
        | Error::Infeasible { .. }
        | Error::Collision { .. } => 1,
    }
}

fn dispatch(command: &Command, out: &mut String) -> Result<i32> {
    match command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::SweepTax(a) => cmd_sweep_tax(a, out),
        Command::ComparativeStatics(a) => cmd_statics(a, out),
        Command::Meta(a) => cmd_meta(a, out),
        Command::ReproduceTable(a) => cmd_reproduce(a, out),
    }
}

/// Seventeen significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn check_tax(t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Input(format!("--tax must be finite and >= 0, got {t}")));
    }
    Ok(t)
}

fn cmd_solve(args: &SolveArgs, out: &mut String) -> Result<i32> {
    args.overrides.check()?;
    let file = config::load_game(&args.game)?;
    let mut section = file.qre.clone();
    let forced = QreSection {
        beta: args.overrides.beta.map(config::PerPlayer::All),
        kappa: args.overrides.kappa.map(config::PerPlayer::All),
        default: None,
    };
    section = section.merged(&forced);
    let cfg = section.resolve(&file.game)?;
    let tax = args.tax.map(check_tax).transpose()?.unwrap_or(0.0);
    let game = if tax != 0.0 {
        let adjustments = file
            .game
            .players()
            .iter()
            .zip(&cfg.default_action)
            .map(|(p, a)| PayoffAdjustment { player: p.clone(), action: a.clone(), amount: -tax })
            .collect();
        Transformation::PriceOnly { adjustments }.apply(&file.game)?
    } else {
        file.game.clone()
    };
    let mut sel = Selection::new(cfg.clone());
    let opts = args.overrides.binary_options();
    sel.tol = opts.tol;
    sel.max_iter = opts.max_iter;
    sel.grid_size = opts.grid_size;
    sel.policy = opts.policy;
    let res = select_equilibrium(&game, &sel)?;

    let echo = config_echo_qre(&game, &cfg, tax, &sel);
    match args.format {
        Format::Csv => {
            let _ = writeln!(out, "# {echo}");
            let _ = writeln!(out, "# residual={} iterations={} converged={} unique_certified={}", num(res.residual), res.iterations, res.converged, res.unique_certified);
            let _ = writeln!(out, "player,action,probability");
            for i in 0..game.num_players() {
                for (a, label) in game.actions(i).iter().enumerate() {
                    let _ = writeln!(out, "{},{},{}", game.player_label(i), label, num(res.profile.probs(i)[a]));
                }
            }
        }
        Format::Table => {
            let _ = writeln!(out, "config: {echo}");
            for i in 0..game.num_players() {
                let cells: Vec<String> = game
                    .actions(i)
                    .iter()
                    .enumerate()
                    .map(|(a, label)| format!("{label}={:.6}", res.profile.probs(i)[a]))
                    .collect();
                let _ = writeln!(out, "player {}: {}", game.player_label(i), cells.join("  "));
            }
            let _ = writeln!(out, "residual: {:e}", res.residual);
            let _ = writeln!(out, "iterations: {}", res.iterations);
            let _ = writeln!(out, "converged: {}", res.converged);
            let _ = writeln!(out, "unique (contraction certificate): {}", res.unique_certified);
        }
    }
    if let Some(dir) = &args.out {
        let probs: serde_json::Map<String, serde_json::Value> = (0..game.num_players())
            .map(|i| {
                let row: serde_json::Map<String, serde_json::Value> = game
                    .actions(i)
                    .iter()
                    .enumerate()
                    .map(|(a, label)| (label.clone(), json!(res.profile.probs(i)[a])))
                    .collect();
                (game.player_label(i).to_string(), serde_json::Value::Object(row))
            })
            .collect();
        let doc = json!({
            "config": {
                "beta": cfg.beta,
                "kappa": cfg.kappa,
                "default": cfg.default_action,
                "tax": tax,
                "tol": sel.tol,
                "max_iter": sel.max_iter,
                "policy": sel.policy,
            },
            "profile": probs,
            "residual": res.residual,
            "iterations": res.iterations,
            "converged": res.converged,
            "unique_certified": res.unique_certified,
        });
        write_file(dir, "solve.json", &(serde_json::to_string_pretty(&doc).expect("json value") + "\n"))?;
    }
    if !res.converged {
        eprintln!("error: no convergence within {} iterations (residual {:e})", res.iterations, res.residual);
        return Ok(2);
    }
    Ok(0)
}

fn config_echo_qre(game: &crate::Game, cfg: &QreConfig, tax: f64, sel: &Selection) -> String {
    let players: Vec<String> = (0..game.num_players())
        .map(|i| format!("{}:beta={},kappa={},default={}", game.player_label(i), cfg.beta[i], cfg.kappa[i], cfg.default_action[i]))
        .collect();
    format!(
        "{} tax={} tol={:e} max_iter={} grid={} policy={:?}",
        players.join(" "),
        tax,
        sel.tol,
        sel.max_iter,
        sel.grid_size,
        sel.policy
    )
}

fn binary_echo(p: &BinaryCoordParams, opts: &BinaryOptions) -> String {
    format!(
        "a={} b={} c={} d={} kappa={} beta={} tol={:e} max_iter={} grid={} policy={:?}",
        p.a, p.b, p.c, p.d, p.kappa, p.beta, opts.tol, opts.max_iter, opts.grid_size, opts.policy
    )
}

fn load_binary_with(path: &Path, overrides: &Overrides, tax: Option<f64>) -> Result<BinaryCoordParams> {
    overrides.check()?;
    let mut params = overrides.apply_binary(config::load_binary(path)?)?;
    if let Some(t) = tax {
        params.tax = check_tax(t)?;
    }
    Ok(params)
}

fn cmd_sweep_tax(args: &SweepArgs, out: &mut String) -> Result<i32> {
    let params = load_binary_with(&args.game, &args.overrides, args.tax)?;
    if args.svg && args.out.is_none() {
        return Err(Error::Input("--svg needs --out".into()));
    }
    let taxes = match &args.taxes {
        Some(list) => list.0.clone(),
        None => vec![params.tax],
    };
    if taxes.windows(2).any(|w| w[1] < w[0] || w[0].is_nan() || w[1].is_nan()) {
        return Err(Error::Input("--taxes must be in ascending order".into()));
    }
    let opts = args.overrides.binary_options();
    let rows = sweep_tax(&params, &taxes, args.deletion, args.welfare, &opts)?;
    let echo = format!("{} welfare={}", binary_echo(&params, &opts), args.welfare);
    let t_bar = critical_tax(&params);
    let text = match args.format {
        Format::Csv => sweep_csv(&echo, t_bar, &rows),
        Format::Table => sweep_table(&echo, t_bar, &rows),
    };
    out.push_str(&text);
    if let Some(dir) = &args.out {
        write_file(dir, "sweep.csv", &sweep_csv(&echo, t_bar, &rows))?;
        if args.svg {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| match r.regime {
                    Regime::Tax(t) => Some((t, r.p)),
                    Regime::Deletion => None,
                })
                .collect();
            write_file(dir, "sweep.svg", &tax_chart(&points, Some(t_bar), "Equilibrium status-quo probability"))?;
        }
    }
    Ok(0)
}

/// CSV with comment lines for the configuration and the critical tax.
pub fn sweep_csv(echo: &str, t_bar: f64, rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {echo}");
    let _ = writeln!(s, "# critical_tax={}", num(t_bar));
    s.push_str("t,p,sw,fixed_points\n");
    for r in rows {
        let t = match r.regime {
            Regime::Tax(t) => num(t),
            Regime::Deletion => "deletion".into(),
        };
        let _ = writeln!(s, "{t},{},{},{}", num(r.p), num(r.sw), r.fixed_point_count);
    }
    s
}

/// Two-decimal layout with columns t, p_t and SW.
pub fn sweep_table(echo: &str, t_bar: f64, rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config: {echo}");
    let _ = writeln!(s, "critical tax: {t_bar:.4}");
    let _ = writeln!(s, "{:<10} {:>6} {:>6}", "t", "p_t", "SW");
    for r in rows {
        let t = match r.regime {
            Regime::Tax(t) => format!("{t}"),
            Regime::Deletion => "deletion".into(),
        };
        let _ = writeln!(s, "{t:<10} {:>6.2} {:>6.2}", r.p, r.sw);
    }
    s
}

fn cmd_statics(args: &StaticsArgs, out: &mut String) -> Result<i32> {
    let params = load_binary_with(&args.game, &args.overrides, args.tax)?;
    if !params.is_contraction() {
        return Err(Error::Precondition(format!(
            "beta*(alpha+gamma) = {} >= 4, the equilibrium is not certified unique",
            params.beta * (params.alpha() + params.gamma())
        )));
    }
    let analytic = comparative_statics(&params)?;
    let fd = finite_difference_statics(&params, FD_STEP)?;
    let names = ["dp/dkappa", "dp/dt", "dp/dalpha", "dp/dgamma"];
    let signs = [1.0, -1.0, -1.0, 1.0];
    let opts = args.overrides.binary_options();
    let echo = format!("{} tax={} h={:e}", binary_echo(&params, &opts), params.tax, FD_STEP);
    let mut rows = Vec::new();
    let mut all_pass = true;
    for k in 0..4 {
        let (a, f) = (analytic.as_array()[k], fd.as_array()[k]);
        let rel = if a == 0.0 && f == 0.0 { 0.0 } else { (a - f).abs() / a.abs().max(f.abs()) };
        let verdict = if a == 0.0 && params.beta == 0.0 {
            "degenerate PASS"
        } else if a * signs[k] > 0.0 {
            "PASS"
        } else {
            all_pass = false;
            "FAIL"
        };
        rows.push((names[k], a, f, rel, if signs[k] > 0.0 { "+" } else { "-" }, verdict));
    }
    let mut text = String::new();
    match args.format {
        Format::Csv => {
            let _ = writeln!(text, "# {echo}");
            let _ = writeln!(text, "# p_star={}", num(analytic.p_star));
            text.push_str("derivative,analytic,finite_difference,relative_error,expected_sign,verdict\n");
            for (n, a, f, r, s, v) in &rows {
                let _ = writeln!(text, "{n},{},{},{},{s},{v}", num(*a), num(*f), num(*r));
            }
        }
        Format::Table => {
            let _ = writeln!(text, "config: {echo}");
            let _ = writeln!(text, "p*: {:.12}", analytic.p_star);
            let _ = writeln!(text, "{:<10} {:>16} {:>16} {:>10} {:>4}  verdict", "derivative", "analytic", "finite-diff", "rel-err", "sign");
            for (n, a, f, r, s, v) in &rows {
                let _ = writeln!(text, "{n:<10} {a:>16.9e} {f:>16.9e} {r:>10.2e} {s:>4}  {v}");
            }
        }
    }
    out.push_str(&text);
    if let Some(dir) = &args.out {
        write_file(dir, "statics.txt", &text)?;
    }
    Ok(if all_pass { 0 } else { 2 })
}

fn max_profiles_from_env() -> Result<u128> {
    match std::env::var(MAX_PROFILES_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u128>()
            .map_err(|e| Error::Input(format!("{MAX_PROFILES_ENV}=`{v}`: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_PROFILES),
        Err(e) => Err(Error::Input(format!("{MAX_PROFILES_ENV}: {e}"))),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", cells.join(", "))
}

fn cmd_meta(args: &MetaArgs, out: &mut String) -> Result<i32> {
    let limit = max_profiles_from_env()?;
    let mg = config::load_meta(&args.meta)?.with_max_profiles(limit);
    let analysis = mg.analyze()?;
    let mut text = String::new();
    let sel = mg.selection();
    let echo = format!(
        "players={} meta_profiles={} rule={} beta={:?} kappa={:?} default={:?} policy={:?} max_profiles={limit}",
        mg.num_players(),
        mg.num_profiles(),
        rule_name(mg.rule()),
        sel.qre.beta,
        sel.qre.kappa,
        sel.qre.default_action,
        sel.policy
    );
    match args.format {
        Format::Csv => {
            let _ = writeln!(text, "# {echo}");
            text.push_str("set,profile,env,v,h\n");
            for (set, list) in [("meta-nash", &analysis.meta_nash), ("hyper-meta-nash", &analysis.hyper_meta_nash)] {
                for &k in list {
                    let o = &analysis.outcomes[k];
                    let v: Vec<String> = o.v.iter().map(|x| num(*x)).collect();
                    let h: Vec<String> = o.h.iter().map(|x| num(*x)).collect();
                    let _ = writeln!(
                        text,
                        "{set},{},{},{},{}",
                        mg.profile_labels(&o.profile).join(";"),
                        mg.env_moves()[o.profile.env],
                        v.join(";"),
                        h.join(";")
                    );
                }
            }
        }
        Format::Table => {
            let _ = writeln!(text, "config: {echo}");
            if !analysis.all_gamma_unique() {
                let _ = writeln!(text, "note: some inner equilibria are not certified unique; the selection policy applies");
            }
            listing(&mut text, &mg, &analysis, "Meta-Nash", &analysis.meta_nash);
            listing(&mut text, &mg, &analysis, "Hyper-Meta-Nash", &analysis.hyper_meta_nash);
            if matches!(mg.rule(), Rule::Vote { threshold: Threshold::Unanimity, .. }) {
                unanimity_report(&mut text, &mg);
            }
        }
    }
    out.push_str(&text);
    if let Some(dir) = &args.out {
        let entry = |k: usize| {
            let o = &analysis.outcomes[k];
            json!({
                "profile": mg.profile_labels(&o.profile),
                "env": mg.env_moves()[o.profile.env],
                "v": o.v,
                "h": o.h,
            })
        };
        let doc = json!({
            "config": echo,
            "meta_nash": analysis.meta_nash.iter().map(|&k| entry(k)).collect::<Vec<_>>(),
            "hyper_meta_nash": analysis.hyper_meta_nash.iter().map(|&k| entry(k)).collect::<Vec<_>>(),
        });
        write_file(dir, "meta.json", &(serde_json::to_string_pretty(&doc).expect("json value") + "\n"))?;
    }
    Ok(0)
}

fn rule_name(rule: &Rule) -> String {
    match rule {
        Rule::Vote { threshold: Threshold::Unanimity, .. } => "unanimity".into(),
        Rule::Vote { threshold: Threshold::AtLeast(k), .. } => format!("majority({k})"),
        Rule::Table(_) => "table".into(),
    }
}

fn listing(text: &mut String, mg: &MetaGame, analysis: &MetaAnalysis, title: &str, list: &[usize]) {
    let _ = writeln!(text, "{title} ({}):", list.len());
    for &k in list {
        let o = &analysis.outcomes[k];
        let _ = writeln!(text, "  {}  V={}  H={}", mg.describe(&o.profile), fmt_vec(&o.v), fmt_vec(&o.h));
    }
}

fn unanimity_report(text: &mut String, mg: &MetaGame) {
    let support = match check_reform_supportable(mg) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(text, "reform checks not applicable: {e}");
            return;
        }
    };
    let gains = support.gains();
    let labels = mg.base_game().players();
    match check_blocking(&gains, mg.weights()) {
        Ok(flags) => {
            for (i, blocks) in flags.iter().enumerate() {
                let spite: f64 = (0..gains.len()).filter(|&j| j != i).map(|j| mg.weights()[i][j] * gains[j]).sum();
                let _ = writeln!(
                    text,
                    "blocking, player {}: {} (sum_j w_ij g_j = {spite:.6}, -g_i = {:.6})",
                    labels[i],
                    if *blocks { "blocks" } else { "does not block" },
                    -gains[i]
                );
            }
        }
        Err(e) => {
            let _ = writeln!(text, "blocking check not applicable: {e}");
        }
    }
    for i in 0..gains.len() {
        let _ = writeln!(
            text,
            "reform support, player {}: gain {:.6}, cost difference {:.6}, stated condition {}, unilateral check {}",
            labels[i],
            gains[i],
            support.cost_differences[i],
            if support.stated_condition[i] { "holds" } else { "fails" },
            if support.exact_condition[i] { "holds" } else { "fails" }
        );
    }
    let _ = writeln!(
        text,
        "all-Approve is Meta-Nash: {}",
        if support.approve_all_is_meta_nash { "yes" } else { "no" }
    );
}

/// The shipped table configuration.
pub fn table_config() -> TableConfig {
    parse_table_config(TABLE_CONFIG, Path::new("configs/coordination_table.json")).expect("shipped config parses")
}

fn cmd_reproduce(args: &ReproduceArgs, out: &mut String) -> Result<i32> {
    args.overrides.check()?;
    let cfg = table_config();
    let params = args.overrides.apply_binary(cfg.params.params()?)?;
    let opts = args.overrides.binary_options();
    let rows = sweep_tax(&params, &cfg.taxes, cfg.deletion, cfg.welfare, &opts)?;
    let echo = format!("{} welfare={}", binary_echo(&params, &opts), cfg.welfare);
    let t_bar = critical_tax(&params);
    let text = match args.format {
        Format::Csv => sweep_csv(&echo, t_bar, &rows),
        Format::Table => sweep_table(&echo, t_bar, &rows),
    };
    out.push_str(&text);
    if let Some(dir) = &args.out {
        write_file(dir, "table.csv", &sweep_csv(&echo, t_bar, &rows))?;
        if args.svg {
            let n = cfg.figure.points;
            if n < 2 || cfg.figure.t_max.is_nan() || cfg.figure.t_max <= 0.0 {
                return Err(Error::Input("figure needs at least 2 points and a positive t_max".into()));
            }
            let grid: Vec<f64> = (0..n).map(|k| cfg.figure.t_max * k as f64 / (n - 1) as f64).collect();
            let dense = sweep_tax(&params, &grid, false, cfg.welfare, &opts)?;
            let points: Vec<(f64, f64)> = grid.iter().zip(&dense).map(|(&t, r)| (t, r.p)).collect();
            write_file(dir, "figure.svg", &tax_chart(&points, Some(t_bar), "Equilibrium status-quo probability"))?;
        }
    } else if args.svg {
        return Err(Error::Input("--svg needs --out".into()));
    }
    Ok(0)
}
