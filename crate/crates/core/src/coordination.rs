//! Closed-form pieces of the binary coordination model: payoff gap,
//! critical tax, welfare accounting, tax sweeps and the tax-versus-deletion
//! comparison.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::qre::{solve_binary, BinaryCoordParams, BinaryOptions};

/// `alpha - kappa - p (alpha + gamma) + t`.
pub fn delta(params: &BinaryCoordParams, p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(params.delta(p))
}

/// Tax at which the symmetric equilibrium puts probability 1/2 on the
/// status quo: `kappa - (alpha - gamma) / 2`. Negative values are returned
/// as-is.
pub fn critical_tax(params: &BinaryCoordParams) -> f64 {
    params.kappa - (params.alpha() - params.gamma()) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WelfareMode {
    /// Expected payoff net of switching cost and tax burden.
    #[default]
    ExpectedFull,
    /// Expected game payoff only.
    ExpectedGame,
    /// `ExpectedFull` with tax revenue returned lump-sum.
    RevenueRecycled,
}

impl FromStr for WelfareMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected-full" => Ok(Self::ExpectedFull),
            "expected-game" => Ok(Self::ExpectedGame),
            "revenue-recycled" => Ok(Self::RevenueRecycled),
            other => Err(domain(format!(
                "unknown welfare mode `{other}` (expected-full, expected-game, revenue-recycled)"
            ))),
        }
    }
}

impl fmt::Display for WelfareMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExpectedFull => "expected-full",
            Self::ExpectedGame => "expected-game",
            Self::RevenueRecycled => "revenue-recycled",
        })
    }
}

/// Per-player welfare when both players play `X` with probability `p`
/// under the tax in `params`.
pub fn welfare(params: &BinaryCoordParams, p: f64, mode: WelfareMode) -> Result<f64> {
    check_probability(p)?;
    let q = 1.0 - p;
    let game = p * p * params.a + p * q * (params.c + params.d) + q * q * params.b;
    Ok(match mode {
        WelfareMode::ExpectedGame => game,
        WelfareMode::ExpectedFull => game - q * params.kappa - p * params.tax,
        WelfareMode::RevenueRecycled => game - q * params.kappa,
    })
}

/// Welfare once `X` is deleted: both players coordinate on `Y` and the
/// forced move carries no switching cost.
pub fn deletion_welfare(params: &BinaryCoordParams) -> f64 {
    params.b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Tax(f64),
    Deletion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub regime: Regime,
    /// Equilibrium probability of the status-quo action.
    pub p: f64,
    pub sw: f64,
    pub fixed_point_count: usize,
}

/// Equilibrium status-quo probability and welfare for each tax, optionally
/// followed by a deletion row. `params.tax` is ignored.
pub fn sweep_tax(
    params: &BinaryCoordParams,
    taxes: &[f64],
    include_deletion: bool,
    mode: WelfareMode,
    opts: &BinaryOptions,
) -> Result<Vec<SweepRow>> {
    params.validate()?;
    if let Some(t) = taxes.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(domain(format!("taxes must be finite and nonnegative, got {t}")));
    }
    if taxes.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("taxes must be sorted in ascending order"));
    }
    let mut rows = taxes
        .par_iter()
        .map(|&t| {
            let taxed = params.with_tax(t);
            let res = solve_binary(&taxed, 0.5, opts)?;
            if !res.converged {
                return Err(Error::Numeric(format!(
                    "no converged equilibrium at tax {t} (residual {:e})",
                    res.residual
                )));
            }
            Ok(SweepRow {
                regime: Regime::Tax(t),
                p: res.p,
                sw: welfare(&taxed, res.p, mode)?,
                fixed_point_count: res.fixed_point_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if include_deletion {
        rows.push(SweepRow { regime: Regime::Deletion, p: 0.0, sw: deletion_welfare(params), fixed_point_count: 1 });
    }
    Ok(rows)
}

/// Uniform grid of taxes on `[0, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxGrid {
    pub max: f64,
    pub points: usize,
}

impl Default for TaxGrid {
    fn default() -> Self {
        Self { max: 100.0, points: 1001 }
    }
}

impl TaxGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !self.max.is_finite() || self.max <= 0.0 {
            return Err(domain("tax grid needs at least 2 points and a positive finite maximum"));
        }
        Ok((0..self.points).map(|k| self.max * k as f64 / (self.points - 1) as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentVerdict {
    /// `b - deletion_cost`.
    pub deletion_net: f64,
    /// Tax maximizing `welfare(p_t) - tax_cost(t)` on the grid.
    pub best_tax: f64,
    pub best_tax_net: f64,
    /// Status-quo probability at the best tax; positive for every finite tax.
    pub best_tax_p: f64,
    /// Deletion dominates when its cost is below this value.
    pub cost_threshold: f64,
    pub deletion_dominates: bool,
}

/// Compares deletion at `deletion_cost` (may be `+inf`) with the best tax
/// on `grid`, where taxing at `t` costs `tax_cost(t)`.
pub fn tax_vs_deletion_threshold<F>(
    params: &BinaryCoordParams,
    deletion_cost: f64,
    tax_cost: F,
    mode: WelfareMode,
    grid: TaxGrid,
    opts: &BinaryOptions,
) -> Result<InstrumentVerdict>
where
    F: Fn(f64) -> f64 + Sync,
{
    params.validate()?;
    if !params.is_contraction() {
        return Err(Error::Precondition(format!(
            "the welfare-of-tax curve needs beta*(alpha+gamma) < 4, got {}",
            params.contraction_factor()
        )));
    }
    if deletion_cost.is_nan() || deletion_cost < 0.0 {
        return Err(domain(format!("deletion cost must be nonnegative, got {deletion_cost}")));
    }
    let taxes = grid.values()?;
    let rows = sweep_tax(params, &taxes, false, mode, opts)?;
    let mut best: Option<(f64, f64, f64)> = None;
    for row in &rows {
        let Regime::Tax(t) = row.regime else { continue };
        let net = row.sw - tax_cost(t);
        if net.is_nan() {
            return Err(Error::Numeric(format!("tax cost at {t} is not a number")));
        }
        if best.is_none_or(|(_, b, _)| net > b) {
            best = Some((t, net, row.p));
        }
    }
    let (best_tax, best_tax_net, best_tax_p) = best.expect("grid has at least two points");
    let deletion_net = deletion_welfare(params) - deletion_cost;
    Ok(InstrumentVerdict {
        deletion_net,
        best_tax,
        best_tax_net,
        best_tax_p,
        cost_threshold: deletion_welfare(params) - best_tax_net,
        deletion_dominates: deletion_net > best_tax_net,
    })
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}
