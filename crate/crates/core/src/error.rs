use thiserror::Error;

/// Errors raised by game construction, solvers and the meta layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A player, action or parameter outside the valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A payoff table or extension does not cover every profile.
    #[error("payoff table is not total: {0}")]
    NotTotal(String),

    /// Deleting the last remaining action of a player.
    #[error("infeasible transformation: player `{player}` would be left without actions")]
    Infeasible { player: String },

    /// Adding an action whose label already exists.
    #[error("action `{action}` already exists for player `{player}`")]
    Collision { player: String, action: String },

    /// Non-finite values where finite reals are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A hypothesis required by the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The meta-profile space is larger than the enumeration guard allows.
    #[error("meta-profile space has {profiles} profiles, above the limit of {limit}")]
    Capacity { profiles: u128, limit: u128 },

    /// The inner equilibrium solve did not converge for a meta-profile.
    #[error("inner solve did not converge at meta-profile {profile} (residual {residual:e})")]
    NotConverged { profile: String, residual: f64 },

    /// Malformed configuration input.
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
