//! Quantal response equilibria with status-quo bias, game transformations
//! and equilibria of the meta-games they induce.
//!
//! - [`game`]: finite normal-form games, mixed profiles, pure Nash equilibria.
//! - [`qre`]: logit equilibria with switching costs, the binary coordination
//!   model and its comparative statics.
//! - [`transform`]: price, deletion, addition and replacement transformations.
//! - [`metagame`]: meta-games over transformations, Meta-Nash and
//!   Hyper-Meta-Nash enumeration, reform checks.
//! - [`coordination`]: critical tax, welfare, tax sweeps, tax versus deletion.

pub mod cli;
pub mod config;
pub mod coordination;
pub mod error;
pub mod game;
pub mod metagame;
pub mod qre;
pub mod svg;
pub mod transform;

pub use error::{Error, Result};
pub use game::{Game, MixedProfile};
