//! Solvers for interdependent-security population games.
//!
//! Agents are grouped into populations by node degree. Each population picks a
//! security investment; the risk it faces depends on its own investment and on
//! the vulnerability of a randomly chosen neighbor. This crate computes the
//! unique Nash equilibrium, the social optimum (as the equilibrium of a game
//! whose costs internalize the externality), the penalty schedule that aligns
//! the two, and degree-distribution sweeps over power-law censuses.
//!
//! Modules, bottom-up:
//!
//! - [`model`]: censuses, degree distributions, infection and exposure maps.
//! - [`response`]: a single agent's convex best response.
//! - [`equilibrium`]: the scalar fixed point in neighbor vulnerability.
//! - [`social`]: social cost, the modified game, KKT checks, penalties, PoA.
//! - [`dominance`]: stochastic-dominance tests and monotonicity sweeps.
//! - [`experiments`]: config-driven sweeps, CSV/JSON output and the CLI.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dominance;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod model;
pub mod response;
pub mod social;

pub use error::{Error, Result};
pub use model::{
    EquilibriumResult, ExposureModel, Game, GameParams, InfectionModel, PopulationVector,
    StrategyProfile,
};
