//! Exact minimax regret and pseudoregret of the symmetric two-armed
//! Bernoulli bandit, together with the closed-form parabolic-PDE solutions
//! that approximate them.
//!
//! Rewards are centered to `{-1, +1}`; arm means are `+ε` (safe) and `-ε`
//! (risky). Time runs over the nonpositive integers `-T, ..., -1, 0`.
//!
//! * [`game`]: domain types and the terminal payoff.
//! * [`special`]: error function family and the heat kernel.
//! * [`env`]: reward sampling, state transitions, episode logs.
//! * [`strategy`]: the myopic player, baselines, brute-force minimax oracle.
//! * [`dp`]: backward-induction value functions under the myopic player.
//! * [`pde`]: closed-form PDE solutions, prefactors and residual checks.
//! * [`experiments`]: Monte Carlo, convergence sweeps, scaling fits, figure data.

pub mod dp;
pub mod env;
pub mod error;
pub mod experiments;
pub mod game;
pub mod optimize;
pub mod pde;
pub mod quadrature;
pub mod special;
pub mod strategy;

pub use error::{Error, Result};
pub use game::{terminal_payoff, Arm, GameParams, PseudoState, RegretState};

/// Crate version embedded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
