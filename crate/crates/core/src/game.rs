//! Domain types of the centered symmetric two-armed game and its terminal
//! payoff.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_gap, check_horizon, Error, Result};

/// Arm index. Arm 1 is the safe arm unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    One,
    Two,
}

impl Arm {
    pub fn index(self) -> u8 {
        match self {
            Arm::One => 1,
            Arm::Two => 2,
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::One => Arm::Two,
            Arm::Two => Arm::One,
        }
    }

    pub fn from_index(i: u8) -> Result<Arm> {
        match i {
            1 => Ok(Arm::One),
            2 => Ok(Arm::Two),
            _ => Err(Error::Parse(format!("arm index must be 1 or 2, got {i}"))),
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Horizon `T`, gap `ε` and the derived regime parameter `γ = ε√T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameParams {
    horizon: u64,
    gap: f64,
    gamma: f64,
}

impl GameParams {
    pub fn new(horizon: u64, gap: f64) -> Result<Self> {
        check_horizon(horizon)?;
        check_gap(gap)?;
        Ok(Self {
            horizon,
            gap,
            gamma: gap * (horizon as f64).sqrt(),
        })
    }

    /// `ε = γ/√T`.
    pub fn from_gamma(horizon: u64, gamma: f64) -> Result<Self> {
        check_horizon(horizon)?;
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::InvalidGamma(gamma));
        }
        Self::new(horizon, gamma / (horizon as f64).sqrt())
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// State of the regret game: `η = Σ(g₁+g₂-2g_I)`, the hidden and revealed
/// reward differences, and the time index `t ∈ [-T, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RegretState {
    pub eta: i64,
    pub xi_h: i64,
    pub xi_r: i64,
    pub t: i64,
}

impl RegretState {
    pub fn origin(horizon: u64) -> Self {
        Self {
            eta: 0,
            xi_h: 0,
            xi_r: 0,
            t: -(horizon as i64),
        }
    }

    /// `ζ = ξʳ + ξʰ = x₁ - x₂`.
    pub fn zeta(&self) -> i64 {
        self.xi_r + self.xi_h
    }

    pub fn payoff(&self) -> f64 {
        terminal_payoff(self.eta, self.xi_h, self.xi_r)
    }
}

/// State of the pseudoregret game: revealed difference and risky-arm pulls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PseudoState {
    pub xi_r: i64,
    pub s2: u64,
    pub t: i64,
}

/// `μ(η, ξ) = ½(η + |ξʳ + ξʰ|)`, the larger of the two accumulated regrets.
pub fn terminal_payoff(eta: i64, xi_h: i64, xi_r: i64) -> f64 {
    0.5 * (eta as f64 + (xi_r + xi_h).abs() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn payoff_examples() {
        assert_eq!(terminal_payoff(0, 0, 0), 0.0);
        assert_eq!(terminal_payoff(2, 1, 1), 2.0);
        assert_eq!(terminal_payoff(-2, 3, -1), 0.0);
    }

    #[test]
    fn params_validate_and_derive_gamma() {
        let p = GameParams::new(400, 0.035).unwrap();
        assert_eq!(p.gamma(), 0.035 * 20.0);
        let q = GameParams::from_gamma(400, 0.707).unwrap();
        assert!((q.gap() - 0.707 / 20.0).abs() < 1e-17);
        assert!(GameParams::new(0, 0.1).is_err());
        assert!(GameParams::new(5, 1.0).is_err());
        assert!(GameParams::new(5, -0.1).is_err());
        assert!(GameParams::from_gamma(4, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn payoff_is_linear_in_eta(eta in -50i64..50, c in -50i64..50, xh in -30i64..30, xr in -30i64..30) {
            let lhs = terminal_payoff(eta + c, xh, xr);
            let rhs = terminal_payoff(eta, xh, xr) + c as f64 / 2.0;
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn payoff_is_even_in_xi(eta in -50i64..50, xh in -30i64..30, xr in -30i64..30) {
            prop_assert_eq!(terminal_payoff(eta, xh, xr), terminal_payoff(eta, -xh, -xr));
        }
    }
}
