//! Player strategies and the brute-force minimax oracle.
//!
//! Strategies observe `(t, ξʳ)` only. [`brute_force_minimax`] searches every
//! table over that observable state on a probability grid and compares the
//! best worst-case regret with the myopic player's;
//! [`brute_force_minimax_full_history`] does the same over strategies that
//! may depend on the whole revealed history.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_gap, Error, Result};
use crate::game::{terminal_payoff, Arm};

/// Probability of pulling arm 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision(f64);

impl Decision {
    pub const ARM_ONE: Decision = Decision(1.0);
    pub const ARM_TWO: Decision = Decision(0.0);
    pub const COIN: Decision = Decision(0.5);

    pub fn new(p1: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p1) {
            Ok(Self(p1))
        } else {
            Err(Error::InvalidProbability(p1))
        }
    }

    pub fn p1(self) -> f64 {
        self.0
    }

    pub fn p2(self) -> f64 {
        1.0 - self.0
    }

    pub fn prob(self, arm: Arm) -> f64 {
        match arm {
            Arm::One => self.p1(),
            Arm::Two => self.p2(),
        }
    }
}

/// A player whose decision depends on the time index and the revealed
/// reward difference.
pub trait Strategy: Sync {
    fn decide(&self, t: i64, xi_r: i64) -> Decision;

    fn name(&self) -> String;
}

/// `p1 = 1` if `ξʳ > 0`, `½` if `ξʳ = 0`, `0` if `ξʳ < 0`.
pub fn myopic_decision(xi_r: i64) -> Decision {
    match xi_r.signum() {
        1 => Decision::ARM_ONE,
        0 => Decision::COIN,
        _ => Decision::ARM_TWO,
    }
}

/// `((1+ε)/(1-ε))^{ξʳ}`: how much likelier the revealed rewards are with arm 1
/// safe than with arm 2 safe.
pub fn likelihood_ratio(xi_r: i64, eps: f64) -> Result<f64> {
    check_gap(eps)?;
    let base = (1.0 + eps) / (1.0 - eps);
    let exp = i32::try_from(xi_r).map_err(|_| Error::Parse(format!("xi_r out of range: {xi_r}")))?;
    Ok(base.powi(exp))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Myopic;

impl Strategy for Myopic {
    fn decide(&self, _t: i64, xi_r: i64) -> Decision {
        myopic_decision(xi_r)
    }

    fn name(&self) -> String {
        "myopic".into()
    }
}

/// Pulls each arm with probability ½ every round.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl Strategy for Uniform {
    fn decide(&self, _t: i64, _xi_r: i64) -> Decision {
        Decision::COIN
    }

    fn name(&self) -> String {
        "uniform".into()
    }
}

/// A decision for every reachable `(t, ξʳ)` of a fixed horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularStrategy {
    horizon: u64,
    table: BTreeMap<(i64, i64), Decision>,
}

/// Reachable `(t, ξʳ)` pairs of a horizon, in time order.
pub fn observable_states(horizon: u64) -> impl Iterator<Item = (i64, i64)> {
    let h = horizon as i64;
    (0..h).flat_map(move |k| (0..=k).map(move |j| (k - h, 2 * j - k)))
}

impl TabularStrategy {
    pub fn new(horizon: u64, table: BTreeMap<(i64, i64), Decision>) -> Result<Self> {
        if let Some((t, xi_r)) = observable_states(horizon).find(|key| !table.contains_key(key)) {
            return Err(Error::MissingDecision { t, xi_r });
        }
        Ok(Self { horizon, table })
    }

    pub fn from_fn<F: Fn(i64, i64) -> Decision>(horizon: u64, f: F) -> Self {
        let table = observable_states(horizon).map(|(t, x)| ((t, x), f(t, x))).collect();
        Self { horizon, table }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Parses whitespace-separated `t xi_r p1` rows; `#` starts a comment.
    /// The horizon is the largest `-t` present.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `t xi_r p1`, got {raw:?}", lineno + 1));
            if cols.len() != 3 {
                return Err(bad());
            }
            let t: i64 = cols[0].parse().map_err(|_| bad())?;
            let xi_r: i64 = cols[1].parse().map_err(|_| bad())?;
            let p1: f64 = cols[2].parse().map_err(|_| bad())?;
            if t >= 0 {
                return Err(Error::NonNegativeTime(t as f64));
            }
            table.insert((t, xi_r), Decision::new(p1)?);
        }
        let horizon = table.keys().map(|&(t, _)| (-t) as u64).max().unwrap_or(0);
        if horizon == 0 {
            return Err(Error::Parse("empty strategy table".into()));
        }
        Self::new(horizon, table)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# t xi_r p1\n");
        for (&(t, xi_r), d) in &self.table {
            writeln!(out, "{t} {xi_r} {}", d.p1()).expect("writing to a String cannot fail");
        }
        out
    }
}

impl Strategy for TabularStrategy {
    fn decide(&self, t: i64, xi_r: i64) -> Decision {
        *self
            .table
            .get(&(t, xi_r))
            .unwrap_or_else(|| panic!("no decision for unreachable state (t = {t}, xi_r = {xi_r})"))
    }

    fn name(&self) -> String {
        format!("table(T={})", self.horizon)
    }
}

/// Optimizer of `min_{x, y ∈ [-½, ½]ᵈ} max(⟨x,a⟩+⟨y,b⟩, -⟨x,b⟩-⟨y,a⟩)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
}

/// The two branches `(⟨x,a⟩+⟨y,b⟩, -⟨x,b⟩-⟨y,a⟩)` of the pair objective.
pub fn pair_branches(x: &[f64], y: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
    (dot(x, a) + dot(y, b), -dot(x, b) - dot(y, a))
}

/// Solves the pair game coordinate-wise: push `x` down and `y` up where `a`
/// dominates, the reverse where `b` does, and pick `x = y = 0` on ties.
pub fn minimax_pair_solve(a: &[f64], b: &[f64]) -> Result<PairSolution> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .map(|(ai, bi)| match ai.total_cmp(bi) {
            std::cmp::Ordering::Greater => (-0.5, 0.5),
            std::cmp::Ordering::Equal => (0.0, 0.0),
            std::cmp::Ordering::Less => (0.5, -0.5),
        })
        .unzip();
    let (f, g) = pair_branches(&x, &y, a, b);
    Ok(PairSolution { x, y, value: f.max(g) })
}

/// Expected regret and pseudoregret of a strategy against a fixed safe arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactValue {
    pub regret: f64,
    pub pseudoregret: f64,
}

/// Exact expectation over the full outcome tree. `decide(k, xi_r, history)`
/// returns `p1` at round `k` (0-based); `history` is the base-4 code of the
/// revealed `(I, g_I)` sequence so far, most recent digit last.
fn evaluate_tree<D>(horizon: u64, eps: f64, safe: Arm, decide: &D) -> ExactValue
where
    D: Fn(u64, i64, u64) -> f64 + ?Sized,
{
    let p_win = |arm: Arm| if arm == safe { 0.5 * (1.0 + eps) } else { 0.5 * (1.0 - eps) };
    let (w1, w2) = (p_win(Arm::One), p_win(Arm::Two));
    let risky = safe.other();

    struct Acc {
        regret: f64,
        pulls: f64,
    }

    #[allow(clippy::too_many_arguments)]
    fn walk<D: Fn(u64, i64, u64) -> f64 + ?Sized>(
        k: u64,
        horizon: u64,
        (eta, xi_h, xi_r, s_risky): (i64, i64, i64, u64),
        history: u64,
        prob: f64,
        w: (f64, f64),
        risky: Arm,
        decide: &D,
        acc: &mut Acc,
    ) {
        if k == horizon {
            acc.regret += prob * terminal_payoff(eta, xi_h, xi_r);
            acc.pulls += prob * s_risky as f64;
            return;
        }
        let p1 = decide(k, xi_r, history);
        for (arm, p_arm) in [(Arm::One, p1), (Arm::Two, 1.0 - p1)] {
            if p_arm == 0.0 {
                continue;
            }
            for (g1, q1) in [(1i64, w.0), (-1, 1.0 - w.0)] {
                for (g2, q2) in [(1i64, w.1), (-1, 1.0 - w.1)] {
                    let chosen = if arm == Arm::One { g1 } else { g2 };
                    let (nxr, nxh) = match arm {
                        Arm::One => (xi_r + g1, xi_h - g2),
                        Arm::Two => (xi_r - g2, xi_h + g1),
                    };
                    let code = 2 * u64::from(arm == Arm::Two) + u64::from(chosen > 0);
                    let next = (eta + g1 + g2 - 2 * chosen, nxh, nxr, s_risky + u64::from(arm == risky));
                    walk(k + 1, horizon, next, history * 4 + code, prob * p_arm * q1 * q2, w, risky, decide, acc);
                }
            }
        }
    }

    let mut acc = Acc { regret: 0.0, pulls: 0.0 };
    walk(0, horizon, (0, 0, 0, 0), 0, 1.0, (w1, w2), risky, decide, &mut acc);
    ExactValue {
        regret: acc.regret,
        pseudoregret: 2.0 * eps * acc.pulls,
    }
}

/// Largest horizon [`exact_value`] will enumerate (`8^T` leaves).
pub const ENUMERATION_LIMIT: u64 = 7;

/// Exact regret and pseudoregret of any observable-state strategy by
/// enumerating every reward and choice sequence.
pub fn exact_value<S: Strategy + ?Sized>(strategy: &S, horizon: u64, eps: f64, safe: Arm) -> Result<ExactValue> {
    check_gap(eps)?;
    crate::error::check_horizon(horizon)?;
    if horizon > ENUMERATION_LIMIT {
        return Err(Error::HorizonTooLarge {
            what: "outcome-tree enumeration",
            horizon,
            limit: ENUMERATION_LIMIT,
        });
    }
    let h = horizon as i64;
    Ok(evaluate_tree(horizon, eps, safe, &|k: u64, xi_r: i64, _| {
        strategy.decide(k as i64 - h, xi_r).p1()
    }))
}

/// Outcome of a grid search over strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceReport {
    pub horizon: u64,
    pub eps: f64,
    pub grid: u32,
    pub decision_points: usize,
    pub candidates: u128,
    /// Smallest worst-case regret over the grid.
    pub value: f64,
    /// Worst-case regret of the myopic player.
    pub myopic_value: f64,
    /// Bound on how far the grid minimum can sit above the true minimum.
    pub lipschitz_slack: f64,
    pub achieved_by_myopic: bool,
}

const OBSERVABLE_LIMIT: u64 = 3;
const FULL_HISTORY_LIMIT: u64 = 2;
const MAX_CANDIDATES: u128 = 20_000_000;

/// Worst-case regret moves by at most `4(T-k)` per unit change of a round-`k`
/// decision, and round-`k` decision points partition probability one, so
/// moving every decision by `δ` moves the value by at most `2T(T+1)·δ`.
fn lipschitz_constant(horizon: u64) -> f64 {
    (2 * horizon * (horizon + 1)) as f64
}

fn grid_search<D>(horizon: u64, eps: f64, grid: u32, decision_points: usize, decide: D) -> Result<BruteForceReport>
where
    D: Fn(&[f64], u64, i64, u64) -> f64 + Sync,
{
    check_gap(eps)?;
    if grid < 2 {
        return Err(Error::Parse(format!("grid must have at least 2 levels, got {grid}")));
    }
    let candidates = u128::from(grid).pow(decision_points as u32);
    if candidates > MAX_CANDIDATES {
        return Err(Error::SearchTooLarge(candidates));
    }
    let levels: Vec<f64> = (0..grid).map(|i| f64::from(i) / f64::from(grid - 1)).collect();
    let worst = |p: &[f64]| {
        let f = |k: u64, x: i64, h: u64| decide(p, k, x, h);
        let r1 = evaluate_tree(horizon, eps, Arm::One, &f).regret;
        let r2 = evaluate_tree(horizon, eps, Arm::Two, &f).regret;
        r1.max(r2)
    };
    let value = (0..candidates as u64)
        .into_par_iter()
        .map(|mut code| {
            let mut p = vec![0.0; decision_points];
            for slot in p.iter_mut() {
                *slot = levels[(code % u64::from(grid)) as usize];
                code /= u64::from(grid);
            }
            worst(&p)
        })
        .reduce(|| f64::INFINITY, f64::min);

    let myopic = |_: u64, x: i64, _: u64| myopic_decision(x).p1();
    let myopic_value = evaluate_tree(horizon, eps, Arm::One, &myopic)
        .regret
        .max(evaluate_tree(horizon, eps, Arm::Two, &myopic).regret);
    let spacing = 1.0 / f64::from(grid - 1);
    let lipschitz_slack = lipschitz_constant(horizon) * spacing / 2.0;
    Ok(BruteForceReport {
        horizon,
        eps,
        grid,
        decision_points,
        candidates,
        value,
        myopic_value,
        lipschitz_slack,
        achieved_by_myopic: myopic_value <= value + lipschitz_slack,
    })
}

/// Searches every `(t, ξʳ)` table on a grid of `grid` probability levels and
/// reports the minimal worst-case (over the safe arm) regret. Limited to
/// `T <= 3`.
pub fn brute_force_minimax(horizon: u64, eps: f64, grid: u32) -> Result<BruteForceReport> {
    crate::error::check_horizon(horizon)?;
    if horizon > OBSERVABLE_LIMIT {
        return Err(Error::HorizonTooLarge {
            what: "brute-force minimax",
            horizon,
            limit: OBSERVABLE_LIMIT,
        });
    }
    // Round k has k+1 reachable values of ξʳ; slot = k(k+1)/2 + (ξʳ+k)/2.
    let points = (horizon * (horizon + 1) / 2) as usize;
    grid_search(horizon, eps, grid, points, |p, k, xi_r, _| {
        let k = k as i64;
        p[(k * (k + 1) / 2 + (xi_r + k) / 2) as usize]
    })
}

/// Same search over strategies that see the whole revealed history
/// `(I, g_I)` rather than only `ξʳ`. Limited to `T <= 2`.
pub fn brute_force_minimax_full_history(horizon: u64, eps: f64, grid: u32) -> Result<BruteForceReport> {
    crate::error::check_horizon(horizon)?;
    if horizon > FULL_HISTORY_LIMIT {
        return Err(Error::HorizonTooLarge {
            what: "full-history brute force",
            horizon,
            limit: FULL_HISTORY_LIMIT,
        });
    }
    // Histories of length k occupy slots (4^k - 1)/3 .. (4^{k+1} - 1)/3.
    let points = ((4u64.pow(horizon as u32) - 1) / 3) as usize;
    grid_search(horizon, eps, grid, points, |p, k, _, history| {
        p[((4u64.pow(k as u32) - 1) / 3 + history) as usize]
    })
}
