//! Backward induction for the regret value `v` and pseudoregret value `v̄`
//! of the myopic player.
//!
//! Three parameterizations of the regret recursion are provided:
//!
//! * full `(η, ξʰ, ξʳ)` tables ([`regret_tables_full`]), a test oracle for
//!   `T <= 12`;
//! * joint `(ξʳ, ζ)` tables with `ζ = ξʳ + ξʰ` ([`regret_value_joint`]), where
//!   the `η` dependence is carried as a scalar source `E[dη]/2`;
//! * the separated form used by [`regret_value`]. `ζ` moves by `g₁ - g₂`
//!   whatever the player does, and `E[dη | ξʳ]` depends on `ξʳ` only, so
//!   `v(0,0,-T) = ½E|ζ₀| + Σ_t E[source(ξʳ_t)]` splits into two independent
//!   one-dimensional recursions and costs `O(T²)` in total.
//!
//! Tables store only states reachable from the origin: after `k` rounds
//! `ξʳ ≡ ξʰ ≡ k (mod 2)` and `η, ζ` are even.

use serde::Serialize;

use crate::error::{check_gap, check_horizon, Error, Result};
use crate::game::{terminal_payoff, Arm};
use crate::strategy::myopic_decision;

/// Largest horizon accepted by the full three-dimensional recursion.
pub const FULL_LIMIT: u64 = 12;
/// Largest horizon accepted by the joint `(ξʳ, ζ)` recursion (`O(T³)` work).
pub const JOINT_LIMIT: u64 = 1500;
/// Largest horizon accepted by the unreduced `(ξʳ, s₂)` pseudoregret recursion.
pub const UNREDUCED_PSEUDO_LIMIT: u64 = 400;

/// Which state parameterization a [`ValueTable`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reduction {
    /// `(η, ξʰ, ξʳ)`.
    Full,
    /// `(ξʳ, ζ)` with the `η` part accumulated separately.
    Joint,
    /// `(ξʳ, s₂)`.
    PseudoUnreduced,
    /// `(ξʳ)` with the `s₂` part accumulated separately.
    PseudoReduced,
}

/// One lattice axis: values `min, min + step, …`, `len` of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Axis {
    pub min: i64,
    pub step: i64,
    pub len: usize,
}

impl Axis {
    /// `{-k, -k+2, …, k}`.
    fn parity(k: i64) -> Self {
        Self { min: -k, step: 2, len: (k + 1) as usize }
    }

    /// `{-2k, -2k+2, …, 2k}`.
    fn even(k: i64) -> Self {
        Self { min: -2 * k, step: 2, len: (2 * k + 1) as usize }
    }

    fn offset(&self, x: i64) -> Option<usize> {
        let d = x - self.min;
        if d < 0 || d % self.step != 0 {
            return None;
        }
        let i = (d / self.step) as usize;
        (i < self.len).then_some(i)
    }

    fn value(&self, i: usize) -> i64 {
        self.min + self.step * i as i64
    }
}

/// Dense slice of a value function at one time index, row-major over `axes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueTable {
    pub t: i64,
    pub reduction: Reduction,
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
}

impl ValueTable {
    fn new(t: i64, reduction: Reduction, axes: Vec<Axis>) -> Self {
        let n = axes.iter().map(|a| a.len).product();
        Self { t, reduction, axes, values: vec![0.0; n] }
    }

    fn index(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.axes.len() {
            return None;
        }
        let mut idx = 0;
        for (axis, &x) in self.axes.iter().zip(coords) {
            idx = idx * axis.len + axis.offset(x)?;
        }
        Some(idx)
    }

    /// Value at a state, or `None` if the state is unreachable at this time.
    pub fn get(&self, coords: &[i64]) -> Option<f64> {
        self.index(coords).map(|i| self.values[i])
    }

    /// Every stored state with its value.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, f64)> + '_ {
        self.values.iter().enumerate().map(move |(mut i, &v)| {
            let mut coords = vec![0; self.axes.len()];
            for (slot, axis) in coords.iter_mut().zip(&self.axes).rev() {
                *slot = axis.value(i % axis.len);
                i /= axis.len;
            }
            (coords, v)
        })
    }
}

/// Win probabilities `(P(g₁ = +1), P(g₂ = +1))` for a safe arm.
fn win_probabilities(eps: f64, safe: Arm) -> (f64, f64) {
    let hi = 0.5 * (1.0 + eps);
    let lo = 0.5 * (1.0 - eps);
    match safe {
        Arm::One => (hi, lo),
        Arm::Two => (lo, hi),
    }
}

/// `E[dη]/2 = -E[g_I]` at `ξʳ` under the myopic player: `-ε` when the safe
/// arm is pulled, `+ε` for the risky arm, averaged at the tie.
fn regret_source(xi_r: i64, eps: f64, safe: Arm) -> f64 {
    let p_safe = myopic_decision(xi_r).prob(safe);
    -eps * (2.0 * p_safe - 1.0)
}

/// `2ε·P(risky arm pulled)` at `ξʳ` under the myopic player.
fn pseudo_source(xi_r: i64, eps: f64, safe: Arm) -> f64 {
    2.0 * eps * myopic_decision(xi_r).prob(safe.other())
}

fn validate(horizon: u64, eps: f64) -> Result<()> {
    check_horizon(horizon)?;
    check_gap(eps)
}

fn guard(what: &'static str, horizon: u64, limit: u64) -> Result<()> {
    if horizon > limit {
        Err(Error::HorizonTooLarge { what, horizon, limit })
    } else {
        Ok(())
    }
}

/// All slices `v(·, t)` for `t = -T..=0` over the full `(η, ξʰ, ξʳ)` lattice;
/// index `k` of the result holds `t = k - T`.
pub fn regret_tables_full(horizon: u64, eps: f64, safe: Arm) -> Result<Vec<ValueTable>> {
    validate(horizon, eps)?;
    guard("full (eta, xi_h, xi_r) recursion", horizon, FULL_LIMIT)?;
    let h = horizon as i64;
    let (w1, w2) = win_probabilities(eps, safe);
    let outcomes = [(1i64, 1i64, w1 * w2), (1, -1, w1 * (1.0 - w2)), (-1, 1, (1.0 - w1) * w2), (-1, -1, (1.0 - w1) * (1.0 - w2))];

    let axes = |k: i64| vec![Axis::even(k), Axis::parity(k), Axis::parity(k)];
    let mut slices = Vec::with_capacity(horizon as usize + 1);
    let mut next = ValueTable::new(0, Reduction::Full, axes(h));
    let coords: Vec<Vec<i64>> = next.iter().map(|(c, _)| c).collect();
    for (slot, c) in coords.iter().enumerate() {
        next.values[slot] = terminal_payoff(c[0], c[1], c[2]);
    }
    slices.push(next.clone());

    for k in (0..h).rev() {
        let mut cur = ValueTable::new(k - h, Reduction::Full, axes(k));
        let states: Vec<Vec<i64>> = cur.iter().map(|(c, _)| c).collect();
        for (slot, c) in states.iter().enumerate() {
            let (eta, xi_h, xi_r) = (c[0], c[1], c[2]);
            let decision = myopic_decision(xi_r);
            let mut acc = 0.0;
            for (arm, p_arm) in [(Arm::One, decision.p1()), (Arm::Two, decision.p2())] {
                if p_arm == 0.0 {
                    continue;
                }
                for &(g1, g2, q) in &outcomes {
                    let chosen = if arm == Arm::One { g1 } else { g2 };
                    let (nxr, nxh) = match arm {
                        Arm::One => (xi_r + g1, xi_h - g2),
                        Arm::Two => (xi_r - g2, xi_h + g1),
                    };
                    let v = next
                        .get(&[eta + g1 + g2 - 2 * chosen, nxh, nxr])
                        .expect("successor of a reachable state is reachable");
                    acc += p_arm * q * v;
                }
            }
            cur.values[slot] = acc;
        }
        slices.push(cur.clone());
        next = cur;
    }
    slices.reverse();
    Ok(slices)
}

/// `v(0,0,-T)` from the full three-dimensional recursion (`T <= 12`).
pub fn regret_value_full(horizon: u64, eps: f64, safe: Arm) -> Result<f64> {
    let tables = regret_tables_full(horizon, eps, safe)?;
    Ok(tables[0].values[0])
}

/// `v(0,0,-T)` from the joint `(ξʳ, ζ)` recursion with the `η` part carried
/// as a scalar source. `O(T³)` work; limited to [`JOINT_LIMIT`].
pub fn regret_value_joint(horizon: u64, eps: f64, safe: Arm) -> Result<f64> {
    validate(horizon, eps)?;
    guard("joint (xi_r, zeta) recursion", horizon, JOINT_LIMIT)?;
    let h = horizon as usize;
    let (w1, w2) = win_probabilities(eps, safe);

    // Slice k: ξʳ = 2i - k (i = 0..=k), ζ = 2(j - k) (j = 0..=2k); the
    // terminal value |ζ|/2 is |j - T|.
    let width = |k: usize| 2 * k + 1;
    let mut next: Vec<f64> = Vec::with_capacity((h + 1) * width(h));
    for _ in 0..=h {
        next.extend((0..width(h)).map(|j| (j as f64 - h as f64).abs()));
    }
    for k in (0..h).rev() {
        let (wk, wn) = (width(k), width(k + 1));
        let mut cur = vec![0.0; (k + 1) * wk];
        for i in 0..=k {
            let xi_r = 2 * i as i64 - k as i64;
            let d = myopic_decision(xi_r);
            let src = regret_source(xi_r, eps, safe);
            // Successor ξʳ ± 1 sits at index i + 1 or i; ζ shifts by g₁ - g₂ ∈ {-2, 0, 2},
            // i.e. by 0, 1 or 2 columns after re-centring on the wider slice.
            for j in 0..wk {
                let col = |shift: usize| j + shift;
                let at = |row: usize, c: usize| next[row * wn + c];
                let mut acc = 0.0;
                for (arm, p_arm) in [(Arm::One, d.p1()), (Arm::Two, d.p2())] {
                    if p_arm == 0.0 {
                        continue;
                    }
                    for (g1, q1) in [(1i64, w1), (-1, 1.0 - w1)] {
                        for (g2, q2) in [(1i64, w2), (-1, 1.0 - w2)] {
                            let dxr = if arm == Arm::One { g1 } else { -g2 };
                            let row = if dxr > 0 { i + 1 } else { i };
                            let shift = (1 + (g1 - g2) / 2) as usize;
                            acc += p_arm * q1 * q2 * at(row, col(shift));
                        }
                    }
                }
                cur[i * wk + j] = acc + src;
            }
        }
        next = cur;
    }
    Ok(next[0])
}

/// `½E|ζ₀|` by backward recursion on `ζ/2`, which steps `+1`, `0`, `-1` with
/// probabilities `w₁(1-w₂)`, `w₁w₂ + (1-w₁)(1-w₂)`, `(1-w₁)w₂`.
///
/// With `r` rounds left, a state with `|ζ/2| >= r` cannot change sign, so its
/// value is `|ζ/2| + sign(ζ)·r·(up - down)` exactly. Only the band
/// `|ζ/2| < r` is iterated, plus the two states on either side of it.
fn half_abs_zeta(horizon: u64, eps: f64, safe: Arm) -> f64 {
    let h = horizon as i64;
    let (w1, w2) = win_probabilities(eps, safe);
    let up = w1 * (1.0 - w2);
    let down = (1.0 - w1) * w2;
    let stay = 1.0 - up - down;
    let outside = |z: i64, r: i64| z.abs() as f64 + z.signum() as f64 * r as f64 * (up - down);
    // Slice k holds ζ/2 = j - k at index j = 0..=2k.
    let mut next: Vec<f64> = (0..=2 * h).map(|j| (j - h).abs() as f64).collect();
    let mut cur = vec![0.0; next.len()];
    for k in (0..h).rev() {
        let r = h - k;
        let lo = (k - r + 1).max(0) as usize;
        let hi = (k + r - 1).min(2 * k) as usize;
        let band = lo..hi + 1;
        for (((c, &a), &b), &d) in cur[band.clone()]
            .iter_mut()
            .zip(&next[band.clone()])
            .zip(&next[lo + 1..hi + 2])
            .zip(&next[lo + 2..hi + 3])
        {
            *c = down * a + stay * b + up * d;
        }
        for z in [-r - 1, -r, r, r + 1] {
            let j = z + k;
            if (0..=2 * k).contains(&j) {
                cur[j as usize] = outside(z, r);
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    next[0]
}

/// `Σ_k E[source(ξʳ_k)]` by backward recursion on `ξʳ`, for a source that
/// takes the values `(neg, zero, pos)` by the sign of `ξʳ`. `ξʳ` steps `+1`
/// with probability `P(safe arm pays)` whichever arm is pulled.
///
/// With `r` rounds left, a state with `|ξʳ| >= r` keeps its sign for every
/// remaining source term, so its value is `r·source` exactly; as above only
/// the band `|ξʳ| < r` is iterated.
fn accumulated_source(horizon: u64, up: f64, (neg, zero, pos): (f64, f64, f64)) -> f64 {
    let h = horizon as i64;
    let down = 1.0 - up;
    let sweep = |cur: &mut [f64], next: &[f64], from: usize, to: usize, src: f64| {
        if from >= to {
            return;
        }
        for ((c, &a), &b) in cur[from..to].iter_mut().zip(&next[from..to]).zip(&next[from + 1..to + 1]) {
            *c = src + down * a + up * b;
        }
    };
    // Slice k holds ξʳ = 2i - k at index i = 0..=k.
    let mut next = vec![0.0; h as usize + 1];
    let mut cur = vec![0.0; next.len()];
    for k in (0..h).rev() {
        let r = h - k;
        let lo = if k < r { 0 } else { (k - r) / 2 + 1 };
        let hi = ((k + r + 1) / 2 - 1).min(k);
        // Split the band [lo, hi] by the sign of ξʳ = 2i - k.
        let zero_at = (k % 2 == 0).then_some(k / 2);
        let first_pos = k / 2 + 1;
        let neg_end = (k + 1) / 2;
        sweep(&mut cur, &next, lo as usize, neg_end.min(hi + 1).max(lo) as usize, neg);
        if let Some(z) = zero_at {
            if (lo..=hi).contains(&z) {
                sweep(&mut cur, &next, z as usize, z as usize + 1, zero);
            }
        }
        sweep(&mut cur, &next, first_pos.max(lo) as usize, (hi + 1).max(first_pos.max(lo)) as usize, pos);
        for x in [-r - 1, -r, r, r + 1] {
            if (x + k) % 2 == 0 && x.abs() <= k {
                let i = ((x + k) / 2) as usize;
                cur[i] = r as f64 * if x > 0 { pos } else { neg };
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    next[0]
}

/// Source values at `ξʳ < 0`, `= 0`, `> 0`.
fn by_sign<F: Fn(i64) -> f64>(source: F) -> (f64, f64, f64) {
    (source(-1), source(0), source(1))
}

/// Probability that `ξʳ` steps up: the safe arm's payout, seen through either
/// arm (pulling arm 2 reveals `-g₂`).
fn xi_r_up_probability(eps: f64, safe: Arm) -> f64 {
    match safe {
        Arm::One => 0.5 * (1.0 + eps),
        Arm::Two => 0.5 * (1.0 - eps),
    }
}

/// Exact regret `R_T(p^m, a(safe)) = v(0,0,-T)` of the myopic player.
pub fn regret_value_with_safe(horizon: u64, eps: f64, safe: Arm) -> Result<f64> {
    validate(horizon, eps)?;
    let (zeta, source) = rayon::join(
        || half_abs_zeta(horizon, eps, safe),
        || accumulated_source(horizon, xi_r_up_probability(eps, safe), by_sign(|x| regret_source(x, eps, safe))),
    );
    Ok(zeta + source)
}

/// Exact regret of the myopic player with arm 1 safe.
pub fn regret_value(horizon: u64, eps: f64) -> Result<f64> {
    regret_value_with_safe(horizon, eps, Arm::One)
}

/// Exact pseudoregret `2ε·E[risky pulls] = v̄(0,0,-T)` of the myopic player.
pub fn pseudoregret_value_with_safe(horizon: u64, eps: f64, safe: Arm) -> Result<f64> {
    validate(horizon, eps)?;
    Ok(accumulated_source(horizon, xi_r_up_probability(eps, safe), by_sign(|x| pseudo_source(x, eps, safe))))
}

/// Exact pseudoregret of the myopic player with arm 1 safe.
pub fn pseudoregret_value(horizon: u64, eps: f64) -> Result<f64> {
    pseudoregret_value_with_safe(horizon, eps, Arm::One)
}

/// All slices `v̄(ξʳ, s₂, t)` of the unreduced recursion with terminal value
/// `2εs₂`; index `k` holds `t = k - T`.
pub fn pseudoregret_tables_unreduced(horizon: u64, eps: f64, safe: Arm) -> Result<Vec<ValueTable>> {
    validate(horizon, eps)?;
    guard("unreduced (xi_r, s2) recursion", horizon, UNREDUCED_PSEUDO_LIMIT)?;
    let h = horizon as i64;
    let up = xi_r_up_probability(eps, safe);
    let risky = safe.other();
    let axes = |k: i64| vec![Axis::parity(k), Axis { min: 0, step: 1, len: (k + 1) as usize }];

    let mut next = ValueTable::new(0, Reduction::PseudoUnreduced, axes(h));
    let coords: Vec<Vec<i64>> = next.iter().map(|(c, _)| c).collect();
    for (slot, c) in coords.iter().enumerate() {
        next.values[slot] = 2.0 * eps * c[1] as f64;
    }
    let mut slices = vec![next.clone()];
    for k in (0..h).rev() {
        let mut cur = ValueTable::new(k - h, Reduction::PseudoUnreduced, axes(k));
        let coords: Vec<Vec<i64>> = cur.iter().map(|(c, _)| c).collect();
        for (slot, c) in coords.iter().enumerate() {
            let (xi_r, s2) = (c[0], c[1]);
            let d = myopic_decision(xi_r);
            let mut acc = 0.0;
            for (arm, p_arm) in [(Arm::One, d.p1()), (Arm::Two, d.p2())] {
                if p_arm == 0.0 {
                    continue;
                }
                let ns2 = s2 + i64::from(arm == risky);
                let hi = next.get(&[xi_r + 1, ns2]).expect("reachable");
                let lo = next.get(&[xi_r - 1, ns2]).expect("reachable");
                acc += p_arm * (up * hi + (1.0 - up) * lo);
            }
            cur.values[slot] = acc;
        }
        slices.push(cur.clone());
        next = cur;
    }
    slices.reverse();
    Ok(slices)
}

/// `v̄(0,0,-T)` from the unreduced `(ξʳ, s₂)` recursion.
pub fn pseudoregret_value_unreduced(horizon: u64, eps: f64, safe: Arm) -> Result<f64> {
    Ok(pseudoregret_tables_unreduced(horizon, eps, safe)?[0].values[0])
}

/// Bayes risk with the safe arm drawn uniformly:
/// `½v̄(safe = 1) + ½v̄(safe = 2)`.
pub fn bayesian_pseudoregret_check(horizon: u64, eps: f64) -> Result<f64> {
    let one = pseudoregret_value_with_safe(horizon, eps, Arm::One)?;
    let two = pseudoregret_value_with_safe(horizon, eps, Arm::Two)?;
    Ok(0.5 * (one + two))
}

/// Value at the origin for every remaining horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: i64,
    pub v: f64,
    pub v_bar: f64,
}

/// `v(0,0,t)` and `v̄(0,0,t)` for `t = -T..=0`, computed by pushing the
/// distributions of `ξʳ` and `ζ` forward from the origin. This route shares
/// no code with the backward recursions.
pub fn value_trace(horizon: u64, eps: f64) -> Result<Vec<TraceRow>> {
    validate(horizon, eps)?;
    let h = horizon as usize;
    let (w1, w2) = win_probabilities(eps, Arm::One);
    let (up_z, down_z) = (w1 * (1.0 - w2), (1.0 - w1) * w2);
    let stay_z = 1.0 - up_z - down_z;
    let up_x = 0.5 * (1.0 + eps);

    // After n rounds: xi[i] = P(ξʳ = 2i - n), zeta[j] = P(ζ/2 = j - n).
    let mut xi = vec![1.0];
    let mut zeta = vec![1.0];
    let mut source_sum = 0.0;
    let mut pulls_sum = 0.0;
    let mut by_rounds = Vec::with_capacity(h + 1);
    for n in 0..=h {
        let half_abs: f64 = zeta.iter().enumerate().map(|(j, p)| p * (j as f64 - n as f64).abs()).sum();
        by_rounds.push((half_abs + source_sum, 2.0 * eps * pulls_sum));
        if n == h {
            break;
        }
        for (i, p) in xi.iter().enumerate() {
            let x = 2 * i as i64 - n as i64;
            let d = myopic_decision(x);
            source_sum += p * -eps * (d.p1() - d.p2());
            pulls_sum += p * d.p2();
        }
        let mut nxi = vec![0.0; n + 2];
        for (i, p) in xi.iter().enumerate() {
            nxi[i] += (1.0 - up_x) * p;
            nxi[i + 1] += up_x * p;
        }
        let mut nz = vec![0.0; 2 * n + 3];
        for (j, p) in zeta.iter().enumerate() {
            nz[j] += down_z * p;
            nz[j + 1] += stay_z * p;
            nz[j + 2] += up_z * p;
        }
        xi = nxi;
        zeta = nz;
    }
    Ok(by_rounds
        .into_iter()
        .enumerate()
        .map(|(n, (v, v_bar))| TraceRow { t: -(n as i64), v, v_bar })
        .rev()
        .collect())
}
