//! Closed-form solutions `u`, `ū` of the linear parabolic equations that
//! approximate the regret and pseudoregret value functions, the prefactors
//! `c(γ)`, `c̄(γ)`, and finite-difference residual checks.
//!
//! With `S ~ N(ξʳ - εt, -t)` the smoothed ODE layers are `φ̂ = E φ(S)` and
//! `φ̄̂ = E φ̄(S)`. Splitting at `s = 0`,
//!
//! ```text
//! φ̂  = E|S|          + b·D,
//! φ̄̂  = -2 E[S; S<=0] + b·D,
//! D   = E[e^{-2εS}; S>0] - P(S>0) = N(a)·e^{-2εm + 2ε²σ²} - N(m/σ),
//! ```
//!
//! where `m = ξʳ - εt`, `σ² = -t` and `a = (m - 2εσ²)/σ`.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{check_gap, check_time, Error, Result};
use crate::optimize::{golden_section_max, interior_local_maxima};
use crate::special::{abs_gaussian_mean, erf, erfc, erfcx, normal_cdf, normal_pdf};

/// Which member of the solution family a [`ClosedForm`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `b = 1/ε`: `φ` is `C¹` at the origin.
    C1,
    /// `b = 1/(ε - ε³)`: cancels the leading kink error.
    C0,
    Custom,
}

/// One member of the PDE solution family, fixed by the gap and `b`.
///
/// `b` is infinite at `ε = 0` for both named branches; evaluation goes
/// through `β = εb`, which stays finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub eps: f64,
    pub b: f64,
    pub kappa: f64,
    pub branch: Branch,
    beta: f64,
}

/// Side of the kink at `ξʳ = 0` for one-sided derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl ClosedForm {
    fn with_beta(eps: f64, beta: f64, branch: Branch) -> Result<Self> {
        check_gap(eps)?;
        let b = if eps == 0.0 { f64::INFINITY } else { beta / eps };
        Ok(Self { eps, b, kappa: 2.0 * (1.0 + eps * eps), branch, beta })
    }

    pub fn c1(eps: f64) -> Result<Self> {
        Self::with_beta(eps, 1.0, Branch::C1)
    }

    pub fn c0(eps: f64) -> Result<Self> {
        Self::with_beta(eps, 1.0 / (1.0 - eps * eps), Branch::C0)
    }

    /// Arbitrary finite `b`; needs `ε > 0`.
    pub fn custom(eps: f64, b: f64) -> Result<Self> {
        check_gap(eps)?;
        if eps == 0.0 || !b.is_finite() {
            return Err(Error::InvalidGap(eps));
        }
        Ok(Self { eps, b, kappa: 2.0 * (1.0 + eps * eps), branch: Branch::Custom, beta: b * eps })
    }

    /// `b·(e^{-2εs} - 1)` for `s > 0`, continuous in `ε` at 0.
    fn exp_layer(&self, s: f64) -> f64 {
        let x = -2.0 * self.eps * s;
        if self.eps == 0.0 {
            -2.0 * self.beta * s
        } else {
            self.b * x.exp_m1()
        }
    }

    /// Homogeneous part `u^h(η, ξ, t) = ½(η + √(-κt)·f(z/√(-t)))`,
    /// `z = (ξʳ + ξʰ - 2εt)/√κ`.
    pub fn u_h(&self, eta: f64, xi_h: f64, xi_r: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let z = (xi_r + xi_h - 2.0 * self.eps * t) / self.kappa.sqrt();
        Ok(0.5 * (eta + (-self.kappa * t).sqrt() * abs_gaussian_mean(z / (-t).sqrt())))
    }

    /// ODE layer `φ`: `-ξʳ` on the left, `ξʳ + b(e^{-2εξʳ} - 1)` on the right.
    pub fn phi_fn(&self, xi_r: f64) -> f64 {
        if xi_r <= 0.0 {
            -xi_r
        } else {
            xi_r + self.exp_layer(xi_r)
        }
    }

    /// `φ′` on the given side of `ξʳ` (the side only matters at 0).
    pub fn phi_prime(&self, xi_r: f64, side: Side) -> f64 {
        if xi_r < 0.0 || (xi_r == 0.0 && side == Side::Left) {
            -1.0
        } else {
            1.0 - 2.0 * self.beta * (-2.0 * self.eps * xi_r).exp()
        }
    }

    /// `φ″` on the given side of `ξʳ`.
    pub fn phi_second(&self, xi_r: f64, side: Side) -> f64 {
        if xi_r < 0.0 || (xi_r == 0.0 && side == Side::Left) {
            0.0
        } else {
            4.0 * self.eps * self.beta * (-2.0 * self.eps * xi_r).exp()
        }
    }

    /// `b·D` from the module docs, with `S ~ N(m, σ²)`.
    ///
    /// `D` is `O(εσ)` while its two terms are `O(1)`, and `b` is `O(1/ε)`,
    /// so the terms are regrouped as `N(a)·expm1(A) - ∫_a^{m/σ} n` to keep
    /// relative accuracy for small `ε`.
    fn smoothed_exp_layer(&self, m: f64, sigma: f64) -> f64 {
        let eps = self.eps;
        let r = m / sigma;
        if eps * sigma.max(m.abs()) < 1e-10 {
            // Second-order expansion of D/ε in ε; exact limit at ε = 0.
            let pos_mean = m * normal_cdf(r) + sigma * normal_pdf(r);
            let pos_second = (m * m + sigma * sigma) * normal_cdf(r) + m * sigma * normal_pdf(r);
            return self.beta * (-2.0 * pos_mean + 2.0 * eps * pos_second);
        }
        let a = r - 2.0 * eps * sigma;
        let d = if a > -5.0 {
            let big_a = -2.0 * eps * sigma * a - 2.0 * eps * eps * sigma * sigma;
            normal_cdf(a) * big_a.exp_m1() - normal_mass(a, r)
        } else {
            // Far tail: N(a)·e^A = ½·erfcx(-a/√2)·e^{-r²/2}.
            0.5 * erfcx(-a / SQRT_2) * (-0.5 * r * r).exp() - normal_cdf(r)
        };
        self.b * d
    }

    /// `φ̂(ξʳ, t) = ∫ Φ(ξʳ - s - εt, t) φ(s) ds` in closed form.
    pub fn phi_hat(&self, xi_r: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let sigma = (-t).sqrt();
        let m = xi_r - self.eps * t;
        Ok(sigma * abs_gaussian_mean(m / sigma) + self.smoothed_exp_layer(m, sigma))
    }

    /// `u^n = φ - φ̂`.
    pub fn u_n(&self, xi_r: f64, t: f64) -> Result<f64> {
        Ok(self.phi_fn(xi_r) - self.phi_hat(xi_r, t)?)
    }

    /// `u = u^h + φ - φ̂`.
    pub fn u_total(&self, eta: f64, xi_h: f64, xi_r: f64, t: f64) -> Result<f64> {
        Ok(self.u_h(eta, xi_h, xi_r, t)? + self.u_n(xi_r, t)?)
    }

    /// Pseudoregret ODE layer `φ̄`: `-2ξʳ` on the left, `b(e^{-2εξʳ} - 1)` on the right.
    pub fn phi_bar(&self, xi_r: f64) -> f64 {
        if xi_r <= 0.0 {
            -2.0 * xi_r
        } else {
            self.exp_layer(xi_r)
        }
    }

    /// `φ̄̂(ξʳ, t) = ∫ Φ(ξʳ - s - εt, t) φ̄(s) ds` in closed form.
    pub fn phi_bar_hat(&self, xi_r: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let sigma = (-t).sqrt();
        let m = xi_r - self.eps * t;
        let r = m / sigma;
        let neg_mean = m * normal_cdf(-r) - sigma * normal_pdf(r);
        Ok(-2.0 * neg_mean + self.smoothed_exp_layer(m, sigma))
    }

    /// `ū = 2εs₂ + φ̄ - φ̄̂`.
    pub fn bar_u_total(&self, xi_r: f64, s2: f64, t: f64) -> Result<f64> {
        Ok(2.0 * self.eps * s2 + self.phi_bar(xi_r) - self.phi_bar_hat(xi_r, t)?)
    }

    /// Source of the regret equation: `+ε` right of the kink, `-ε` left of it.
    pub fn source_q(&self, xi_r: f64) -> f64 {
        if xi_r > 0.0 {
            self.eps
        } else {
            -self.eps
        }
    }

    /// Source of the pseudoregret equation: `0` right of the kink, `-2ε` left of it.
    pub fn source_q_bar(&self, xi_r: f64) -> f64 {
        if xi_r > 0.0 {
            0.0
        } else {
            -2.0 * self.eps
        }
    }
}

/// `∫_a^b n(x) dx` for `a <= b`, by 8-point Gauss-Legendre on short
/// intervals where the difference of distribution functions would cancel.
fn normal_mass(a: f64, b: f64) -> f64 {
    const NODES: [f64; 4] = [0.183_434_642_495_65, 0.525_532_409_916_329, 0.796_666_477_413_627, 0.960_289_856_497_536];
    const WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887, 0.222_381_034_453_374, 0.101_228_536_290_376];
    let len = b - a;
    if len >= 0.5 {
        return normal_cdf(b) - normal_cdf(a);
    }
    let (mid, half) = (0.5 * (a + b), 0.5 * len);
    half * NODES
        .iter()
        .zip(WEIGHTS)
        .map(|(x, w)| w * (normal_pdf(mid - half * x) + normal_pdf(mid + half * x)))
        .sum::<f64>()
}

/// Evaluation point of the regret equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdePoint {
    pub eta: f64,
    pub xi_h: f64,
    pub xi_r: f64,
    pub t: f64,
}

fn check_stencil(xi_r: f64, t: f64, h: f64) -> Result<()> {
    if xi_r.abs() < 2.0 * h {
        return Err(Error::NearKink { xi_r: xi_r.abs(), two_h: 2.0 * h });
    }
    check_time(t + h)
}

/// Central-difference residual of
/// `u_t + εu_ξʳ + εu_ξʰ + ½(u_ξʳξʳ + u_ξʰξʰ) + ε²u_ξʳξʰ - q`.
pub fn pde_residual(p: PdePoint, cf: &ClosedForm, h: f64) -> Result<f64> {
    check_stencil(p.xi_r, p.t, h)?;
    let u = |dh: f64, dr: f64, dt: f64| cf.u_total(p.eta, p.xi_h + dh, p.xi_r + dr, p.t + dt);
    let c = u(0.0, 0.0, 0.0)?;
    let u_t = (u(0.0, 0.0, h)? - u(0.0, 0.0, -h)?) / (2.0 * h);
    let (rp, rm) = (u(0.0, h, 0.0)?, u(0.0, -h, 0.0)?);
    let (hp, hm) = (u(h, 0.0, 0.0)?, u(-h, 0.0, 0.0)?);
    let u_r = (rp - rm) / (2.0 * h);
    let u_h = (hp - hm) / (2.0 * h);
    let u_rr = (rp - 2.0 * c + rm) / (h * h);
    let u_hh = (hp - 2.0 * c + hm) / (h * h);
    let u_hr = (u(h, h, 0.0)? - u(h, -h, 0.0)? - u(-h, h, 0.0)? + u(-h, -h, 0.0)?) / (4.0 * h * h);
    let eps = cf.eps;
    Ok(u_t + eps * (u_r + u_h) + 0.5 * (u_rr + u_hh) + eps * eps * u_hr - cf.source_q(p.xi_r))
}

/// Central-difference residual of `ū_t + εū_ξʳ + ½ū_ξʳξʳ - q̄`.
pub fn bar_pde_residual(xi_r: f64, s2: f64, t: f64, cf: &ClosedForm, h: f64) -> Result<f64> {
    check_stencil(xi_r, t, h)?;
    let u = |dr: f64, dt: f64| cf.bar_u_total(xi_r + dr, s2, t + dt);
    let c = u(0.0, 0.0)?;
    let u_t = (u(0.0, h)? - u(0.0, -h)?) / (2.0 * h);
    let (rp, rm) = (u(h, 0.0)?, u(-h, 0.0)?);
    let u_r = (rp - rm) / (2.0 * h);
    let u_rr = (rp - 2.0 * c + rm) / (h * h);
    Ok(u_t + cf.eps * u_r + 0.5 * u_rr - cf.source_q_bar(xi_r))
}

/// `lim_{γ→0} c(γ)`.
pub const C_SMALL_GAP_LIMIT: f64 = 0.564_189_583_547_756_3;

/// Regions above this use complementary forms in the prefactors.
const LARGE_GAMMA: f64 = 8.0;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGamma(gamma))
    }
}

/// Regret prefactor
/// `c(γ) = e^{-γ²}/√π + γ·erf(γ) + (1/γ - γ)·erf(γ/√2) - √(2/π)·e^{-γ²/2}`.
pub fn prefactor_c(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let g = gamma;
    let gauss = (-g * g).exp() / PI.sqrt() - (2.0 / PI).sqrt() * (-0.5 * g * g).exp();
    Ok(if g > LARGE_GAMMA {
        gauss + g * (erfc(g / SQRT_2) - erfc(g)) + erf(g / SQRT_2) / g
    } else {
        gauss + g * erf(g) + (1.0 / g - g) * erf(g / SQRT_2)
    })
}

/// Pseudoregret prefactor
/// `c̄(γ) = (1/γ - γ)·erf(γ/√2) - √(2/π)·e^{-γ²/2} + γ`.
pub fn prefactor_c_bar(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let g = gamma;
    let gauss = (2.0 / PI).sqrt() * (-0.5 * g * g).exp();
    Ok(if g > LARGE_GAMMA {
        erf(g / SQRT_2) / g + g * erfc(g / SQRT_2) - gauss
    } else {
        (1.0 / g - g) * erf(g / SQRT_2) - gauss + g
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Prefactor {
    C,
    CBar,
}

impl Prefactor {
    pub fn name(self) -> &'static str {
        match self {
            Prefactor::C => "c",
            Prefactor::CBar => "c_bar",
        }
    }

    pub fn eval(self, gamma: f64) -> Result<f64> {
        match self {
            Prefactor::C => prefactor_c(gamma),
            Prefactor::CBar => prefactor_c_bar(gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrefactorMax {
    pub gamma: f64,
    pub value: f64,
}

const SCAN_LO: f64 = 1e-3;
const SCAN_HI: f64 = 10.0;
const SCAN_POINTS: usize = 1000;

/// Values of the prefactor on the coarse scan grid over `(1e-3, 10)`.
pub fn prefactor_scan(which: Prefactor) -> Vec<(f64, f64)> {
    let step = (SCAN_HI - SCAN_LO) / (SCAN_POINTS - 1) as f64;
    (0..SCAN_POINTS)
        .map(|i| {
            let g = SCAN_LO + step * i as f64;
            (g, which.eval(g).expect("scan grid is positive"))
        })
        .collect()
}

/// Maximizer of `c` or `c̄`: coarse scan, then golden section on the
/// bracketing grid cells.
pub fn maximize_prefactor(which: Prefactor) -> Result<PrefactorMax> {
    let scan = prefactor_scan(which);
    let values: Vec<f64> = scan.iter().map(|&(_, v)| v).collect();
    let peaks = interior_local_maxima(&values);
    let &i = peaks
        .iter()
        .max_by(|&&a, &&b| values[a].total_cmp(&values[b]))
        .ok_or(Error::NoInteriorBracket(which.name()))?;
    let f = |g: f64| which.eval(g).expect("bracket is positive");
    let (gamma, value) = golden_section_max(f, scan[i - 1].0, scan[i + 1].0, 1e-10);
    Ok(PrefactorMax { gamma, value })
}
