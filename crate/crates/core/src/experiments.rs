//! Monte Carlo estimation, DP-versus-PDE convergence sweeps, error-scaling
//! fits and prefactor curve data.
//!
//! Every sweep cell `(T, ε)` is an independent job. Cells run on the rayon
//! pool and are merged back in cell order, so output does not depend on the
//! number of workers. Monte Carlo cell `k` of a sweep with master seed `s`
//! uses the sub-seed [`sub_seed`]`(s, k)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{pseudoregret_value, pseudoregret_value_with_safe, regret_value, regret_value_full, regret_value_with_safe, FULL_LIMIT};
use crate::env::{episode_rng, play, SymmetricBandit};
use crate::error::{check_gap, check_horizon, Error, Result};
use crate::game::Arm;
use crate::pde::{maximize_prefactor, prefactor_c, prefactor_c_bar, ClosedForm, Prefactor, C_SMALL_GAP_LIMIT};
use crate::strategy::{brute_force_minimax, Strategy};
use crate::VERSION;

/// Episodes per Monte Carlo work unit. Fixed so that partial sums, and hence
/// the floating-point result, do not depend on the worker count.
const MC_CHUNK: u64 = 1 << 14;

/// Monte Carlo estimates of regret `E μ` and pseudoregret `2ε·E s₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub episodes: u64,
    pub regret_mean: f64,
    pub regret_se: f64,
    pub pseudo_mean: f64,
    pub pseudo_se: f64,
}

fn mean_and_se(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let mean = sum / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Runs `episodes` independent episodes; episode `i` draws from
/// [`episode_rng`]`(seed, i)`. `workers = 0` uses the global rayon pool.
pub fn mc_estimate<S: Strategy + ?Sized>(
    strategy: &S,
    horizon: u64,
    eps: f64,
    episodes: u64,
    seed: u64,
    workers: usize,
    safe: Arm,
) -> Result<McEstimate> {
    check_horizon(horizon)?;
    let bandit = SymmetricBandit::new(eps, safe)?;
    if episodes == 0 {
        return Err(Error::InvalidSweep("episodes must be >= 1".into()));
    }
    let chunks = episodes.div_ceil(MC_CHUNK);
    let run_chunk = |c: u64| {
        let mut acc = [0.0f64; 4];
        for i in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(episodes) {
            let mut rng = episode_rng(seed, i);
            let out = play(&mut rng, &bandit, strategy, horizon, |_, _, _| {});
            let p = 2.0 * eps * out.risky_pulls as f64;
            acc[0] += out.final_regret;
            acc[1] += out.final_regret * out.final_regret;
            acc[2] += p;
            acc[3] += p * p;
        }
        acc
    };
    let partials: Vec<[f64; 4]> = if workers == 0 {
        (0..chunks).into_par_iter().map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidSweep(format!("cannot build worker pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    };
    let mut total = [0.0f64; 4];
    for p in &partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    let (regret_mean, regret_se) = mean_and_se(total[0], total[1], episodes);
    let (pseudo_mean, pseudo_se) = mean_and_se(total[2], total[3], episodes);
    Ok(McEstimate { episodes, regret_mean, regret_se, pseudo_mean, pseudo_se })
}

/// SplitMix64 finalizer applied to `master + k·φ64`: the sub-seed of sweep
/// cell `k`.
pub fn sub_seed(master: u64, k: u64) -> u64 {
    let mut z = master.wrapping_add(k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Small,
    Medium,
    Large,
}

/// How the gap depends on the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapRule {
    /// `ε = γ/√T`.
    Gamma(f64),
    /// `ε = T^{-a}`.
    Power(f64),
    /// Every listed gap at every horizon.
    Fixed(Vec<f64>),
}

impl GapRule {
    pub fn gaps(&self, horizon: u64) -> Vec<f64> {
        let t = horizon as f64;
        match self {
            GapRule::Gamma(g) => vec![g / t.sqrt()],
            GapRule::Power(a) => vec![t.powf(-a)],
            GapRule::Fixed(list) => list.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchChoice {
    C1,
    C0,
}

impl BranchChoice {
    pub fn closed_form(self, eps: f64) -> Result<ClosedForm> {
        match self {
            BranchChoice::C1 => ClosedForm::c1(eps),
            BranchChoice::C0 => ClosedForm::c0(eps),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BranchChoice::C1 => "c1",
            BranchChoice::C0 => "c0",
        }
    }
}

/// One sweep: horizons, a gap rule, the PDE branch and Monte Carlo settings.
/// `replications` is the number of Monte Carlo episodes per cell; 0 skips
/// simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub regime: Regime,
    #[serde(alias = "T_list")]
    pub horizons: Vec<u64>,
    pub gap: GapRule,
    pub branch: BranchChoice,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub replications: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() {
            return Err(Error::InvalidSweep("horizon list is empty".into()));
        }
        if !self.horizons.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSweep("horizons must be strictly ascending".into()));
        }
        for &t in &self.horizons {
            check_horizon(t)?;
            let gaps = self.gap.gaps(t);
            if gaps.is_empty() {
                return Err(Error::InvalidSweep("gap list is empty".into()));
            }
            for eps in gaps {
                check_gap(eps)?;
            }
        }
        Ok(())
    }

    /// `(T, ε)` cells in sweep order.
    pub fn cells(&self) -> Vec<(u64, f64)> {
        self.horizons.iter().flat_map(|&t| self.gap.gaps(t).into_iter().map(move |e| (t, e))).collect()
    }
}

/// One row of `convergence.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub horizon: u64,
    pub eps: f64,
    pub gamma: f64,
    pub v: f64,
    pub v_bar: f64,
    pub u: f64,
    pub u_bar: f64,
    pub v_minus_u: f64,
    pub v_bar_minus_u_bar: f64,
    pub v_norm: f64,
    pub v_bar_norm: f64,
    pub c: f64,
    pub c_bar: f64,
    pub mc_regret_mean: Option<f64>,
    pub mc_regret_se: Option<f64>,
    pub mc_pseudo_mean: Option<f64>,
    pub mc_pseudo_se: Option<f64>,
}

/// `c(γ)` and `c̄(γ)` with their `γ → 0` limits at 0.
fn prefactors_at(gamma: f64) -> Result<(f64, f64)> {
    if gamma == 0.0 {
        Ok((C_SMALL_GAP_LIMIT, 0.0))
    } else {
        Ok((prefactor_c(gamma)?, prefactor_c_bar(gamma)?))
    }
}

fn convergence_cell<S: Strategy + ?Sized>(spec: &SweepSpec, k: usize, horizon: u64, eps: f64, strategy: &S) -> Result<ConvergenceRow> {
    let cf = spec.branch.closed_form(eps)?;
    let t = horizon as f64;
    let gamma = eps * t.sqrt();
    let v = regret_value(horizon, eps)?;
    let v_bar = pseudoregret_value(horizon, eps)?;
    let u = cf.u_total(0.0, 0.0, 0.0, -t)?;
    let u_bar = cf.bar_u_total(0.0, 0.0, -t)?;
    let (c, c_bar) = prefactors_at(gamma)?;
    let mc = if spec.replications > 0 {
        Some(mc_estimate(strategy, horizon, eps, spec.replications, sub_seed(spec.seed, k as u64), 1, Arm::One)?)
    } else {
        None
    };
    Ok(ConvergenceRow {
        horizon,
        eps,
        gamma,
        v,
        v_bar,
        u,
        u_bar,
        v_minus_u: v - u,
        v_bar_minus_u_bar: v_bar - u_bar,
        v_norm: v / t.sqrt(),
        v_bar_norm: v_bar / t.sqrt(),
        c,
        c_bar,
        mc_regret_mean: mc.map(|m| m.regret_mean),
        mc_regret_se: mc.map(|m| m.regret_se),
        mc_pseudo_mean: mc.map(|m| m.pseudo_mean),
        mc_pseudo_se: mc.map(|m| m.pseudo_se),
    })
}

/// Exact values, PDE values and normalized values for every cell, with
/// Monte Carlo estimates of `strategy` when `replications > 0`.
pub fn convergence_sweep<S: Strategy + ?Sized>(spec: &SweepSpec, strategy: &S) -> Result<Vec<ConvergenceRow>> {
    spec.validate()?;
    spec.cells()
        .into_par_iter()
        .enumerate()
        .map(|(k, (t, eps))| convergence_cell(spec, k, t, eps, strategy))
        .collect()
}

/// Least-squares line through `(ln x, ln y)` with its coefficient of
/// determination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits `ln y = slope·ln x + intercept`. Needs two or more positive pairs.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 || xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidSweep("log-log fit needs at least two positive finite points".into()));
    }
    let points: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidSweep("log-log fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(ScalingFit { points, slope, intercept, r2 })
}

/// Which value the error fit compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Regret,
    Pseudoregret,
}

/// Leading error term of the branch: `ε²T` for C1, `ε³T` for C0.
pub fn dominant_term(branch: BranchChoice, horizon: u64, eps: f64) -> f64 {
    let t = horizon as f64;
    match branch {
        BranchChoice::C1 => eps * eps * t,
        BranchChoice::C0 => eps.powi(3) * t,
    }
}

/// Checks that the leading error term beats the others tenfold:
/// `ε²T >= 10(ε ln T + 1)` for C1 and `ε³T >= 10(ε²√T + ε ln T + 1)` for C0.
pub fn check_dominance(branch: BranchChoice, horizon: u64, eps: f64) -> Result<()> {
    let t = horizon as f64;
    let lead = dominant_term(branch, horizon, eps);
    let rest = match branch {
        BranchChoice::C1 => eps * t.ln() + 1.0,
        BranchChoice::C0 => eps * eps * t.sqrt() + eps * t.ln() + 1.0,
    };
    if lead >= 10.0 * rest {
        Ok(())
    } else {
        Err(Error::DominanceFailed {
            horizon,
            eps,
            detail: format!("{} leading term {lead:.6} < 10 x remainder {rest:.6}", branch.name()),
        })
    }
}

/// One row of `error_scaling.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub horizon: u64,
    pub eps: f64,
    pub branch: BranchChoice,
    pub target: Target,
    pub predictor: f64,
    pub abs_diff: f64,
    pub dominant: bool,
}

/// `|u - v|` (or `|ū - v̄|`) per cell, with the dominance check recorded
/// rather than enforced.
pub fn error_scaling_rows(spec: &SweepSpec, target: Target) -> Result<Vec<ScalingRow>> {
    spec.validate()?;
    spec.cells()
        .into_par_iter()
        .map(|(horizon, eps)| {
            let cf = spec.branch.closed_form(eps)?;
            let t = horizon as f64;
            let abs_diff = match target {
                Target::Regret => (cf.u_total(0.0, 0.0, 0.0, -t)? - regret_value(horizon, eps)?).abs(),
                Target::Pseudoregret => (cf.bar_u_total(0.0, 0.0, -t)? - pseudoregret_value(horizon, eps)?).abs(),
            };
            Ok(ScalingRow {
                horizon,
                eps,
                branch: spec.branch,
                target,
                predictor: dominant_term(spec.branch, horizon, eps),
                abs_diff,
                dominant: check_dominance(spec.branch, horizon, eps).is_ok(),
            })
        })
        .collect()
}

/// Fits `ln|u - v|` against the log of the branch's leading error term.
/// Refuses when any cell fails the dominance precondition.
pub fn error_scaling_fit(spec: &SweepSpec, target: Target) -> Result<ScalingFit> {
    spec.validate()?;
    for (t, eps) in spec.cells() {
        check_dominance(spec.branch, t, eps)?;
    }
    let rows = error_scaling_rows(spec, target)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.predictor).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.abs_diff).collect();
    loglog_fit(&xs, &ys)
}

/// `ε·v(0,0,-T)` at `ε = T^{-a}`; tends to 1 for `a ∈ (1/4, 1/2)`.
pub fn large_gap_value_law(horizon: u64, a: f64) -> Result<f64> {
    let eps = (horizon as f64).powf(-a);
    Ok(eps * regret_value(horizon, eps)?)
}

/// `v̄(0,0,-T)/(εT)` at `ε = T^{-a}`; tends to 1 for `a > 1/2`.
pub fn small_gap_pseudo_law(horizon: u64, a: f64) -> Result<f64> {
    let eps = (horizon as f64).powf(-a);
    Ok(pseudoregret_value(horizon, eps)? / (eps * horizon as f64))
}

/// Evenly spaced `γ` values `lo, lo + step, …` through `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GammaGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo > 0.0 && hi <= 5.0 && lo <= hi && step > 0.0) {
            return Err(Error::InvalidSweep(format!("gamma grid must satisfy 0 < lo <= hi <= 5, step > 0; got {lo}:{hi}:{step}")));
        }
        Ok(Self { lo, hi, step })
    }

    /// Parses `lo:hi:step`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid must be lo:hi:step, got {text:?}")));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("grid value {s:?}: {e}")));
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as usize + 1;
        (0..n).map(|i| self.lo + self.step * i as f64).collect()
    }
}

/// One row of `figure_c.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureRow {
    pub gamma: f64,
    pub c: f64,
    pub c_bar: f64,
    pub c_max: bool,
    pub c_bar_max: bool,
}

/// `c` and `c̄` on the grid; the rows nearest each maximizer are flagged.
pub fn figure_data(grid: &GammaGrid) -> Result<Vec<FigureRow>> {
    let points = grid.points();
    let nearest = |target: f64| {
        points
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            .map(|(i, _)| i)
    };
    let c_star = nearest(maximize_prefactor(Prefactor::C)?.gamma);
    let c_bar_star = nearest(maximize_prefactor(Prefactor::CBar)?.gamma);
    points
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            Ok(FigureRow {
                gamma: g,
                c: prefactor_c(g)?,
                c_bar: prefactor_c_bar(g)?,
                c_max: Some(i) == c_star,
                c_bar_max: Some(i) == c_bar_star,
            })
        })
        .collect()
}

/// Result of one named invariant check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn record(checks: &mut Vec<InvariantCheck>, name: String, passed: bool, detail: String) {
    checks.push(InvariantCheck { name, passed, detail });
}

/// Brute-force optimality of the myopic player at `T <= max_brute`, and the
/// exactness invariants of the value recursions at `T <= 12`, for each gap.
pub fn invariant_suite(gaps: &[f64], grid: u32, max_brute: u64) -> Result<Vec<InvariantCheck>> {
    let mut checks = Vec::new();
    for &eps in gaps {
        check_gap(eps)?;
        for t in 1..=max_brute {
            let r = brute_force_minimax(t, eps, grid)?;
            record(
                &mut checks,
                format!("myopic minimax within grid bound (T={t}, eps={eps})"),
                r.achieved_by_myopic,
                format!("grid min {:.12}, myopic {:.12}, slack {:.4}", r.value, r.myopic_value, r.lipschitz_slack),
            );
        }
        let mut worst_full = 0.0f64;
        let mut worst_swap = 0.0f64;
        for t in 1..=FULL_LIMIT {
            let fast = regret_value(t, eps)?;
            worst_full = worst_full.max((regret_value_full(t, eps, Arm::One)? - fast).abs());
            worst_swap = worst_swap.max((fast - regret_value_with_safe(t, eps, Arm::Two)?).abs());
            worst_swap = worst_swap.max((pseudoregret_value(t, eps)? - pseudoregret_value_with_safe(t, eps, Arm::Two)?).abs());
        }
        record(
            &mut checks,
            format!("full recursion equals reduced recursion (T<=12, eps={eps})"),
            worst_full <= 1e-12,
            format!("max difference {worst_full:.3e}"),
        );
        record(
            &mut checks,
            format!("indifference under safe-arm swap (T<=12, eps={eps})"),
            worst_swap <= 1e-12,
            format!("max difference {worst_swap:.3e}"),
        );
        let v1 = regret_value(1, eps)?;
        let vb1 = pseudoregret_value(1, eps)?;
        let ok = (v1 - 0.5 * (1.0 + eps * eps)).abs() <= 2.0 * f64::EPSILON && (vb1 - eps).abs() <= 2.0 * f64::EPSILON;
        record(&mut checks, format!("one-round values (eps={eps})"), ok, format!("v={v1}, v_bar={vb1}"));
    }
    Ok(checks)
}

/// Writes `rows` as CSV after three `#` header lines: the artifact version,
/// the table kind and the generating configuration as JSON.
pub fn write_versioned_csv<W: Write, C: Serialize, R: Serialize>(mut out: W, kind: &str, config: &C, rows: &[R]) -> Result<()> {
    writeln!(out, "# symbandit {VERSION}")?;
    writeln!(out, "# kind: {kind}")?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{Myopic, Uniform};

    fn spec(horizons: Vec<u64>, gap: GapRule) -> SweepSpec {
        SweepSpec { regime: Regime::Medium, horizons, gap, branch: BranchChoice::C1, seed: 7, replications: 0 }
    }

    #[test]
    fn mc_is_deterministic_across_worker_counts() {
        let a = mc_estimate(&Myopic, 20, 0.2, 40_000, 11, 1, Arm::One).unwrap();
        let b = mc_estimate(&Myopic, 20, 0.2, 40_000, 11, 3, Arm::One).unwrap();
        assert_eq!(a, b);
        let c = mc_estimate(&Myopic, 20, 0.2, 40_000, 12, 1, Arm::One).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn mc_edge_cases() {
        let zero = mc_estimate(&Myopic, 15, 0.0, 5_000, 1, 2, Arm::One).unwrap();
        assert_eq!(zero.pseudo_mean, 0.0);
        assert_eq!(zero.pseudo_se, 0.0);
        assert!(mc_estimate(&Myopic, 15, 1.0, 10, 1, 1, Arm::One).is_err());
        assert!(mc_estimate(&Myopic, 15, 0.1, 0, 1, 1, Arm::One).is_err());
        let u = mc_estimate(&Uniform, 50, 0.3, 100_000, 5, 0, Arm::One).unwrap();
        assert!((u.pseudo_mean - 0.3 * 50.0).abs() < 4.0 * u.pseudo_se);
    }

    #[test]
    fn mc_agrees_with_dp_small() {
        let est = mc_estimate(&Myopic, 30, 0.15, 200_000, 3, 0, Arm::One).unwrap();
        let v = regret_value(30, 0.15).unwrap();
        let vb = pseudoregret_value(30, 0.15).unwrap();
        assert!((est.regret_mean - v).abs() < 4.0 * est.regret_se);
        assert!((est.pseudo_mean - vb).abs() < 4.0 * est.pseudo_se);
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
        assert_eq!(sub_seed(9, 4), sub_seed(9, 4));
    }

    #[test]
    fn spec_validation() {
        assert!(spec(vec![1, 4, 9], GapRule::Gamma(0.5)).validate().is_ok());
        assert!(spec(vec![4, 1], GapRule::Gamma(0.5)).validate().is_err());
        assert!(spec(vec![], GapRule::Gamma(0.5)).validate().is_err());
        assert!(spec(vec![1], GapRule::Gamma(2.0)).validate().is_err());
        assert!(spec(vec![10], GapRule::Fixed(vec![])).validate().is_err());
        assert_eq!(spec(vec![4, 9], GapRule::Fixed(vec![0.1, 0.2])).cells().len(), 4);
    }

    #[test]
    fn one_round_row() {
        let rows = convergence_sweep(&spec(vec![1], GapRule::Fixed(vec![0.3])), &Myopic).unwrap();
        assert!((rows[0].v - 0.545).abs() < 1e-15);
        assert!((rows[0].v_bar - 0.3).abs() < 1e-15);
        assert!(rows[0].mc_regret_mean.is_none());
    }

    #[test]
    fn sweep_rows_follow_cell_order() {
        let mut s = spec(vec![16, 64, 256], GapRule::Gamma(0.707));
        s.replications = 2_000;
        let rows = convergence_sweep(&s, &Myopic).unwrap();
        assert_eq!(rows.iter().map(|r| r.horizon).collect::<Vec<_>>(), vec![16, 64, 256]);
        let again = convergence_sweep(&s, &Myopic).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn loglog_fit_recovers_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        let fit = loglog_fit(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(loglog_fit(&[1.0], &[1.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn dominance_is_enforced() {
        assert!(check_dominance(BranchChoice::C1, 4096, 0.2).is_ok());
        assert!(check_dominance(BranchChoice::C1, 4096, 0.05).is_err());
        assert!(check_dominance(BranchChoice::C0, 4096, 0.2).is_err());
        let s = spec(vec![4096], GapRule::Fixed(vec![0.05, 0.1]));
        assert!(matches!(error_scaling_fit(&s, Target::Regret), Err(Error::DominanceFailed { .. })));
    }

    #[test]
    fn grid_parsing() {
        let g = GammaGrid::parse("0.01:5:0.01").unwrap();
        assert_eq!(g.points().len(), 500);
        assert!(GammaGrid::parse("0:5:0.01").is_err());
        assert!(GammaGrid::parse("0.1:6:0.1").is_err());
        assert!(GammaGrid::parse("0.1:1").is_err());
        assert!(GammaGrid::parse("a:1:0.1").is_err());
    }

    #[test]
    fn figure_flags_maxima() {
        let rows = figure_data(&GammaGrid::parse("0.01:5:0.01").unwrap()).unwrap();
        let c = rows.iter().find(|r| r.c_max).unwrap();
        let cb = rows.iter().find(|r| r.c_bar_max).unwrap();
        assert!((c.gamma - 0.71).abs() < 1e-12);
        assert!((c.c - 0.572).abs() < 1e-3);
        assert!((cb.gamma - 1.25).abs() < 1e-12);
        assert!((cb.c_bar - 0.530).abs() < 1e-3);
        assert_eq!(rows.iter().filter(|r| r.c_max).count(), 1);
        assert!((rows[0].c - 0.564).abs() < 1e-3);
        assert!((rows[0].c_bar - 0.01).abs() < 1e-3);
    }

    #[test]
    fn invariant_suite_passes() {
        let checks = invariant_suite(&[0.1, 0.5], 11, 2).unwrap();
        assert_eq!(checks.len(), 2 * (2 + 3));
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert!(invariant_suite(&[1.5], 11, 1).is_err());
    }

    #[test]
    fn csv_header_and_roundtrip() {
        let rows = vec![FigureRow { gamma: 0.5, c: 0.1, c_bar: 0.2, c_max: false, c_bar_max: true }];
        let mut buf = Vec::new();
        write_versioned_csv(&mut buf, "figure_c", &serde_json::json!({"grid": "0.5:0.5:1"}), &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# symbandit {VERSION}"));
        assert_eq!(lines[1], "# kind: figure_c");
        assert!(lines[2].starts_with("# config: {"));
        assert_eq!(lines[3], "gamma,c,c_bar,c_max,c_bar_max");
        assert_eq!(lines[4], "0.5,0.1,0.2,false,true");
    }
}
