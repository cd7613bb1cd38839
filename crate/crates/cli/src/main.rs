//! `symbandit` command-line entry point.
//!
//! Usage errors exit with status 2 (from clap); violated numeric
//! preconditions exit with status 1 and name the invariant.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use symbandit::dp::{pseudoregret_value, regret_value};
use symbandit::env::{EpisodeLog, SymmetricBandit};
use symbandit::experiments::{
    convergence_sweep, error_scaling_rows, figure_data, invariant_suite, mc_estimate, BranchChoice, GammaGrid, SweepSpec, Target,
};
use symbandit::pde::{maximize_prefactor, Prefactor};
use symbandit::strategy::{Myopic, Strategy, TabularStrategy, Uniform};
use symbandit::{Arm, Error, GameParams, Result};

use output::{Emitter, Format};

#[derive(Parser, Debug)]
#[command(name = "symbandit", version, about = "Exact and PDE-approximate minimax regret of the symmetric two-armed bandit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Output format; defaults to the --out extension, else text
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print numbers with 3 decimals
    #[arg(long, global = true)]
    paper: bool,

    /// Master seed, recorded in every output
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

/// Horizon and gap; exactly one of `--eps` and `--gamma`.
#[derive(Args, Debug, Clone, Serialize)]
#[group(skip)]
struct GameArgs {
    /// Horizon T
    #[arg(long = "T")]
    horizon: u64,

    /// Gap; ε = γ/√T when --gamma is given instead
    #[arg(long, required_unless_present = "gamma", conflicts_with = "gamma")]
    eps: Option<f64>,

    /// Regime parameter γ = ε√T
    #[arg(long)]
    gamma: Option<f64>,
}

impl GameArgs {
    fn params(&self) -> Result<GameParams> {
        match (self.eps, self.gamma) {
            (Some(eps), _) => GameParams::new(self.horizon, eps),
            (_, Some(gamma)) => GameParams::from_gamma(self.horizon, gamma),
            (None, None) => unreachable!("clap enforces the gap group"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum Which {
    C,
    CBar,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum SweepKind {
    Convergence,
    ErrorScaling,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Exact regret v and pseudoregret v̄ of the myopic player at the origin
    Dp {
        #[command(flatten)]
        game: GameArgs,
    },
    /// PDE solutions u, ū and their components at a point
    Pde {
        #[command(flatten)]
        game: GameArgs,
        /// Solution branch
        #[arg(long, value_enum, default_value_t = Branch::C1)]
        branch: Branch,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        eta: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        xi_h: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        xi_r: f64,
        #[arg(long, default_value_t = 0.0)]
        s2: f64,
    },
    /// Prefactors c(γ), c̄(γ), or their maximizers when --gamma is absent
    Prefactor {
        #[arg(long, value_enum, default_value_t = Which::Both)]
        which: Which,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Monte Carlo estimate of regret and pseudoregret
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        /// Number of episodes
        #[arg(long, default_value_t = 100_000)]
        episodes: u64,
        /// Worker threads (0 = all cores); results do not depend on it
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// myopic, uniform, or table:<path>
        #[arg(long, default_value = "myopic")]
        strategy: String,
        /// Which arm is safe (1 or 2)
        #[arg(long, default_value_t = 1)]
        safe: u8,
        /// Write audit lines for the first --log-episodes episodes here
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        log_episodes: u64,
    },
    /// Run a sweep described by a TOML file
    Sweep {
        /// Sweep specification (TOML)
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = SweepKind::Convergence)]
        kind: SweepKind,
        /// Value compared by error-scaling sweeps
        #[arg(long, value_enum, default_value_t = TargetArg::Regret)]
        target: TargetArg,
        /// Strategy simulated when the sweep has replications
        #[arg(long, default_value = "myopic")]
        strategy: String,
    },
    /// Prefactor curves c(γ), c̄(γ) on a grid
    Figure {
        /// lo:hi:step with 0 < lo <= hi <= 5
        #[arg(long, default_value = "0.01:5:0.01")]
        grid: String,
    },
    /// Brute-force minimax certificate and recursion invariants
    Verify {
        /// Gaps to check
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5])]
        eps: Vec<f64>,
        /// Probability levels per decision
        #[arg(long, default_value_t = 51)]
        grid: u32,
        /// Largest brute-force horizon (at most 3)
        #[arg(long = "T", default_value_t = 2)]
        horizon: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum Branch {
    C1,
    C0,
}

impl From<Branch> for BranchChoice {
    fn from(b: Branch) -> Self {
        match b {
            Branch::C1 => BranchChoice::C1,
            Branch::C0 => BranchChoice::C0,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum TargetArg {
    Regret,
    Pseudoregret,
}

/// Everything needed to reproduce an output: the subcommand with its
/// parameters and the common flags.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    command: &'a Command,
    #[serde(flatten)]
    common: &'a Common,
}

fn load_strategy(spec: &str) -> Result<Box<dyn Strategy>> {
    match spec {
        "myopic" => Ok(Box::new(Myopic)),
        "uniform" => Ok(Box::new(Uniform)),
        other => match other.strip_prefix("table:") {
            Some(path) => Ok(Box::new(TabularStrategy::from_text(&fs::read_to_string(path)?)?)),
            None => Err(Error::Parse(format!("unknown strategy {other:?}; expected myopic, uniform or table:<path>"))),
        },
    }
}

#[derive(Serialize)]
struct DpResult {
    horizon: u64,
    eps: f64,
    gamma: f64,
    v: f64,
    v_bar: f64,
}

#[derive(Serialize)]
struct PdeResult {
    horizon: u64,
    eps: f64,
    gamma: f64,
    t: f64,
    b: f64,
    u: f64,
    u_h: f64,
    u_n: f64,
    phi: f64,
    phi_hat: f64,
    u_bar: f64,
    phi_bar: f64,
    phi_bar_hat: f64,
}

#[derive(Serialize)]
struct PrefactorRow {
    which: &'static str,
    gamma: f64,
    value: f64,
    maximizer: bool,
}

#[derive(Serialize)]
struct SimulateResult {
    horizon: u64,
    eps: f64,
    gamma: f64,
    strategy: String,
    safe: u8,
    episodes: u64,
    seed: u64,
    regret_mean: f64,
    regret_se: f64,
    pseudo_mean: f64,
    pseudo_se: f64,
    /// Exact value of the myopic player, for comparison.
    myopic_v: f64,
    myopic_v_bar: f64,
}

fn run(cli: &Cli) -> Result<()> {
    let config = RunConfig { command: &cli.command, common: &cli.common };
    let emit = Emitter::new(&cli.common, &config);
    match &cli.command {
        Command::Dp { game } => {
            let p = game.params()?;
            let row = DpResult {
                horizon: p.horizon(),
                eps: p.gap(),
                gamma: p.gamma(),
                v: regret_value(p.horizon(), p.gap())?,
                v_bar: pseudoregret_value(p.horizon(), p.gap())?,
            };
            emit.single("dp", &row)
        }
        Command::Pde { game, branch, eta, xi_h, xi_r, s2 } => {
            let p = game.params()?;
            let cf = BranchChoice::from(*branch).closed_form(p.gap())?;
            let t = -(p.horizon() as f64);
            let row = PdeResult {
                horizon: p.horizon(),
                eps: p.gap(),
                gamma: p.gamma(),
                t,
                b: cf.b,
                u: cf.u_total(*eta, *xi_h, *xi_r, t)?,
                u_h: cf.u_h(*eta, *xi_h, *xi_r, t)?,
                u_n: cf.u_n(*xi_r, t)?,
                phi: cf.phi_fn(*xi_r),
                phi_hat: cf.phi_hat(*xi_r, t)?,
                u_bar: cf.bar_u_total(*xi_r, *s2, t)?,
                phi_bar: cf.phi_bar(*xi_r),
                phi_bar_hat: cf.phi_bar_hat(*xi_r, t)?,
            };
            emit.single("pde", &row)
        }
        Command::Prefactor { which, gamma } => {
            let kinds: &[Prefactor] = match which {
                Which::C => &[Prefactor::C],
                Which::CBar => &[Prefactor::CBar],
                Which::Both => &[Prefactor::C, Prefactor::CBar],
            };
            let mut rows = Vec::new();
            for &k in kinds {
                rows.push(match gamma {
                    Some(g) => PrefactorRow { which: k.name(), gamma: *g, value: k.eval(*g)?, maximizer: false },
                    None => {
                        let m = maximize_prefactor(k)?;
                        PrefactorRow { which: k.name(), gamma: m.gamma, value: m.value, maximizer: true }
                    }
                });
            }
            emit.table("prefactor", &rows)
        }
        Command::Simulate { game, episodes, workers, strategy, safe, log, log_episodes } => {
            let p = game.params()?;
            let safe_arm = Arm::from_index(*safe)?;
            let player = load_strategy(strategy)?;
            let seed = cli.common.seed;
            let est = mc_estimate(player.as_ref(), p.horizon(), p.gap(), *episodes, seed, *workers, safe_arm)?;
            if let Some(path) = log {
                let bandit = SymmetricBandit::new(p.gap(), safe_arm)?;
                let mut text = String::new();
                for i in 0..(*log_episodes).min(*episodes) {
                    text.push_str(&EpisodeLog::record(&bandit, player.as_ref(), p.horizon(), seed, i).to_record_line());
                    text.push('\n');
                }
                fs::write(path, text)?;
            }
            let row = SimulateResult {
                horizon: p.horizon(),
                eps: p.gap(),
                gamma: p.gamma(),
                strategy: player.name(),
                safe: *safe,
                episodes: *episodes,
                seed,
                regret_mean: est.regret_mean,
                regret_se: est.regret_se,
                pseudo_mean: est.pseudo_mean,
                pseudo_se: est.pseudo_se,
                myopic_v: regret_value(p.horizon(), p.gap())?,
                myopic_v_bar: pseudoregret_value(p.horizon(), p.gap())?,
            };
            emit.single("simulate", &row)
        }
        Command::Sweep { config: path, kind, target, strategy } => {
            let text = fs::read_to_string(path)?;
            let spec: SweepSpec = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let sweep_config = serde_json::json!({ "run": &config, "spec": &spec });
            let emit = Emitter::new(&cli.common, &sweep_config);
            match kind {
                SweepKind::Convergence => {
                    let player = load_strategy(strategy)?;
                    emit.table("convergence", &convergence_sweep(&spec, player.as_ref())?)
                }
                SweepKind::ErrorScaling => {
                    let target = match target {
                        TargetArg::Regret => Target::Regret,
                        TargetArg::Pseudoregret => Target::Pseudoregret,
                    };
                    emit.table("error_scaling", &error_scaling_rows(&spec, target)?)
                }
            }
        }
        Command::Figure { grid } => emit.table("figure_c", &figure_data(&GammaGrid::parse(grid)?)?),
        Command::Verify { eps, grid, horizon } => {
            let checks = invariant_suite(eps, *grid, *horizon)?;
            emit.table("verify", &checks)?;
            match checks.iter().find(|c| !c.passed) {
                Some(c) => Err(Error::InvalidSweep(format!("invariant violated: {} ({})", c.name, c.detail))),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
