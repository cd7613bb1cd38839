//! The symmetric two-armed Bernoulli bandit on the centered `±1` scale.
//!
//! Every sampling entry point takes an explicit seed. Episode `i` of a run
//! with master seed `s` draws from ChaCha8 keyed by `s` on stream `i`
//! ([`episode_rng`]), so results do not depend on how episodes are spread
//! across workers.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_gap, Error, Result};
use crate::game::{Arm, RegretState};
use crate::strategy::Strategy;

/// Centered rewards of both arms in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RewardPair {
    pub g1: i8,
    pub g2: i8,
}

impl RewardPair {
    pub fn new(g1: i8, g2: i8) -> Result<Self> {
        if g1.abs() != 1 || g2.abs() != 1 {
            return Err(Error::Parse(format!("rewards must be ±1, got ({g1}, {g2})")));
        }
        Ok(Self { g1, g2 })
    }

    pub fn of(&self, arm: Arm) -> i8 {
        match arm {
            Arm::One => self.g1,
            Arm::Two => self.g2,
        }
    }
}

/// Maps a raw `{0, 1}` reward to the centered scale `2g - 1`.
pub fn centered(raw: u8) -> Result<i8> {
    match raw {
        0 => Ok(-1),
        1 => Ok(1),
        _ => Err(Error::Parse(format!("raw reward must be 0 or 1, got {raw}"))),
    }
}

/// RNG for episode `index` of a run seeded with `master_seed`.
pub fn episode_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// A validated environment: gap and the secret safe arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricBandit {
    gap: f64,
    safe: Arm,
}

impl SymmetricBandit {
    pub fn new(gap: f64, safe: Arm) -> Result<Self> {
        check_gap(gap)?;
        Ok(Self { gap, safe })
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn safe(&self) -> Arm {
        self.safe
    }

    /// Probability that arm `arm` pays `+1`.
    pub fn win_probability(&self, arm: Arm) -> f64 {
        if arm == self.safe {
            0.5 * (1.0 + self.gap)
        } else {
            0.5 * (1.0 - self.gap)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RewardPair {
        let draw = |rng: &mut R, p: f64| if rng.random::<f64>() < p { 1 } else { -1 };
        let g1 = draw(rng, self.win_probability(Arm::One));
        let g2 = draw(rng, self.win_probability(Arm::Two));
        RewardPair { g1, g2 }
    }
}

/// Draws one round of rewards: the safe arm pays `+1` with probability
/// `(1+ε)/2`, the risky arm with `(1-ε)/2`, independently.
pub fn sample_rewards<R: Rng + ?Sized>(rng: &mut R, eps: f64, safe: Arm) -> Result<RewardPair> {
    Ok(SymmetricBandit::new(eps, safe)?.sample(rng))
}

/// Advances the state by one round.
pub fn step(state: RegretState, choice: Arm, rewards: RewardPair) -> Result<RegretState> {
    if state.t >= 0 {
        return Err(Error::NonNegativeTime(state.t as f64));
    }
    let (g1, g2) = (i64::from(rewards.g1), i64::from(rewards.g2));
    let chosen = i64::from(rewards.of(choice));
    let (xi_r, xi_h) = match choice {
        Arm::One => (state.xi_r + g1, state.xi_h - g2),
        Arm::Two => (state.xi_r - g2, state.xi_h + g1),
    };
    Ok(RegretState {
        eta: state.eta + g1 + g2 - 2 * chosen,
        xi_h,
        xi_r,
        t: state.t + 1,
    })
}

/// Samples the arm pulled under a decision. A coin is only drawn when the
/// decision is genuinely mixed.
pub fn choose<R: Rng + ?Sized>(rng: &mut R, p1: f64) -> Arm {
    if p1 >= 1.0 {
        Arm::One
    } else if p1 <= 0.0 {
        Arm::Two
    } else if rng.random::<f64>() < p1 {
        Arm::One
    } else {
        Arm::Two
    }
}

/// Summary of one play-through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOutcome {
    pub final_state: RegretState,
    pub final_regret: f64,
    pub risky_pulls: u64,
}

/// Plays `horizon` rounds of `strategy` against `bandit`, reporting every
/// round to `observe(choice, rewards, state_after)`.
pub fn play<R, S, F>(rng: &mut R, bandit: &SymmetricBandit, strategy: &S, horizon: u64, mut observe: F) -> EpisodeOutcome
where
    R: Rng + ?Sized,
    S: Strategy + ?Sized,
    F: FnMut(Arm, RewardPair, &RegretState),
{
    let mut state = RegretState::origin(horizon);
    let mut risky_pulls = 0;
    let risky = bandit.safe().other();
    while state.t < 0 {
        let p1 = strategy.decide(state.t, state.xi_r).p1();
        let choice = choose(rng, p1);
        let rewards = bandit.sample(rng);
        state = step(state, choice, rewards).expect("t < 0 inside the loop");
        if choice == risky {
            risky_pulls += 1;
        }
        observe(choice, rewards, &state);
    }
    EpisodeOutcome {
        final_state: state,
        final_regret: state.payoff(),
        risky_pulls,
    }
}

/// Full audit record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeLog {
    pub seed: u64,
    pub index: u64,
    pub choices: Vec<Arm>,
    pub rewards: Vec<RewardPair>,
    /// States from `t = -T` through `t = 0` inclusive.
    pub trajectory: Vec<RegretState>,
    pub final_regret: f64,
    pub risky_pulls: u64,
}

impl EpisodeLog {
    /// Replays episode `index` of master seed `seed`.
    pub fn record<S: Strategy + ?Sized>(bandit: &SymmetricBandit, strategy: &S, horizon: u64, seed: u64, index: u64) -> Self {
        let mut rng = episode_rng(seed, index);
        let n = horizon as usize;
        let mut choices = Vec::with_capacity(n);
        let mut rewards = Vec::with_capacity(n);
        let mut trajectory = Vec::with_capacity(n + 1);
        trajectory.push(RegretState::origin(horizon));
        let outcome = play(&mut rng, bandit, strategy, horizon, |c, r, s| {
            choices.push(c);
            rewards.push(r);
            trajectory.push(*s);
        });
        Self {
            seed,
            index,
            choices,
            rewards,
            trajectory,
            final_regret: outcome.final_regret,
            risky_pulls: outcome.risky_pulls,
        }
    }

    /// One line: `seed index choices rewards final_regret risky_pulls`, where
    /// choices are digits `1`/`2` and rewards are `+`/`-` pairs per round
    /// separated by commas.
    pub fn to_record_line(&self) -> String {
        let choices: String = self.choices.iter().map(|a| char::from(b'0' + a.index())).collect();
        let mut rewards = String::with_capacity(3 * self.rewards.len());
        for (i, r) in self.rewards.iter().enumerate() {
            if i > 0 {
                rewards.push(',');
            }
            let sign = |g: i8| if g > 0 { '+' } else { '-' };
            rewards.push(sign(r.g1));
            rewards.push(sign(r.g2));
        }
        let mut line = String::new();
        write!(
            line,
            "{} {} {} {} {} {}",
            self.seed,
            self.index,
            if choices.is_empty() { "-" } else { &choices },
            if rewards.is_empty() { "-" } else { &rewards },
            self.final_regret,
            self.risky_pulls
        )
        .expect("writing to a String cannot fail");
        line
    }
}

/// Parsed form of an audit line; the trajectory is rebuilt from the
/// choices and rewards, so the line is self-checking.
pub fn parse_record_line(line: &str, safe: Arm) -> Result<EpisodeLog> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(Error::Parse(format!("expected 6 fields, got {}", fields.len())));
    }
    let num = |s: &str| s.parse::<u64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
    let seed = num(fields[0])?;
    let index = num(fields[1])?;
    let choices = if fields[2] == "-" {
        Vec::new()
    } else {
        fields[2]
            .bytes()
            .map(|b| Arm::from_index(b.wrapping_sub(b'0')))
            .collect::<Result<Vec<_>>>()?
    };
    let rewards = if fields[3] == "-" {
        Vec::new()
    } else {
        fields[3]
            .split(',')
            .map(|pair| {
                let sign = |c: u8| match c {
                    b'+' => Ok(1),
                    b'-' => Ok(-1),
                    _ => Err(Error::Parse(format!("bad reward symbol in {pair}"))),
                };
                match pair.as_bytes() {
                    [a, b] => RewardPair::new(sign(*a)?, sign(*b)?),
                    _ => Err(Error::Parse(format!("bad reward pair {pair}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?
    };
    if choices.len() != rewards.len() {
        return Err(Error::LengthMismatch(choices.len(), rewards.len()));
    }
    let final_regret: f64 = fields[4].parse().map_err(|e| Error::Parse(format!("{}: {e}", fields[4])))?;
    let risky_pulls = num(fields[5])?;

    let mut state = RegretState::origin(choices.len() as u64);
    let mut trajectory = vec![state];
    for (&c, &r) in choices.iter().zip(&rewards) {
        state = step(state, c, r)?;
        trajectory.push(state);
    }
    let risky = safe.other();
    let counted = choices.iter().filter(|&&c| c == risky).count() as u64;
    if counted != risky_pulls || state.payoff() != final_regret {
        return Err(Error::Parse("record is inconsistent with its choices and rewards".into()));
    }
    Ok(EpisodeLog {
        seed,
        index,
        choices,
        rewards,
        trajectory,
        final_regret,
        risky_pulls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{Myopic, Uniform};
    use proptest::prelude::*;

    fn pair(g1: i8, g2: i8) -> RewardPair {
        RewardPair::new(g1, g2).unwrap()
    }

    #[test]
    fn step_examples() {
        let s = RegretState { eta: 0, xi_h: 0, xi_r: 0, t: -3 };
        assert_eq!(step(s, Arm::One, pair(1, -1)).unwrap(), RegretState { eta: -2, xi_h: 1, xi_r: 1, t: -2 });
        assert_eq!(step(s, Arm::Two, pair(1, -1)).unwrap(), RegretState { eta: 2, xi_h: 1, xi_r: 1, t: -2 });
        assert!(step(RegretState::default(), Arm::One, pair(1, 1)).is_err());
    }

    #[test]
    fn rejects_bad_gap_and_rewards() {
        let mut rng = episode_rng(1, 0);
        assert!(sample_rewards(&mut rng, 1.0, Arm::One).is_err());
        assert!(sample_rewards(&mut rng, -0.2, Arm::One).is_err());
        assert!(RewardPair::new(0, 1).is_err());
        assert_eq!(centered(0).unwrap(), -1);
        assert_eq!(centered(1).unwrap(), 1);
        assert!(centered(2).is_err());
    }

    #[test]
    fn degenerate_gap_is_nearly_deterministic() {
        let mut rng = episode_rng(7, 0);
        let wins = (0..1000)
            .filter(|_| sample_rewards(&mut rng, 1.0 - 1e-9, Arm::One).unwrap().g1 == 1)
            .count();
        assert_eq!(wins, 1000);
    }

    #[test]
    fn zero_gap_is_a_fair_coin() {
        let mut rng = episode_rng(11, 0);
        let n = 200_000;
        let (mut s1, mut s2) = (0i64, 0i64);
        for _ in 0..n {
            let r = sample_rewards(&mut rng, 0.0, Arm::One).unwrap();
            s1 += i64::from(r.g1);
            s2 += i64::from(r.g2);
        }
        let se = (n as f64).sqrt();
        assert!((s1 as f64).abs() < 4.0 * se);
        assert!((s2 as f64).abs() < 4.0 * se);
    }

    #[test]
    fn safe_arm_mean_matches_binomial_standard_error() {
        let mut rng = episode_rng(2024, 3);
        let n = 1_000_000;
        let eps = 0.2;
        let (mut s1, mut s2) = (0i64, 0i64);
        for _ in 0..n {
            let r = sample_rewards(&mut rng, eps, Arm::One).unwrap();
            s1 += i64::from(r.g1);
            s2 += i64::from(r.g2);
        }
        // Var(g) = 1 - ε².
        let se = ((1.0 - eps * eps) / n as f64).sqrt();
        assert!((s1 as f64 / n as f64 - eps).abs() < 3.0 * se);
        assert!((s2 as f64 / n as f64 + eps).abs() < 3.0 * se);
    }

    #[test]
    fn episode_log_invariants() {
        let bandit = SymmetricBandit::new(0.1, Arm::One).unwrap();
        let log = EpisodeLog::record(&bandit, &Myopic, 50, 99, 4);
        assert_eq!(log.trajectory.len(), 51);
        assert_eq!(log.trajectory.last().unwrap().t, 0);
        assert_eq!(log.final_regret, log.trajectory.last().unwrap().payoff());
        let twos = log.choices.iter().filter(|&&c| c == Arm::Two).count() as u64;
        assert_eq!(log.risky_pulls, twos);
        let again = EpisodeLog::record(&bandit, &Myopic, 50, 99, 4);
        assert_eq!(log, again);
    }

    #[test]
    fn record_line_roundtrip() {
        let bandit = SymmetricBandit::new(0.3, Arm::Two).unwrap();
        let log = EpisodeLog::record(&bandit, &Uniform, 20, 5, 17);
        let back = parse_record_line(&log.to_record_line(), Arm::Two).unwrap();
        assert_eq!(back, log);
        assert!(parse_record_line("1 2 12 ++ 0 0", Arm::One).is_err());
    }

    proptest! {
        #[test]
        fn increments_respect_invariants(
            eta in -20i64..20, xh in -20i64..20, xr in -20i64..20,
            two in any::<bool>(), g1 in prop_oneof![Just(-1i8), Just(1i8)], g2 in prop_oneof![Just(-1i8), Just(1i8)],
        ) {
            let s = RegretState { eta, xi_h: xh, xi_r: xr, t: -1 };
            let choice = if two { Arm::Two } else { Arm::One };
            let n = step(s, choice, pair(g1, g2)).unwrap();
            prop_assert!([-2, 0, 2].contains(&(n.eta - s.eta)));
            prop_assert_eq!((n.xi_r - s.xi_r).abs(), 1);
            prop_assert_eq!((n.xi_h - s.xi_h).abs(), 1);
            prop_assert_eq!(n.zeta() - s.zeta(), i64::from(g1 - g2));
        }
    }
}
