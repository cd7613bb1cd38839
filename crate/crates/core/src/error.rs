use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every precondition violation names the invariant it broke.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gap invariant 0 <= eps < 1 violated: eps = {0}")]
    InvalidGap(f64),

    #[error("horizon invariant T >= 1 violated: T = {0}")]
    InvalidHorizon(u64),

    #[error("horizon guard exceeded for {what}: T = {horizon} > {limit}")]
    HorizonTooLarge {
        what: &'static str,
        horizon: u64,
        limit: u64,
    },

    #[error("time invariant t < 0 violated: t = {0}")]
    NonNegativeTime(f64),

    #[error("gamma invariant gamma > 0 violated: gamma = {0}")]
    InvalidGamma(f64),

    #[error("probability invariant 0 <= p1 <= 1 violated: p1 = {0}")]
    InvalidProbability(f64),

    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("finite-difference stencil crosses the kink: |xi_r| = {xi_r} < 2h = {two_h}")]
    NearKink { xi_r: f64, two_h: f64 },

    #[error("no interior bracket found for the maximum of {0} on the coarse scan")]
    NoInteriorBracket(&'static str),

    #[error("dominance precondition failed at T = {horizon}, eps = {eps}: {detail}")]
    DominanceFailed {
        horizon: u64,
        eps: f64,
        detail: String,
    },

    #[error("brute-force search too large: {0} candidate strategies")]
    SearchTooLarge(u128),

    #[error("strategy table does not cover reachable state (t = {t}, xi_r = {xi_r})")]
    MissingDecision { t: i64, xi_r: i64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_gap(eps: f64) -> Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::InvalidGap(eps))
    }
}

pub(crate) fn check_horizon(horizon: u64) -> Result<()> {
    if horizon >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidHorizon(horizon))
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t < 0.0 {
        Ok(())
    } else {
        Err(Error::NonNegativeTime(t))
    }
}
