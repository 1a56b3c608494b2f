//! Beta-Bernoulli Thompson sampling over a roster of strategic arms.
//!
//! Arms are addressed by their 0-based position in the roster. Each round
//! draws `theta_j ~ Beta(alpha_j, beta_j)`, plays the arg-max, and scores the
//! play with a top-`c` rule: the round succeeds when the chosen arm's trailing
//! Sharpe ratio is at least as high as that of `c` or more arms (itself
//! included).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::arms::ArmId;
use crate::error::{Error, Result};
use crate::metrics::sharpe_unchecked;

/// Random source owned by a single backtest run.
pub type BanditRng = ChaCha8Rng;

/// Default number of trailing periods in the reward Sharpe ratio.
pub const DEFAULT_SR_LOOKBACK: usize = 36;

pub fn seeded_rng(seed: u64) -> BanditRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-arm Beta posterior parameters. Starts at `Beta(1, 1)` and only grows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaState {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BetaState {
    /// Uniform priors for `arms` arms.
    pub fn new(arms: usize) -> Self {
        Self {
            alpha: vec![1.0; arms],
            beta: vec![1.0; arms],
        }
    }

    pub fn arms(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Number of completed updates, `sum_j (alpha_j + beta_j) - 2l`.
    pub fn rounds(&self) -> u64 {
        let total: f64 = self.alpha.iter().chain(&self.beta).sum();
        (total - 2.0 * self.arms() as f64) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
        }
    }
}

/// What happened in one period of a backtest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    /// 1-based period index `k`.
    pub period: usize,
    pub date: String,
    pub sampled_thetas: Vec<f64>,
    pub chosen: ArmId,
    /// `None` when no arm history existed yet and the posterior was left alone.
    pub outcome: Option<Outcome>,
    pub success_count: Option<usize>,
}

/// Counterfactual net returns of every roster arm, one entry per elapsed period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReturnHistory {
    pub arms: Vec<ArmId>,
    pub returns: Vec<Vec<f64>>,
}

impl ArmReturnHistory {
    pub fn new(arms: Vec<ArmId>) -> Self {
        let returns = vec![Vec::new(); arms.len()];
        Self { arms, returns }
    }

    /// Appends one period; `period_returns` is indexed by roster position.
    pub fn push(&mut self, period_returns: &[f64]) -> Result<()> {
        if period_returns.len() != self.arms.len() {
            return Err(Error::DimensionMismatch {
                expected: self.arms.len(),
                got: period_returns.len(),
            });
        }
        for (series, &r) in self.returns.iter_mut().zip(period_returns) {
            series.push(r);
        }
        Ok(())
    }

    /// Number of periods recorded.
    pub fn len(&self) -> usize {
        self.returns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sharpe ratio of each arm over its trailing `lookback` periods.
    pub fn trailing_sharpe(&self, lookback: usize) -> Vec<f64> {
        let take = lookback.max(1).min(self.len());
        self.returns
            .iter()
            .map(|series| sharpe_unchecked(&series[series.len() - take..]))
            .collect()
    }
}

/// One independent `Beta(alpha_j, beta_j)` draw per arm.
pub fn sample_thetas<R: Rng + ?Sized>(state: &BetaState, rng: &mut R) -> Vec<f64> {
    state
        .alpha
        .iter()
        .zip(&state.beta)
        .map(|(&a, &b)| {
            Beta::new(a, b)
                .expect("posterior parameters are always >= 1")
                .sample(rng)
        })
        .collect()
}

/// Position of the largest draw; ties go to the lowest position.
pub fn select_arm(thetas: &[f64]) -> usize {
    let mut best = 0;
    for (j, &t) in thetas.iter().enumerate().skip(1) {
        if t > thetas[best] {
            best = j;
        }
    }
    best
}

/// Scores playing `chosen` against the trailing Sharpe ratios of every arm.
///
/// Returns the outcome together with the number of arms the chosen one weakly
/// dominates, itself included.
pub fn evaluate_reward(
    history: &ArmReturnHistory,
    chosen: usize,
    c: usize,
    sr_lookback: usize,
) -> Result<(Outcome, usize)> {
    let arms = history.arms.len();
    if c == 0 || c > arms {
        return Err(Error::InvalidConfig(format!("c = {c} must lie in 1..={arms}")));
    }
    if chosen >= arms {
        return Err(Error::DimensionMismatch {
            expected: arms,
            got: chosen + 1,
        });
    }
    if history.is_empty() {
        return Err(Error::NotWarmedUp);
    }
    let sharpe = history.trailing_sharpe(sr_lookback);
    let mine = sharpe[chosen];
    let count = sharpe.iter().filter(|&&other| mine - other >= 0.0).count();
    let outcome = if count >= c {
        Outcome::Success
    } else {
        Outcome::Failure
    };
    Ok((outcome, count))
}

/// Success bumps `alpha` of the chosen arm, failure bumps its `beta`.
pub fn update_posterior(state: &mut BetaState, chosen: usize, outcome: Outcome) {
    match outcome {
        Outcome::Success => state.alpha[chosen] += 1.0,
        Outcome::Failure => state.beta[chosen] += 1.0,
    }
}
