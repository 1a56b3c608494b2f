//! Portfolio bandit via Thompson sampling.
//!
//! Five classic allocation rules (buy-and-hold, sell-all, equal weight, value
//! weight and mean-variance) are treated as arms of a Beta-Bernoulli bandit.
//! Each period one arm is drawn by Thompson sampling, its weights are traded
//! once the warm-up window has elapsed, and the arm's posterior is updated with
//! a top-`c` Sharpe-ratio criterion evaluated against every other arm's
//! counterfactual returns.
//!
//! Module map:
//!
//! - [`market_data`]: CSV ingestion and validated return panels.
//! - [`arms`]: the five weight rules, moment estimation and the mean-variance solve.
//! - [`bandit`]: Beta posteriors, sampling, selection and the reward criterion.
//! - [`metrics`]: Sharpe ratio, cumulative wealth, drawdown and volatility.
//! - [`engine`]: the backtest loop and the `c` sweep.
//! - [`synthetic`]: seeded regime panels for tests and demos.

pub mod arms;
pub mod bandit;
pub mod engine;
pub mod error;
pub mod market_data;
pub mod metrics;
pub mod synthetic;

pub use arms::{ArmId, MomentEstimate, MvParams, WeightVector};
pub use bandit::{ArmReturnHistory, BetaState, Outcome, SelectionRecord};
pub use engine::{run_backtest, run_c_sweep, BacktestConfig, BacktestResult, SweepTable};
pub use error::{Error, Result};
pub use market_data::{Periodicity, PricePanel, ReturnPanel};
pub use metrics::PerformanceReport;
