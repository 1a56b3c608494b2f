//! The portfolio bandit backtest and the `c` parameter sweep.
//!
//! Periods are numbered `k = 1..=m`; period `k` realizes the gross returns in
//! panel row `k - 1`. At every period all roster arms compute weights from
//! information available before that row, Thompson sampling picks one arm,
//! and once `k > tau` its weights are traded. The posterior update runs in
//! every period, warm-up included, scored against the counterfactual arm
//! histories accumulated so far.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arms::{self, ArmId, MvParams, WeightVector, DEFAULT_RETURN_SCALE, DEFAULT_RIDGE_SCALE};
use crate::bandit::{
    self, ArmReturnHistory, BetaState, SelectionRecord, DEFAULT_SR_LOOKBACK,
};
use crate::error::{Error, Result};
use crate::market_data::{slice_window, Periodicity, ReturnPanel};
use crate::metrics::{self, PerformanceReport};

/// Default estimation and warm-up window, in periods.
pub const DEFAULT_TAU: usize = 120;
/// Default success threshold of the top-`c` reward.
pub const DEFAULT_C: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    /// Sliding window length; trading starts after `tau` periods.
    pub tau: usize,
    /// Minimum number of arms the chosen arm must weakly dominate.
    pub c: usize,
    /// Trailing periods used for each arm's reward Sharpe ratio.
    pub sr_lookback: usize,
    pub seed: u64,
    pub ridge_scale: f64,
    /// Unit of returns in the mean-variance objective; 100 means percent.
    pub mv_return_scale: f64,
    /// Arms in play, in bandit order.
    pub arms: Vec<ArmId>,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            c: DEFAULT_C,
            sr_lookback: DEFAULT_SR_LOOKBACK,
            seed: 0,
            ridge_scale: DEFAULT_RIDGE_SCALE,
            mv_return_scale: DEFAULT_RETURN_SCALE,
            arms: ArmId::ALL.to_vec(),
        }
    }
}

impl BacktestConfig {
    /// Checks everything that does not depend on the panel.
    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::InvalidConfig("arm roster is empty".into()));
        }
        let unique: HashSet<_> = self.arms.iter().collect();
        if unique.len() != self.arms.len() {
            return Err(Error::InvalidConfig("arm roster lists an arm twice".into()));
        }
        if self.tau < 2 {
            return Err(Error::InvalidConfig(format!("tau = {} must be at least 2", self.tau)));
        }
        if self.c == 0 || self.c > self.arms.len() {
            return Err(Error::InvalidConfig(format!(
                "c = {} must lie in 1..={}",
                self.c,
                self.arms.len()
            )));
        }
        if self.sr_lookback == 0 {
            return Err(Error::InvalidConfig("sr_lookback must be positive".into()));
        }
        if !(self.ridge_scale.is_finite() && self.ridge_scale >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "ridge_scale = {} must be finite and non-negative",
                self.ridge_scale
            )));
        }
        if !(self.mv_return_scale.is_finite() && self.mv_return_scale > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "mv_return_scale = {} must be finite and positive",
                self.mv_return_scale
            )));
        }
        Ok(())
    }

    pub fn mv_params(&self) -> MvParams {
        MvParams {
            ridge_scale: self.ridge_scale,
            return_scale: self.mv_return_scale,
        }
    }

    /// [`validate`](Self::validate) plus the `tau < m` history requirement.
    pub fn validate_for(&self, panel: &ReturnPanel) -> Result<()> {
        self.validate()?;
        if self.tau >= panel.periods() {
            return Err(Error::InsufficientHistory {
                tau: self.tau,
                periods: panel.periods(),
            });
        }
        Ok(())
    }
}

/// Everything a backtest produced. Round-trips through serde losslessly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub config: BacktestConfig,
    pub periodicity: Periodicity,
    pub asset_ids: Vec<String>,
    /// One record per period `k = 1..=m`.
    pub selections: Vec<SelectionRecord>,
    /// Date labels of the traded periods `k > tau`.
    pub traded_dates: Vec<String>,
    pub realized_net_returns: Vec<f64>,
    pub weight_trajectory: Vec<WeightVector>,
    pub cw_curve: Vec<f64>,
    pub report: PerformanceReport,
    pub per_arm_counterfactual: ArmReturnHistory,
    pub posterior: BetaState,
}

/// Net return each arm would have earned over panel row `row`.
pub fn counterfactual_arm_returns(
    panel: &ReturnPanel,
    row: usize,
    weights: &[WeightVector],
) -> Result<Vec<f64>> {
    if row >= panel.periods() {
        return Err(Error::OutOfBounds {
            end: row + 1,
            len: 1,
            rows: panel.periods(),
        });
    }
    let returns = panel.row(row);
    weights
        .iter()
        .map(|w| metrics::per_period_return(w, returns))
        .collect()
}

/// Weights of every roster arm for the period realized by panel row `row`.
fn roster_weights(
    panel: &ReturnPanel,
    row: usize,
    config: &BacktestConfig,
    held: &WeightVector,
) -> Result<Vec<WeightVector>> {
    let n = panel.assets();
    let ones;
    let prev_returns = if row == 0 {
        ones = vec![1.0; n];
        &ones[..]
    } else {
        panel.row(row - 1)
    };
    let available = row.min(config.tau);
    // Non-MV arms ignore the window; at row 0 it is a placeholder that the
    // mean-variance guard below never reads.
    let window = slice_window(panel, row.max(1), available.max(1))?;
    config
        .arms
        .iter()
        .map(|&arm| {
            if arm == ArmId::MeanVariance && available < 2 {
                // Moments need two rows of history; hold equal weights until then.
                Ok(arms::weights_ew(n))
            } else {
                arms::arm_weights(arm, held, prev_returns, &window, &config.mv_params())
            }
        })
        .collect()
}

/// Runs the portfolio bandit over `panel`.
pub fn run_backtest(panel: &ReturnPanel, config: &BacktestConfig) -> Result<BacktestResult> {
    config.validate_for(panel)?;
    let n = panel.assets();
    let m = panel.periods();

    let mut rng = bandit::seeded_rng(config.seed);
    let mut posterior = BetaState::new(config.arms.len());
    let mut history = ArmReturnHistory::new(config.arms.clone());
    let mut held = arms::weights_ew(n);

    let mut selections = Vec::with_capacity(m);
    let mut traded_dates = Vec::with_capacity(m - config.tau);
    let mut realized = Vec::with_capacity(m - config.tau);
    let mut trajectory = Vec::with_capacity(m - config.tau);

    for row in 0..m {
        let k = row + 1;
        let weights = roster_weights(panel, row, config, &held)?;
        let thetas = bandit::sample_thetas(&posterior, &mut rng);
        let chosen = bandit::select_arm(&thetas);

        if k > config.tau {
            held = weights[chosen].clone();
            realized.push(metrics::per_period_return(&held, panel.row(row))?);
            trajectory.push(held.clone());
            traded_dates.push(panel.dates()[row].clone());
        }

        let scored = if history.is_empty() {
            None
        } else {
            let (outcome, count) =
                bandit::evaluate_reward(&history, chosen, config.c, config.sr_lookback)?;
            bandit::update_posterior(&mut posterior, chosen, outcome);
            Some((outcome, count))
        };
        history.push(&counterfactual_arm_returns(panel, row, &weights)?)?;

        selections.push(SelectionRecord {
            period: k,
            date: panel.dates()[row].clone(),
            sampled_thetas: thetas,
            chosen: config.arms[chosen],
            outcome: scored.map(|s| s.0),
            success_count: scored.map(|s| s.1),
        });
    }

    let periodicity = panel.periodicity();
    let cw_curve = metrics::cumulative_wealth(&realized)?;
    let report = PerformanceReport::from_net_returns(&realized, periodicity.periods_per_year())?;
    Ok(BacktestResult {
        config: config.clone(),
        periodicity,
        asset_ids: panel.asset_ids().to_vec(),
        selections,
        traded_dates,
        realized_net_returns: realized,
        weight_trajectory: trajectory,
        cw_curve,
        report,
        per_arm_counterfactual: history,
        posterior,
    })
}

/// Metrics of one `(c, seed)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: usize,
    pub seed: u64,
    pub sharpe: f64,
    pub cumulative_wealth: f64,
    pub max_drawdown_rel: f64,
    pub volatility: f64,
}

/// Mean and sample standard deviation (zero for a single run) of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Per-`c` aggregate across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub c: usize,
    pub runs: usize,
    pub sharpe: MeanStd,
    pub cumulative_wealth: MeanStd,
    pub max_drawdown_rel: MeanStd,
    pub volatility: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    /// Ordered by `c`, then by seed, as given.
    pub rows: Vec<SweepRow>,
    /// One entry per `c`, in the order given.
    pub summary: Vec<SweepSummary>,
}

/// Runs `base` once per `(c, seed)` pair. Runs are independent and execute in
/// parallel; the output order does not depend on scheduling.
pub fn run_c_sweep(
    panel: &ReturnPanel,
    base: &BacktestConfig,
    c_values: &[usize],
    seeds: &[u64],
) -> Result<SweepTable> {
    if c_values.is_empty() {
        return Err(Error::Empty("c value list"));
    }
    if seeds.is_empty() {
        return Err(Error::Empty("seed list"));
    }
    if seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
        return Err(Error::InvalidConfig("duplicate seed in sweep".into()));
    }
    if c_values.iter().collect::<HashSet<_>>().len() != c_values.len() {
        return Err(Error::InvalidConfig("duplicate c value in sweep".into()));
    }
    let configs: Vec<BacktestConfig> = c_values
        .iter()
        .flat_map(|&c| {
            seeds.iter().map(move |&seed| BacktestConfig {
                c,
                seed,
                ..base.clone()
            })
        })
        .collect();
    for config in &configs {
        config.validate_for(panel)?;
    }

    let rows = configs
        .par_iter()
        .map(|config| {
            let report = run_backtest(panel, config)?.report;
            Ok(SweepRow {
                c: config.c,
                seed: config.seed,
                sharpe: report.sharpe,
                cumulative_wealth: report.cumulative_wealth,
                max_drawdown_rel: report.max_drawdown_rel,
                volatility: report.volatility_annualized,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = c_values
        .iter()
        .map(|&c| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.c == c).collect();
            let metric = |f: fn(&SweepRow) -> f64| {
                MeanStd::of(&group.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            SweepSummary {
                c,
                runs: group.len(),
                sharpe: metric(|r| r.sharpe),
                cumulative_wealth: metric(|r| r.cumulative_wealth),
                max_drawdown_rel: metric(|r| r.max_drawdown_rel),
                volatility: metric(|r| r.volatility),
            }
        })
        .collect();
    Ok(SweepTable { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(rows: Vec<Vec<f64>>) -> ReturnPanel {
        let dates = (1..=rows.len()).map(|k| k.to_string()).collect();
        let ids = (0..rows[0].len()).map(|i| format!("a{i}")).collect();
        ReturnPanel::new(dates, ids, rows, Periodicity::Monthly).unwrap()
    }

    fn wavy(m: usize) -> ReturnPanel {
        panel(
            (0..m)
                .map(|k| {
                    let t = k as f64;
                    vec![1.0 + 0.03 * (t * 0.7).sin(), 1.0 + 0.02 * (t * 1.3).cos(), 1.005]
                })
                .collect(),
        )
    }

    #[test]
    fn counterfactual_examples() {
        let p = panel(vec![vec![1.1, 0.9]]);
        let ws = [arms::weights_sa(2), arms::weights_ew(2), arms::weights_bh(&arms::weights_ew(2))];
        let r = counterfactual_arm_returns(&p, 0, &ws).unwrap();
        assert_eq!(r[0], 0.0);
        assert!(r[1].abs() < 1e-15);
        assert_eq!(r[2], r[1]);
        assert!(counterfactual_arm_returns(&p, 1, &ws).is_err());
    }

    #[test]
    fn first_period_bh_equals_ew() {
        let p = wavy(10);
        let config = BacktestConfig { tau: 5, ..Default::default() };
        let result = run_backtest(&p, &config).unwrap();
        let h = &result.per_arm_counterfactual;
        assert_eq!(h.returns[0][0], h.returns[2][0]);
        assert!(h.returns[1].iter().all(|&r| r == 0.0));
    }

    #[test]
    fn one_traded_period() {
        let p = wavy(12);
        let config = BacktestConfig { tau: 11, ..Default::default() };
        let result = run_backtest(&p, &config).unwrap();
        assert_eq!(result.realized_net_returns.len(), 1);
        assert_eq!(result.cw_curve.len(), 1);
        assert!(result.report.zero_variance);
    }

    #[test]
    fn config_validation() {
        let p = wavy(10);
        let run = |c: BacktestConfig| run_backtest(&p, &c);
        assert!(matches!(
            run(BacktestConfig { tau: 10, ..Default::default() }),
            Err(Error::InsufficientHistory { .. })
        ));
        assert!(run(BacktestConfig { tau: 1, ..Default::default() }).is_err());
        assert!(run(BacktestConfig { tau: 5, c: 0, ..Default::default() }).is_err());
        assert!(run(BacktestConfig { tau: 5, c: 6, ..Default::default() }).is_err());
        assert!(run(BacktestConfig {
            tau: 5,
            c: 1,
            arms: vec![ArmId::EqualWeight, ArmId::EqualWeight],
            ..Default::default()
        })
        .is_err());
        assert!(run(BacktestConfig { tau: 5, c: 2, arms: vec![ArmId::EqualWeight], ..Default::default() })
            .is_err());
    }

    #[test]
    fn posterior_counts_every_scored_round() {
        let p = wavy(40);
        let result = run_backtest(&p, &BacktestConfig { tau: 10, ..Default::default() }).unwrap();
        assert_eq!(result.posterior.rounds(), 39);
        assert!(result.selections[0].outcome.is_none());
        assert!(result.selections[1..].iter().all(|s| s.outcome.is_some()));
    }

    #[test]
    fn sweep_errors() {
        let p = wavy(20);
        let base = BacktestConfig { tau: 5, ..Default::default() };
        assert!(matches!(run_c_sweep(&p, &base, &[], &[1]), Err(Error::Empty(_))));
        assert!(run_c_sweep(&p, &base, &[1], &[1, 1]).is_err());
        assert!(run_c_sweep(&p, &base, &[6], &[1]).is_err());
    }

    #[test]
    fn sweep_single_cell_matches_backtest() {
        let p = wavy(30);
        let base = BacktestConfig { tau: 8, ..Default::default() };
        let table = run_c_sweep(&p, &base, &[2], &[9]).unwrap();
        let direct = run_backtest(&p, &BacktestConfig { c: 2, seed: 9, ..base }).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].cumulative_wealth, direct.report.cumulative_wealth);
        assert_eq!(table.rows[0].volatility, direct.report.volatility_annualized);
        assert_eq!(table.summary[0].runs, 1);
        assert_eq!(table.summary[0].sharpe.std, 0.0);
    }

    #[test]
    fn mean_std_sample() {
        let s = MeanStd::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
    }
}
