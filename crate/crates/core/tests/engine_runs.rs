use pbts_core::engine::counterfactual_arm_returns;
use pbts_core::synthetic::{regime_panel, RegimeSpec};
use pbts_core::{
    run_backtest, run_c_sweep, ArmId, BacktestConfig, Error, Periodicity, ReturnPanel,
    WeightVector,
};

fn constant_panel(best: f64, rest: f64, n: usize, m: usize) -> ReturnPanel {
    let rows = (0..m)
        .map(|_| (0..n).map(|i| if i == 0 { best } else { rest }).collect())
        .collect();
    let dates = (1..=m).map(|k| format!("{k:03}")).collect();
    let ids = (0..n).map(|i| format!("A{i}")).collect();
    ReturnPanel::new(dates, ids, rows, Periodicity::Monthly).unwrap()
}

#[test]
fn mean_variance_rides_the_winning_asset() {
    // Zero sample covariance leaves only the ridge: in units of 1/s the
    // matrix is ridge s^2 I and the means s * mean, so the optimum is
    // w = (mean - avg(mean)) / (2 ridge s) + 1/n.
    let (n, m, tau) = (3, 8, 3);
    let panel = constant_panel(1.02, 0.98, n, m);
    let (ridge, s) = (1e-6, 100.0);
    let config = BacktestConfig {
        tau,
        c: 1,
        ridge_scale: ridge,
        mv_return_scale: s,
        arms: vec![ArmId::MeanVariance],
        ..BacktestConfig::default()
    };
    let result = run_backtest(&panel, &config).unwrap();

    let avg = (1.02 + 0.98 * (n - 1) as f64) / n as f64;
    let expected_w: Vec<f64> = (0..n)
        .map(|i| {
            let mean = if i == 0 { 1.02 } else { 0.98 };
            (mean - avg) / (2.0 * ridge * s) + 1.0 / n as f64
        })
        .collect();
    let expected_net = expected_w[0] * 1.02 + expected_w[1..].iter().sum::<f64>() * 0.98 - 1.0;

    assert_eq!(result.realized_net_returns.len(), m - tau);
    for (w, net) in result.weight_trajectory.iter().zip(&result.realized_net_returns) {
        for (got, want) in w.0.iter().zip(&expected_w) {
            assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{got} vs {want}");
        }
        assert!((net - expected_net).abs() <= 1e-6 * expected_net, "{net} vs {expected_net}");
        assert!(*net >= 0.02);
    }
    assert!(result.cw_curve.windows(2).all(|p| p[1] > p[0]));
}

#[test]
fn last_period_only_trades_once() {
    let panel = regime_panel(&RegimeSpec::bull_crash_sideways(3, 10, 0), 4).unwrap();
    let config = BacktestConfig {
        tau: panel.periods() - 1,
        ..BacktestConfig::default()
    };
    let result = run_backtest(&panel, &config).unwrap();
    assert_eq!(result.cw_curve.len(), 1);
    assert_eq!(result.report.periods, 1);
    assert_eq!(result.traded_dates, [panel.dates()[panel.periods() - 1].clone()]);
}

#[test]
fn too_short_panel_is_rejected() {
    let panel = constant_panel(1.01, 0.99, 2, 5);
    for tau in [5, 6, 100] {
        let config = BacktestConfig { tau, ..BacktestConfig::default() };
        let err = run_backtest(&panel, &config).unwrap_err();
        assert!(matches!(err, Error::InsufficientHistory { .. }));
        assert!(err.to_string().contains("insufficient history"));
    }
}

#[test]
fn counterfactual_examples() {
    let panel = ReturnPanel::new(
        vec!["1".into()],
        vec!["a".into(), "b".into()],
        vec![vec![1.1, 0.9]],
        Periodicity::Monthly,
    )
    .unwrap();
    let weights = [WeightVector::zeros(2), WeightVector(vec![0.5, 0.5])];
    let out = counterfactual_arm_returns(&panel, 0, &weights).unwrap();
    assert_eq!(out[0], 0.0);
    assert!(out[1].abs() < 1e-15);
    assert!(counterfactual_arm_returns(&panel, 1, &weights).is_err());
}

#[test]
fn buy_and_hold_starts_at_equal_weight() {
    let panel = regime_panel(&RegimeSpec::bull_crash_sideways(4, 20, 0), 9).unwrap();
    let config = BacktestConfig { tau: 5, ..BacktestConfig::default() };
    let result = run_backtest(&panel, &config).unwrap();
    let history = &result.per_arm_counterfactual;
    let bh = history.arms.iter().position(|&a| a == ArmId::BuyAndHold).unwrap();
    let ew = history.arms.iter().position(|&a| a == ArmId::EqualWeight).unwrap();
    let sa = history.arms.iter().position(|&a| a == ArmId::SellAll).unwrap();
    assert_eq!(history.returns[bh][0], history.returns[ew][0]);
    assert!(history.returns[sa].iter().all(|&r| r == 0.0));
    assert_eq!(history.len(), panel.periods());
}

#[test]
fn first_period_leaves_the_posterior_alone() {
    let panel = regime_panel(&RegimeSpec::bull_crash_sideways(3, 30, 0), 2).unwrap();
    let result = run_backtest(&panel, &BacktestConfig { tau: 10, ..BacktestConfig::default() }).unwrap();
    assert_eq!(result.selections[0].outcome, None);
    assert!(result.selections[1..].iter().all(|s| s.outcome.is_some()));
    assert_eq!(result.posterior.rounds(), (panel.periods() - 1) as u64);
}

#[test]
fn sweep_single_cell_is_one_backtest() {
    let panel = regime_panel(&RegimeSpec::bull_crash_sideways(3, 40, 0), 3).unwrap();
    let base = BacktestConfig { tau: 12, ..BacktestConfig::default() };
    let table = run_c_sweep(&panel, &base, &[2], &[17]).unwrap();
    let direct = run_backtest(&panel, &BacktestConfig { c: 2, seed: 17, ..base.clone() }).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0].sharpe, direct.report.sharpe);
    assert_eq!(table.rows[0].cumulative_wealth, direct.report.cumulative_wealth);
    assert_eq!(table.rows[0].volatility, direct.report.volatility_annualized);
    assert_eq!(table.summary[0].runs, 1);
    assert_eq!(table.summary[0].cumulative_wealth.std, 0.0);
}

#[test]
fn sweep_rows_follow_input_order() {
    let panel = regime_panel(&RegimeSpec::bull_crash_sideways(3, 40, 0), 3).unwrap();
    let base = BacktestConfig { tau: 12, ..BacktestConfig::default() };
    let table = run_c_sweep(&panel, &base, &[5, 1, 3], &[9, 2]).unwrap();
    let keys: Vec<_> = table.rows.iter().map(|r| (r.c, r.seed)).collect();
    assert_eq!(keys, [(5, 9), (5, 2), (1, 9), (1, 2), (3, 9), (3, 2)]);
    assert_eq!(table.summary.iter().map(|s| s.c).collect::<Vec<_>>(), [5, 1, 3]);
    let again = run_c_sweep(&panel, &base, &[5, 1, 3], &[9, 2]).unwrap();
    assert_eq!(table, again);
}

#[test]
fn sweep_rejects_bad_lists() {
    let panel = regime_panel(&RegimeSpec::bull_crash_sideways(3, 40, 0), 3).unwrap();
    let base = BacktestConfig { tau: 12, ..BacktestConfig::default() };
    assert!(matches!(run_c_sweep(&panel, &base, &[], &[1]), Err(Error::Empty(_))));
    assert!(matches!(run_c_sweep(&panel, &base, &[1], &[]), Err(Error::Empty(_))));
    assert!(matches!(run_c_sweep(&panel, &base, &[1], &[4, 4]), Err(Error::InvalidConfig(_))));
    assert!(matches!(run_c_sweep(&panel, &base, &[6], &[1]), Err(Error::InvalidConfig(_))));
}
