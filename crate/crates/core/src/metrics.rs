//! Out-of-sample performance criteria: Sharpe ratio, cumulative wealth,
//! maximum drawdown and annualized volatility.
//!
//! All inputs are per-period *net* returns `mu_t = R_t' w_t - 1`. Standard
//! deviations are population deviations (divide by the count).

use serde::{Deserialize, Serialize};

use crate::arms::WeightVector;
use crate::error::{Error, Result};

/// Added to the standard deviation before dividing, so zero-variance series
/// (the cash arm) still have a finite Sharpe ratio.
pub const SR_EPSILON: f64 = 1e-12;

/// Net return `R' w - 1` of holding `weights` over a period with gross
/// `returns`. The all-zero (cash) portfolio earns exactly zero.
pub fn per_period_return(weights: &WeightVector, returns: &[f64]) -> Result<f64> {
    if weights.len() != returns.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: returns.len(),
        });
    }
    if weights.is_cash() {
        return Ok(0.0);
    }
    Ok(weights.0.iter().zip(returns).map(|(w, r)| w * r).sum::<f64>() - 1.0)
}

/// Mean and population standard deviation. Both are zero for an empty slice.
pub fn mean_std(series: &[f64]) -> (f64, f64) {
    if series.is_empty() {
        return (0.0, 0.0);
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `mean / (std + SR_EPSILON)` without a length check; used where a single
/// observation is acceptable (the bandit reward, one-period backtests).
pub fn sharpe_unchecked(series: &[f64]) -> f64 {
    let (mean, std) = mean_std(series);
    mean / (std + SR_EPSILON)
}

/// Sharpe ratio of a net return series; needs at least two observations.
pub fn sharpe_ratio(net_returns: &[f64]) -> Result<f64> {
    if net_returns.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: net_returns.len(),
        });
    }
    Ok(sharpe_unchecked(net_returns))
}

/// Wealth trajectory `CW_t = prod_{s <= t} (1 + mu_s)` starting from one.
pub fn cumulative_wealth(net_returns: &[f64]) -> Result<Vec<f64>> {
    let mut wealth = 1.0;
    net_returns
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if !(value > -1.0) {
                return Err(Error::Bankruptcy { index, value });
            }
            wealth *= 1.0 + value;
            Ok(wealth)
        })
        .collect()
}

/// Largest drop from a running peak: `(max_t (M_t - CW_t), max_t (M_t - CW_t) / M_t)`.
pub fn max_drawdown(cw: &[f64]) -> Result<(f64, f64)> {
    let first = *cw.first().ok_or(Error::Empty("wealth curve"))?;
    let mut peak = first;
    let mut abs = 0.0_f64;
    let mut rel = 0.0_f64;
    for &value in cw {
        peak = peak.max(value);
        let drop = peak - value;
        abs = abs.max(drop);
        rel = rel.max(drop / peak);
    }
    Ok((abs, rel))
}

/// `sqrt(H) * sigma`.
pub fn annualized_volatility(sigma: f64, periods_per_year: u32) -> f64 {
    f64::from(periods_per_year).sqrt() * sigma
}

/// Summary of a realized net return series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub sharpe: f64,
    /// Sharpe ratio times 100, the scale of published tables.
    pub sharpe_x100: f64,
    /// Terminal cumulative wealth.
    pub cumulative_wealth: f64,
    pub max_drawdown_abs: f64,
    pub max_drawdown_rel: f64,
    pub volatility_annualized: f64,
    pub mean_return: f64,
    pub std_return: f64,
    /// The series had zero variance, so `sharpe` is `mean / SR_EPSILON`.
    pub zero_variance: bool,
    pub periods: usize,
    pub periods_per_year: u32,
}

impl PerformanceReport {
    /// Builds the report for a non-empty series. A single period is allowed;
    /// its Sharpe ratio is flagged as zero-variance.
    pub fn from_net_returns(net_returns: &[f64], periods_per_year: u32) -> Result<Self> {
        if net_returns.is_empty() {
            return Err(Error::Empty("net return series"));
        }
        let (mean, std) = mean_std(net_returns);
        let sharpe = mean / (std + SR_EPSILON);
        let cw = cumulative_wealth(net_returns)?;
        let (mdd_abs, mdd_rel) = max_drawdown(&cw)?;
        Ok(Self {
            sharpe,
            sharpe_x100: sharpe * 100.0,
            cumulative_wealth: *cw.last().expect("non-empty"),
            max_drawdown_abs: mdd_abs,
            max_drawdown_rel: mdd_rel,
            volatility_annualized: annualized_volatility(std, periods_per_year),
            mean_return: mean,
            std_return: std,
            zero_variance: std == 0.0,
            periods: net_returns.len(),
            periods_per_year,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_period_examples() {
        let r = per_period_return(&WeightVector(vec![0.5, 0.5]), &[1.1, 0.9]).unwrap();
        assert!(r.abs() < 1e-15);
        assert_eq!(per_period_return(&WeightVector::zeros(2), &[1.1, 0.9]).unwrap(), 0.0);
        let r = per_period_return(&WeightVector(vec![1.0]), &[1.05]).unwrap();
        assert!((r - 0.05).abs() < 1e-15);
        assert!(per_period_return(&WeightVector(vec![1.0]), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn sharpe_examples() {
        let (m, s) = mean_std(&[0.01, 0.03]);
        assert!((m - 0.02).abs() < 1e-15 && (s - 0.01).abs() < 1e-15);
        let sr = sharpe_ratio(&[0.01, 0.03]).unwrap();
        assert!((sr - 2.0).abs() < 1e-9);
        assert_eq!(sharpe_ratio(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(sharpe_ratio(&[0.1]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn sharpe_constant_series_is_flagged() {
        let report = PerformanceReport::from_net_returns(&[0.5, 0.5, 0.5, 0.5], 12).unwrap();
        assert!(report.zero_variance);
        assert_eq!(report.sharpe, 0.5 / SR_EPSILON);
    }

    #[test]
    fn cumulative_wealth_examples() {
        let cw = cumulative_wealth(&[0.1, -0.1]).unwrap();
        assert!((cw[0] - 1.1).abs() < 1e-15 && (cw[1] - 0.99).abs() < 1e-15);
        assert_eq!(cumulative_wealth(&[0.0; 4]).unwrap(), vec![1.0; 4]);
        assert_eq!(cumulative_wealth(&[0.05]).unwrap(), vec![1.05]);
        assert!(matches!(
            cumulative_wealth(&[0.1, -1.0]),
            Err(Error::Bankruptcy { index: 1, .. })
        ));
    }

    #[test]
    fn drawdown_examples() {
        let (abs, rel) = max_drawdown(&[1.0, 1.2, 0.8, 1.1]).unwrap();
        assert!((abs - 0.4).abs() < 1e-15);
        assert!((rel - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(max_drawdown(&[1.0, 1.1, 1.5]).unwrap(), (0.0, 0.0));
        assert_eq!(max_drawdown(&[1.0]).unwrap(), (0.0, 0.0));
        assert!(max_drawdown(&[]).is_err());
    }

    #[test]
    fn volatility_examples() {
        assert!((annualized_volatility(0.01, 12) - 0.034_641_016_151_377_54).abs() < 1e-15);
        assert_eq!(annualized_volatility(0.0, 12), 0.0);
        assert!((annualized_volatility(0.01, 365) - 0.191_049_731_745_427_9).abs() < 1e-15);
    }

    #[test]
    fn report_volatility_is_sqrt_h_sigma() {
        let r = PerformanceReport::from_net_returns(&[0.01, -0.02, 0.03], 365).unwrap();
        assert_eq!(r.volatility_annualized, 365f64.sqrt() * r.std_return);
        assert_eq!(r.sharpe_x100, r.sharpe * 100.0);
    }
}
