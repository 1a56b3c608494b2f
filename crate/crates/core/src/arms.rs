//! The five strategic arms and the moment estimates behind mean-variance.
//!
//! Arms are indexed in a fixed order: buy-and-hold, sell-all, equal weight,
//! value weight, mean-variance. Shorts (negative weights) are never clipped.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::ReturnPanel;

/// Default multiplier applied to `trace(cov) / n` to regularize the covariance.
pub const DEFAULT_RIDGE_SCALE: f64 = 1e-6;

/// Default unit of returns inside the mean-variance objective: percent.
pub const DEFAULT_RETURN_SCALE: f64 = 100.0;

/// Below this magnitude the value-weight denominator is treated as zero.
const VW_DENOMINATOR_EPS: f64 = 1e-12;

/// Allocation fractions over `n` assets.
///
/// Either sums to one (invested) or is exactly zero everywhere (all cash).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// True when every entry is exactly zero (pure cash position).
    pub fn is_cash(&self) -> bool {
        self.0.iter().all(|&w| w == 0.0)
    }

    /// Checks finiteness and the sum-to-one-or-cash invariant at tolerance `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.0.iter().all(|w| w.is_finite()) && (self.is_cash() || (self.sum() - 1.0).abs() <= tol)
    }
}

/// One of the five strategic arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArmId {
    #[serde(rename = "BH")]
    BuyAndHold,
    #[serde(rename = "SA")]
    SellAll,
    #[serde(rename = "EW")]
    EqualWeight,
    #[serde(rename = "VW")]
    ValueWeight,
    #[serde(rename = "MV")]
    MeanVariance,
}

impl ArmId {
    pub const ALL: [ArmId; 5] = [
        ArmId::BuyAndHold,
        ArmId::SellAll,
        ArmId::EqualWeight,
        ArmId::ValueWeight,
        ArmId::MeanVariance,
    ];

    /// 1-based position in the canonical arm ordering.
    pub fn index(self) -> usize {
        match self {
            ArmId::BuyAndHold => 1,
            ArmId::SellAll => 2,
            ArmId::EqualWeight => 3,
            ArmId::ValueWeight => 4,
            ArmId::MeanVariance => 5,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ArmId::BuyAndHold => "BH",
            ArmId::SellAll => "SA",
            ArmId::EqualWeight => "EW",
            ArmId::ValueWeight => "VW",
            ArmId::MeanVariance => "MV",
        }
    }
}

impl fmt::Display for ArmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ArmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        ArmId::ALL
            .into_iter()
            .find(|a| a.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown arm {s:?}")))
    }
}

/// Buy and hold: keep the previous portfolio unchanged.
pub fn weights_bh(prev: &WeightVector) -> WeightVector {
    prev.clone()
}

/// Sell all: the pure cash position.
pub fn weights_sa(n: usize) -> WeightVector {
    WeightVector::zeros(n)
}

/// Equal weight `1/n` in every asset.
pub fn weights_ew(n: usize) -> WeightVector {
    WeightVector(vec![1.0 / n as f64; n])
}

/// Value weight: the previous portfolio drifted by last period's returns,
/// `w_i r_i / sum_j w_j r_j`. Falls back to equal weight when the denominator
/// vanishes, which happens right after a sell-all period.
pub fn weights_vw(prev: &WeightVector, prev_returns: &[f64]) -> Result<WeightVector> {
    check_len(prev.len(), prev_returns.len())?;
    let grown: Vec<f64> = prev.0.iter().zip(prev_returns).map(|(w, r)| w * r).collect();
    let total: f64 = grown.iter().sum();
    if total.abs() <= VW_DENOMINATOR_EPS {
        return Ok(weights_ew(prev.len()));
    }
    Ok(WeightVector(grown.into_iter().map(|g| g / total).collect()))
}

/// Plug-in moments for the mean-variance arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    /// Forecast gross return per asset.
    pub mean: Vec<f64>,
    /// Covariance of gross returns, row-major `n x n`.
    pub cov: Vec<Vec<f64>>,
    /// Added to the covariance diagonal before solving.
    pub ridge: f64,
}

impl MomentEstimate {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>, ridge: f64) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(Error::Empty("moment estimate has no assets"));
        }
        check_len(n, cov.len())?;
        for row in &cov {
            check_len(n, row.len())?;
        }
        Ok(Self { mean, cov, ridge })
    }

    pub fn assets(&self) -> usize {
        self.mean.len()
    }

    /// The same moments with returns measured in units of `1 / scale`: means
    /// are multiplied by `scale`, covariance and ridge by `scale^2`.
    pub fn rescaled(&self, scale: f64) -> Self {
        let sq = scale * scale;
        Self {
            mean: self.mean.iter().map(|m| m * scale).collect(),
            cov: self.cov.iter().map(|row| row.iter().map(|c| c * sq).collect()).collect(),
            ridge: self.ridge * sq,
        }
    }

    /// `cov + ridge * I` as a dense matrix.
    pub fn regularized(&self) -> DMatrix<f64> {
        let n = self.assets();
        DMatrix::from_fn(n, n, |i, j| self.cov[i][j] + if i == j { self.ridge } else { 0.0 })
    }
}

/// Column means and sample covariance (denominator `rows - 1`) of a return
/// window. The ridge is `ridge_scale * trace(cov) / n`; when the window has no
/// variance at all the average-variance factor is replaced by one, so the
/// ridge equals `ridge_scale` and the regularized matrix stays definite.
pub fn estimate_moments(window: &ReturnPanel, ridge_scale: f64) -> Result<MomentEstimate> {
    let rows = window.periods();
    if rows < 2 {
        return Err(Error::InsufficientData { needed: 2, got: rows });
    }
    let n = window.assets();
    let mut mean = vec![0.0; n];
    for row in window.returns() {
        for (m, r) in mean.iter_mut().zip(row) {
            *m += r;
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }

    let mut cov = vec![vec![0.0; n]; n];
    for row in window.returns() {
        for i in 0..n {
            let di = row[i] - mean[i];
            for j in i..n {
                cov[i][j] += di * (row[j] - mean[j]);
            }
        }
    }
    let denom = (rows - 1) as f64;
    for i in 0..n {
        for j in i..n {
            cov[i][j] /= denom;
            cov[j][i] = cov[i][j];
        }
    }

    let avg_var = (0..n).map(|i| cov[i][i]).sum::<f64>() / n as f64;
    let scale = if avg_var > 0.0 { avg_var } else { 1.0 };
    Ok(MomentEstimate {
        mean,
        cov,
        ridge: ridge_scale * scale,
    })
}

/// Minimizes `w' A w - mean' w` subject to `sum(w) = 1`, with `A = cov + ridge I`.
///
/// Stationarity gives `w = A^{-1}(mean - lambda 1) / 2`; `lambda` is fixed by the
/// budget constraint. The means are centered first (a constant shift is
/// absorbed by `lambda`), which keeps the solve well scaled for gross returns.
pub fn solve_mv_qp(moments: &MomentEstimate) -> Result<WeightVector> {
    let n = moments.assets();
    let chol = moments
        .regularized()
        .cholesky()
        .ok_or(Error::SingularCovariance)?;
    let center = moments.mean.iter().sum::<f64>() / n as f64;
    let excess = DVector::from_iterator(n, moments.mean.iter().map(|m| m - center));
    let x = chol.solve(&excess);
    let y = chol.solve(&DVector::from_element(n, 1.0));
    let lambda = (x.sum() - 2.0) / y.sum();
    let mut w: Vec<f64> = x.iter().zip(y.iter()).map(|(xi, yi)| (xi - lambda * yi) / 2.0).collect();
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    // Absorb rounding drift so the budget constraint holds tightly.
    let drift = (1.0 - w.iter().sum::<f64>()) / n as f64;
    for v in &mut w {
        *v += drift;
    }
    Ok(WeightVector(w))
}

/// Mean-variance objective `w' A w - mean' w` with the regularized covariance.
pub fn mv_objective(moments: &MomentEstimate, weights: &[f64]) -> f64 {
    let a = moments.regularized();
    let w = DVector::from_column_slice(weights);
    (w.transpose() * &a * &w)[(0, 0)] - moments.mean.iter().zip(weights).map(|(m, x)| m * x).sum::<f64>()
}

/// KKT residuals of a candidate solution: the infinity norm of
/// `2 A w - mean + lambda 1` at the best-fitting multiplier, and `|sum(w) - 1|`.
pub fn mv_kkt_residuals(moments: &MomentEstimate, weights: &[f64]) -> (f64, f64) {
    let a = moments.regularized();
    let w = DVector::from_column_slice(weights);
    let aw = &a * &w;
    let g: Vec<f64> = aw.iter().zip(&moments.mean).map(|(v, m)| m - 2.0 * v).collect();
    let lambda = g.iter().sum::<f64>() / g.len() as f64;
    let stationarity = g.iter().map(|gi| (gi - lambda).abs()).fold(0.0, f64::max);
    let feasibility = (weights.iter().sum::<f64>() - 1.0).abs();
    (stationarity, feasibility)
}

/// Tuning of the mean-variance arm.
///
/// The objective `w' cov w - mean' w` is not unit-free: measuring returns in
/// percent (`return_scale = 100`) weighs variance 100 times more heavily
/// against the mean than plain fractions (`return_scale = 1`). A common
/// offset of the means (gross versus net returns) never matters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvParams {
    pub ridge_scale: f64,
    pub return_scale: f64,
}

impl Default for MvParams {
    fn default() -> Self {
        Self {
            ridge_scale: DEFAULT_RIDGE_SCALE,
            return_scale: DEFAULT_RETURN_SCALE,
        }
    }
}

/// Weights of `arm` for the current period.
///
/// `prev` is the portfolio held over the previous period, `prev_returns` that
/// period's gross returns and `window` the trailing estimation window.
pub fn arm_weights(
    arm: ArmId,
    prev: &WeightVector,
    prev_returns: &[f64],
    window: &ReturnPanel,
    mv: &MvParams,
) -> Result<WeightVector> {
    let n = prev.len();
    match arm {
        ArmId::BuyAndHold => Ok(weights_bh(prev)),
        ArmId::SellAll => Ok(weights_sa(n)),
        ArmId::EqualWeight => Ok(weights_ew(n)),
        ArmId::ValueWeight => weights_vw(prev, prev_returns),
        ArmId::MeanVariance => {
            check_len(n, window.assets())?;
            solve_mv_qp(&estimate_moments(window, mv.ridge_scale)?.rescaled(mv.return_scale))
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
