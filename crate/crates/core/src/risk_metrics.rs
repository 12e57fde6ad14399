//! Portfolio aggregation and risk measures: empirical VaR and ES in the
//! positive-loss convention, maximum drawdown of the compounded wealth
//! path, delta metrics, and sector-level return shifts.
//!
//! VaR uses the plain order statistic: with k = ceil((1-confidence) * n),
//! VaR is minus the k-th smallest return and ES is minus the mean of the k
//! smallest. ES >= VaR holds on every series by construction.

use std::collections::BTreeMap;

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::stats;

/// Portfolio weights over the asset panel; must sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSpec {
    weights: Vec<f64>,
}

impl PortfolioSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "portfolio weights must be non-empty and finite".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "portfolio weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn equal_weight(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Baseline or stressed risk metrics of one return path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    /// 95% value-at-risk, positive = loss.
    pub var_95: f64,
    /// 95% expected shortfall, positive = loss.
    pub es_95: f64,
    /// Maximum peak-to-trough wealth decline, in [0, 1].
    pub max_drawdown: f64,
}

/// Stressed-minus-baseline differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaReport {
    pub d_var: f64,
    pub d_es: f64,
    pub d_drawdown: f64,
}

/// Mean return change per sector under stress.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorShift {
    pub shifts: BTreeMap<String, f64>,
}

/// Weighted row sums: r_t = sum_n weights_n * R[t][n].
pub fn portfolio_returns(r: ArrayView2<'_, f64>, portfolio: &PortfolioSpec) -> Result<Vec<f64>> {
    if r.ncols() != portfolio.len() {
        return Err(Error::DimensionMismatch {
            context: "portfolio returns",
            expected: portfolio.len(),
            got: r.ncols(),
        });
    }
    Ok(r.rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(portfolio.weights())
                .map(|(v, w)| v * w)
                .sum()
        })
        .collect())
}

const MIN_TAIL_OBS: usize = 20;

/// Order-statistic VaR: minus the k-th smallest return. Needs n >= 20.
pub fn value_at_risk(returns: &[f64], confidence: f64) -> Result<f64> {
    check_series(returns, confidence)?;
    let k = stats::tail_count(returns.len(), confidence);
    Ok(-stats::kth_smallest(returns, k))
}

/// Empirical ES: minus the mean of the k smallest returns (the VaR point
/// included). Needs n >= 20.
pub fn expected_shortfall(returns: &[f64], confidence: f64) -> Result<f64> {
    check_series(returns, confidence)?;
    let k = stats::tail_count(returns.len(), confidence);
    let mut sorted = returns.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite return"));
    Ok(-(sorted[..k].iter().sum::<f64>() / k as f64))
}

fn check_series(returns: &[f64], confidence: f64) -> Result<()> {
    if returns.len() < MIN_TAIL_OBS {
        return Err(Error::SeriesTooShort {
            needed: MIN_TAIL_OBS,
            got: returns.len(),
        });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} out of (0, 1)"
        )));
    }
    Ok(())
}

/// Maximum drawdown of the compounded wealth path W_t = prod(1 + r_s),
/// with W_0 = 1 counted as the initial peak. Requires every return > -1.
pub fn max_drawdown(returns: &[f64]) -> Result<f64> {
    let mut wealth = 1.0;
    let mut peak = 1.0;
    let mut mdd = 0.0;
    for r in returns {
        if *r <= -1.0 {
            return Err(Error::InvalidParameter(format!(
                "return {r} <= -1 makes wealth non-positive"
            )));
        }
        wealth *= 1.0 + r;
        if wealth > peak {
            peak = wealth;
        }
        let dd = (peak - wealth) / peak;
        if dd > mdd {
            mdd = dd;
        }
    }
    Ok(mdd)
}

/// VaR, ES, and drawdown of one return path at the given confidence.
pub fn risk_report(returns: &[f64], confidence: f64) -> Result<RiskReport> {
    Ok(RiskReport {
        var_95: value_at_risk(returns, confidence)?,
        es_95: expected_shortfall(returns, confidence)?,
        max_drawdown: max_drawdown(returns)?,
    })
}

/// Componentwise stressed - baseline.
pub fn delta_metrics(base: &RiskReport, stressed: &RiskReport) -> DeltaReport {
    DeltaReport {
        d_var: stressed.var_95 - base.var_95,
        d_es: stressed.es_95 - base.es_95,
        d_drawdown: stressed.max_drawdown - base.max_drawdown,
    }
}

/// Per-sector mean of (stressed - base) over member columns and all rows.
pub fn sector_shifts(
    base: ArrayView2<'_, f64>,
    stressed: ArrayView2<'_, f64>,
    tickers: &[String],
    sectors: &BTreeMap<String, String>,
) -> Result<SectorShift> {
    if base.dim() != stressed.dim() {
        return Err(Error::DimensionMismatch {
            context: "sector shifts",
            expected: base.ncols(),
            got: stressed.ncols(),
        });
    }
    if base.ncols() != tickers.len() {
        return Err(Error::DimensionMismatch {
            context: "sector shifts",
            expected: tickers.len(),
            got: base.ncols(),
        });
    }
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (j, ticker) in tickers.iter().enumerate() {
        let sector = sectors
            .get(ticker)
            .ok_or_else(|| Error::MissingSector {
                ticker: ticker.clone(),
            })?
            .clone();
        let mut diff = 0.0;
        for t in 0..base.nrows() {
            diff += stressed[[t, j]] - base[[t, j]];
        }
        let entry = sums.entry(sector).or_insert((0.0, 0));
        entry.0 += diff;
        entry.1 += base.nrows();
    }
    let shifts = sums
        .into_iter()
        .map(|(sector, (sum, count))| (sector, sum / count as f64))
        .collect();
    Ok(SectorShift { shifts })
}
