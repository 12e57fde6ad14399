//! Exploratory and time-series diagnostics over a return panel:
//! per-ticker descriptive statistics, the sector correlation matrix, an
//! augmented Dickey-Fuller stationarity test, and GARCH(1,1) fitting by
//! maximum likelihood.

mod adf;
mod garch;

pub use adf::{adf_test, AdfResult, ADF_CRITICAL_VALUES};
pub use garch::{garch_fit, garch_log_likelihood, garch_simulate, GarchFit, GarchParams};

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::market_data::ReturnMatrix;
use crate::stats;

/// Per-ticker mean, standard deviation, and skewness of daily returns.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveStats {
    pub tickers: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub skewness: Vec<f64>,
}

/// Sample mean, sample std (denominator T-1), and adjusted Fisher-Pearson
/// skewness per column. Requires T >= 3.
pub fn descriptive_stats(r: &ReturnMatrix) -> Result<DescriptiveStats> {
    let t = r.num_days();
    if t < 3 {
        return Err(Error::SeriesTooShort { needed: 3, got: t });
    }
    let v = r.values();
    let mut mean = Vec::with_capacity(r.num_assets());
    let mut std = Vec::with_capacity(r.num_assets());
    let mut skewness = Vec::with_capacity(r.num_assets());
    for (j, col) in v.axis_iter(Axis(1)).enumerate() {
        let col: Vec<f64> = col.to_vec();
        let s = stats::sample_std(&col);
        if s == 0.0 {
            return Err(Error::DegenerateSeries {
                name: r.tickers()[j].clone(),
            });
        }
        mean.push(stats::mean(&col));
        std.push(s);
        skewness.push(stats::skewness(&col));
    }
    Ok(DescriptiveStats {
        tickers: r.tickers().to_vec(),
        mean,
        std,
        skewness,
    })
}

/// Pearson correlation matrix of equal-weight sector-average returns.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorCorrelation {
    pub sectors: Vec<String>,
    /// K x K, symmetric, unit diagonal.
    pub matrix: Array2<f64>,
}

/// Builds per-day sector returns (equal-weight mean over member tickers)
/// and correlates them. Sector order is lexicographic.
pub fn sector_correlation(r: &ReturnMatrix) -> Result<SectorCorrelation> {
    let mut sector_names: Vec<String> = r.sectors().values().cloned().collect();
    sector_names.sort();
    sector_names.dedup();

    let v = r.values();
    let t = r.num_days();
    let mut series: Vec<Vec<f64>> = Vec::with_capacity(sector_names.len());
    for name in &sector_names {
        let members: Vec<usize> = r
            .tickers()
            .iter()
            .enumerate()
            .filter(|(_, tk)| r.sectors()[*tk] == *name)
            .map(|(j, _)| j)
            .collect();
        let mut s = vec![0.0; t];
        for (row, out) in s.iter_mut().enumerate() {
            *out = members.iter().map(|j| v[[row, *j]]).sum::<f64>() / members.len() as f64;
        }
        if stats::sample_variance(&s) == 0.0 {
            return Err(Error::DegenerateSeries { name: name.clone() });
        }
        series.push(s);
    }

    let k = sector_names.len();
    let mut matrix = Array2::zeros((k, k));
    for i in 0..k {
        matrix[[i, i]] = 1.0;
        for j in (i + 1)..k {
            let c = stats::pearson(&series[i], &series[j]);
            matrix[[i, j]] = c;
            matrix[[j, i]] = c;
        }
    }
    Ok(SectorCorrelation {
        sectors: sector_names,
        matrix,
    })
}
