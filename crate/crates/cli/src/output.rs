//! CSV writers for every artifact the pipelines emit. Floats are printed
//! with the shortest decimal that round-trips, so identical runs produce
//! byte-identical files.

use std::path::Path;

use stresslab_core::diagnostics::{AdfResult, DescriptiveStats, GarchFit, SectorCorrelation};
use stresslab_core::market_data::PriceTable;
use stresslab_core::pipelines::{AttributionRow, McResult, PcaWindowFit, WindowResult};

use crate::error::CliError;

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn write_rows(
    path: &Path,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Usage(format!("writing {}: {e}", path.display())))?;
    writer
        .write_record(header)
        .map_err(|e| CliError::Usage(format!("writing {}: {e}", path.display())))?;
    for row in rows {
        writer
            .write_record(&row)
            .map_err(|e| CliError::Usage(format!("writing {}: {e}", path.display())))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::io(format!("flushing {}", path.display()), e))?;
    Ok(())
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn write_window_results(path: &Path, results: &[WindowResult]) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&[
            "window",
            "start_date",
            "end_date",
            "base_var",
            "base_es",
            "base_drawdown",
            "stressed_var",
            "stressed_es",
            "stressed_drawdown",
            "d_var",
            "d_es",
            "d_drawdown",
        ]),
        results.iter().map(|r| {
            vec![
                r.window.to_string(),
                r.start_date.to_string(),
                r.end_date.to_string(),
                fmt(r.baseline.var_95),
                fmt(r.baseline.es_95),
                fmt(r.baseline.max_drawdown),
                fmt(r.stressed.var_95),
                fmt(r.stressed.es_95),
                fmt(r.stressed.max_drawdown),
                fmt(r.delta.d_var),
                fmt(r.delta.d_es),
                fmt(r.delta.d_drawdown),
            ]
        }),
    )
}

/// The window-by-sector heatmap table.
pub fn write_sector_shifts(path: &Path, results: &[WindowResult]) -> Result<(), CliError> {
    let sectors: Vec<String> = results
        .first()
        .map(|r| r.sector_shift.shifts.keys().cloned().collect())
        .unwrap_or_default();
    let mut head = vec![
        "window".to_string(),
        "start_date".to_string(),
        "end_date".to_string(),
    ];
    head.extend(sectors.iter().cloned());
    write_rows(
        path,
        &head,
        results.iter().map(|r| {
            let mut row = vec![
                r.window.to_string(),
                r.start_date.to_string(),
                r.end_date.to_string(),
            ];
            row.extend(sectors.iter().map(|s| fmt(r.sector_shift.shifts[s])));
            row
        }),
    )
}

pub fn write_attribution(path: &Path, rows: &[AttributionRow]) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&["factor", "d_var", "d_es", "d_drawdown"]),
        rows.iter().map(|r| {
            vec![
                r.factor.clone(),
                fmt(r.d_var),
                fmt(r.d_es),
                fmt(r.d_drawdown),
            ]
        }),
    )
}

pub fn write_mc_samples(path: &Path, results: &[McResult]) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&["window", "sample", "value"]),
        results.iter().flat_map(|r| {
            r.samples
                .iter()
                .enumerate()
                .map(move |(i, v)| vec![r.window.to_string(), i.to_string(), fmt(*v)])
        }),
    )
}

pub fn write_mc_hist(path: &Path, results: &[McResult]) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&["window", "bin", "left_edge", "right_edge", "count"]),
        results.iter().flat_map(|r| {
            r.hist_counts.iter().enumerate().map(move |(b, count)| {
                vec![
                    r.window.to_string(),
                    b.to_string(),
                    fmt(r.hist_edges[b]),
                    fmt(r.hist_edges[b + 1]),
                    count.to_string(),
                ]
            })
        }),
    )
}

pub fn write_mc_summary(path: &Path, results: &[McResult]) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&[
            "window",
            "start_date",
            "end_date",
            "mean",
            "std",
            "skewness",
            "q05",
        ]),
        results.iter().map(|r| {
            vec![
                r.window.to_string(),
                r.start_date.to_string(),
                r.end_date.to_string(),
                fmt(r.summary.mean),
                fmt(r.summary.std),
                fmt(r.summary.skewness),
                fmt(r.summary.q05),
            ]
        }),
    )
}

pub fn write_stats(path: &Path, stats: &DescriptiveStats) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&["ticker", "mean", "std", "skew"]),
        (0..stats.tickers.len()).map(|i| {
            vec![
                stats.tickers[i].clone(),
                fmt(stats.mean[i]),
                fmt(stats.std[i]),
                fmt(stats.skewness[i]),
            ]
        }),
    )
}

pub fn write_sector_corr(path: &Path, corr: &SectorCorrelation) -> Result<(), CliError> {
    let mut head = vec!["sector".to_string()];
    head.extend(corr.sectors.iter().cloned());
    write_rows(
        path,
        &head,
        corr.sectors.iter().enumerate().map(|(i, name)| {
            let mut row = vec![name.clone()];
            row.extend((0..corr.sectors.len()).map(|j| fmt(corr.matrix[[i, j]])));
            row
        }),
    )
}

pub fn write_adf(path: &Path, rows: &[(String, AdfResult)]) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&[
            "ticker",
            "statistic",
            "lag",
            "reject_1pct",
            "reject_5pct",
            "reject_10pct",
            "p_low",
            "p_high",
        ]),
        rows.iter().map(|(ticker, r)| {
            vec![
                ticker.clone(),
                fmt(r.statistic),
                r.lag.to_string(),
                r.reject_1pct.to_string(),
                r.reject_5pct.to_string(),
                r.reject_10pct.to_string(),
                fmt(r.p_value.0),
                fmt(r.p_value.1),
            ]
        }),
    )
}

pub fn write_garch(path: &Path, rows: &[(String, GarchFit)]) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&[
            "ticker",
            "omega",
            "alpha",
            "beta",
            "persistence",
            "converged",
        ]),
        rows.iter().map(|(ticker, fit)| {
            vec![
                ticker.clone(),
                fmt(fit.params.omega),
                fmt(fit.params.alpha),
                fmt(fit.params.beta),
                fmt(fit.persistence),
                fit.converged.to_string(),
            ]
        }),
    )
}

pub fn write_prices(path: &Path, table: &PriceTable) -> Result<(), CliError> {
    let mut head = vec!["date".to_string()];
    head.extend(table.tickers().iter().cloned());
    let p = table.prices();
    write_rows(
        path,
        &head,
        (0..table.num_days()).map(|t| {
            let mut row = vec![table.dates()[t].to_string()];
            row.extend((0..table.tickers().len()).map(|j| fmt(p[[t, j]])));
            row
        }),
    )
}

pub fn write_sector_map(path: &Path, table: &PriceTable) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&["ticker", "sector"]),
        table
            .tickers()
            .iter()
            .map(|t| vec![t.clone(), table.sectors()[t].clone()]),
    )
}

/// Per-window PCA loadings, one row per (window, ticker).
pub fn write_pca_loadings(
    path: &Path,
    tickers: &[String],
    fits: &[(usize, PcaWindowFit)],
) -> Result<(), CliError> {
    let d = fits
        .first()
        .map(|(_, f)| f.model.num_components())
        .unwrap_or(0);
    let mut head = vec!["window".to_string(), "ticker".to_string()];
    head.extend((1..=d).map(|j| format!("pc{j}")));
    write_rows(
        path,
        &head,
        fits.iter().flat_map(|(w, fit)| {
            let loadings = fit.model.loadings().to_owned();
            tickers.iter().enumerate().map(move |(i, t)| {
                let mut row = vec![w.to_string(), t.clone()];
                row.extend((0..loadings.ncols()).map(|j| fmt(loadings[[i, j]])));
                row
            })
        }),
    )
}

/// Per-window explained variances and ratios.
pub fn write_pca_explained(path: &Path, fits: &[(usize, PcaWindowFit)]) -> Result<(), CliError> {
    write_rows(
        path,
        &header(&["window", "component", "variance", "ratio"]),
        fits.iter().flat_map(|(w, fit)| {
            let variances = fit.model.explained_variances().to_vec();
            let ratios = fit.model.explained_variance_ratio();
            variances
                .into_iter()
                .zip(ratios)
                .enumerate()
                .map(move |(j, (var, ratio))| {
                    vec![w.to_string(), (j + 1).to_string(), fmt(var), fmt(ratio)]
                })
        }),
    )
}
