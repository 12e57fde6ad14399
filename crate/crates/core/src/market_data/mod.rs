//! Price ingest, cleaning, return computation, standardization, rolling
//! windows, and synthetic market generation.
//!
//! The cleaning contract: interior missing values are forward-filled,
//! leading rows with any missing value are dropped, and a ticker without a
//! sector entry is rejected. After cleaning all prices are finite and
//! strictly positive.

mod ingest;
mod synth;

pub use ingest::ingest_prices;
pub use synth::{generate_synthetic, LoadingSpec, SynthSpec};

use std::collections::BTreeMap;

use chrono::NaiveDate;
use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Cleaned panel of daily closing prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    sectors: BTreeMap<String, String>,
    prices: Array2<f64>,
}

impl PriceTable {
    /// Builds a table from raw prices that may contain missing values
    /// (encoded as NaN), applying the cleaning contract.
    pub fn from_raw(
        dates: Vec<NaiveDate>,
        tickers: Vec<String>,
        sectors: BTreeMap<String, String>,
        raw: Array2<f64>,
    ) -> Result<Self> {
        if raw.nrows() != dates.len() || raw.ncols() != tickers.len() {
            return Err(Error::DimensionMismatch {
                context: "price table",
                expected: tickers.len(),
                got: raw.ncols(),
            });
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                let row = dates.iter().position(|d| *d == w[1]).unwrap_or(0);
                return Err(Error::NonIncreasingDates { row });
            }
        }
        for ticker in &tickers {
            if !sectors.contains_key(ticker) {
                return Err(Error::MissingSector {
                    ticker: ticker.clone(),
                });
            }
        }
        for (j, ticker) in tickers.iter().enumerate() {
            if raw.column(j).iter().all(|v| v.is_nan()) {
                return Err(Error::EmptyColumn {
                    ticker: ticker.clone(),
                });
            }
        }

        // Drop leading rows with any missing value.
        let first_complete = raw
            .rows()
            .into_iter()
            .position(|row| row.iter().all(|v| !v.is_nan()))
            .ok_or(Error::EmptyAfterCleaning)?;
        let mut prices = raw.slice(ndarray::s![first_complete.., ..]).to_owned();
        let dates: Vec<NaiveDate> = dates[first_complete..].to_vec();

        // Forward-fill the rest.
        for t in 1..prices.nrows() {
            for j in 0..prices.ncols() {
                if prices[[t, j]].is_nan() {
                    prices[[t, j]] = prices[[t - 1, j]];
                }
            }
        }

        for ((t, j), v) in prices.indexed_iter() {
            if !v.is_finite() || *v <= 0.0 {
                return Err(Error::NonPositivePrice {
                    ticker: tickers[j].clone(),
                    row: t,
                });
            }
        }

        // Restrict the sector map to tickers actually present.
        let sectors = tickers
            .iter()
            .map(|t| (t.clone(), sectors[t].clone()))
            .collect();

        Ok(Self {
            dates,
            tickers,
            sectors,
            prices,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn sectors(&self) -> &BTreeMap<String, String> {
        &self.sectors
    }

    pub fn prices(&self) -> ArrayView2<'_, f64> {
        self.prices.view()
    }

    /// Number of trading days T.
    pub fn num_days(&self) -> usize {
        self.dates.len()
    }
}

/// T x N matrix of daily simple returns with the panel metadata attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    sectors: BTreeMap<String, String>,
    values: Array2<f64>,
}

impl ReturnMatrix {
    pub fn new(
        dates: Vec<NaiveDate>,
        tickers: Vec<String>,
        sectors: BTreeMap<String, String>,
        values: Array2<f64>,
    ) -> Result<Self> {
        if values.nrows() != dates.len() || values.ncols() != tickers.len() {
            return Err(Error::DimensionMismatch {
                context: "return matrix",
                expected: tickers.len(),
                got: values.ncols(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "return matrix contains non-finite values".into(),
            ));
        }
        Ok(Self {
            dates,
            tickers,
            sectors,
            values,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn sectors(&self) -> &BTreeMap<String, String> {
        &self.sectors
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn num_days(&self) -> usize {
        self.dates.len()
    }

    pub fn num_assets(&self) -> usize {
        self.tickers.len()
    }

    /// A window over rows [start, start+len). `len >= 2` and in bounds.
    pub fn window(&self, index: usize, start: usize, len: usize) -> Result<WindowView<'_>> {
        if len < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: len,
            });
        }
        if start + len > self.num_days() {
            return Err(Error::WindowTooLong {
                window: start + len,
                rows: self.num_days(),
            });
        }
        Ok(WindowView {
            matrix: self,
            index,
            start,
            len,
        })
    }

    /// Row span covering dates in [from, to] inclusive, if non-empty.
    pub fn date_span(&self, from: NaiveDate, to: NaiveDate) -> Option<(usize, usize)> {
        let start = self.dates.iter().position(|d| *d >= from)?;
        let end = self.dates.iter().rposition(|d| *d <= to)?;
        (end >= start).then_some((start, end - start + 1))
    }
}

/// Computes (T-1) x N simple returns; each return is stamped with the later
/// date of its price pair.
pub fn compute_returns(table: &PriceTable) -> Result<ReturnMatrix> {
    let t = table.num_days();
    if t < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: t });
    }
    let p = table.prices();
    let mut values = Array2::zeros((t - 1, table.tickers.len()));
    for row in 0..t - 1 {
        for col in 0..table.tickers.len() {
            values[[row, col]] = p[[row + 1, col]] / p[[row, col]] - 1.0;
        }
    }
    ReturnMatrix::new(
        table.dates[1..].to_vec(),
        table.tickers.clone(),
        table.sectors.clone(),
        values,
    )
}

/// Borrowed view of one rolling window.
#[derive(Debug, Clone, Copy)]
pub struct WindowView<'a> {
    matrix: &'a ReturnMatrix,
    index: usize,
    start: usize,
    len: usize,
}

impl<'a> WindowView<'a> {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn matrix(&self) -> &'a ReturnMatrix {
        self.matrix
    }

    /// The w x N return slice.
    pub fn slice(&self) -> ArrayView2<'a, f64> {
        self.matrix
            .values
            .slice(ndarray::s![self.start..self.start + self.len, ..])
    }

    pub fn start_date(&self) -> NaiveDate {
        self.matrix.dates[self.start]
    }

    pub fn end_date(&self) -> NaiveDate {
        self.matrix.dates[self.start + self.len - 1]
    }
}

/// Rolling windows starting at 0, stride, 2*stride, ...; a terminal window
/// ending at the last row is appended when the stride does not land on it.
pub fn rolling_windows(r: &ReturnMatrix, w: usize, stride: usize) -> Result<Vec<WindowView<'_>>> {
    let t = r.num_days();
    if w > t {
        return Err(Error::WindowTooLong { window: w, rows: t });
    }
    if w < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: w });
    }
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be >= 1".into()));
    }
    let mut starts: Vec<usize> = (0..=t - w).step_by(stride).collect();
    let last = t - w;
    if *starts.last().expect("at least one window") != last {
        starts.push(last);
    }
    Ok(starts
        .into_iter()
        .enumerate()
        .map(|(index, start)| WindowView {
            matrix: r,
            index,
            start,
            len: w,
        })
        .collect())
}

/// Per-column mean and sample standard deviation fitted on one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }
}

/// Fits per-column mean and std (denominator w-1) over the window. A
/// zero-variance column is rejected, naming the ticker.
pub fn fit_standardizer(window: &WindowView<'_>) -> Result<Standardizer> {
    let x = window.slice();
    let w = x.nrows();
    if w < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: w });
    }
    let mut means = Vec::with_capacity(x.ncols());
    let mut stds = Vec::with_capacity(x.ncols());
    for (j, col) in x.axis_iter(Axis(1)).enumerate() {
        let col: Vec<f64> = col.to_vec();
        let m = crate::stats::mean(&col);
        let s = crate::stats::sample_std(&col);
        if s == 0.0 || !s.is_finite() {
            return Err(Error::DegenerateSeries {
                name: window.matrix.tickers[j].clone(),
            });
        }
        means.push(m);
        stds.push(s);
    }
    Ok(Standardizer { means, stds })
}

/// Elementwise (x - mean) / std.
pub fn standardize(x: ArrayView2<'_, f64>, s: &Standardizer) -> Result<Array2<f64>> {
    if x.ncols() != s.len() {
        return Err(Error::DimensionMismatch {
            context: "standardize",
            expected: s.len(),
            got: x.ncols(),
        });
    }
    let mut out = x.to_owned();
    for mut row in out.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - s.means[j]) / s.stds[j];
        }
    }
    Ok(out)
}

/// Elementwise z * std + mean; inverse of [`standardize`].
pub fn destandardize(z: ArrayView2<'_, f64>, s: &Standardizer) -> Result<Array2<f64>> {
    if z.ncols() != s.len() {
        return Err(Error::DimensionMismatch {
            context: "destandardize",
            expected: s.len(),
            got: z.ncols(),
        });
    }
    let mut out = z.to_owned();
    for mut row in out.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = *v * s.stds[j] + s.means[j];
        }
    }
    Ok(out)
}
