//! CSV ingest for price panels and sector maps.
//!
//! Price CSV schema: header `date,<TICKER1>,<TICKER2>,...`, ISO-8601 dates,
//! empty cell = missing. Sector map schema: header `ticker,sector`.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use ndarray::Array2;

use crate::error::{Error, Result};

use super::PriceTable;

/// Reads and cleans a price panel, joining it against the sector map.
pub fn ingest_prices(path: &Path, sector_map_path: &Path) -> Result<PriceTable> {
    let sectors = read_sector_map(sector_map_path)?;
    let (dates, tickers, raw) = read_price_csv(path)?;
    PriceTable::from_raw(dates, tickers, sectors, raw)
}

fn csv_err(line: usize, message: impl Into<String>) -> Error {
    Error::Csv {
        line,
        message: message.into(),
    }
}

fn read_price_csv(path: &Path) -> Result<(Vec<NaiveDate>, Vec<String>, Array2<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_err(1, e.to_string()))?;

    let headers = reader.headers().map_err(|e| csv_err(1, e.to_string()))?;
    // Tolerate a UTF-8 BOM, common in spreadsheet exports.
    let first = headers
        .get(0)
        .map(|h| h.trim_start_matches('\u{feff}'))
        .unwrap_or("");
    if !first.eq_ignore_ascii_case("date") {
        return Err(csv_err(1, "first column must be `date`"));
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if tickers.is_empty() {
        return Err(csv_err(1, "no ticker columns"));
    }
    for (i, t) in tickers.iter().enumerate() {
        if tickers[..i].contains(t) {
            return Err(csv_err(1, format!("duplicate ticker column `{t}`")));
        }
    }

    let mut dates = Vec::new();
    let mut cells: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| csv_err(line, e.to_string()))?;
        if record.len() != tickers.len() + 1 {
            return Err(csv_err(
                line,
                format!(
                    "expected {} fields, got {}",
                    tickers.len() + 1,
                    record.len()
                ),
            ));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| csv_err(line, format!("bad date `{}`: {e}", &record[0])))?;
        dates.push(date);
        for field in record.iter().skip(1) {
            let trimmed = field.trim();
            if trimmed.is_empty() {
                cells.push(f64::NAN);
            } else {
                let v: f64 = trimmed
                    .parse()
                    .map_err(|_| csv_err(line, format!("bad price `{trimmed}`")))?;
                cells.push(v);
            }
        }
    }
    if dates.is_empty() {
        return Err(csv_err(2, "no data rows"));
    }

    let raw = Array2::from_shape_vec((dates.len(), tickers.len()), cells)
        .expect("row-major cells match shape");
    Ok((dates, tickers, raw))
}

fn read_sector_map(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err(1, e.to_string()))?;

    let headers = reader.headers().map_err(|e| csv_err(1, e.to_string()))?;
    if headers.len() < 2
        || !headers[0].eq_ignore_ascii_case("ticker")
        || !headers[1].eq_ignore_ascii_case("sector")
    {
        return Err(csv_err(1, "sector map header must be `ticker,sector`"));
    }

    let mut map = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| csv_err(line, e.to_string()))?;
        let ticker = record[0].trim().to_string();
        let sector = record[1].trim().to_string();
        if ticker.is_empty() || sector.is_empty() {
            return Err(csv_err(line, "empty ticker or sector"));
        }
        if map.insert(ticker.clone(), sector).is_some() {
            return Err(csv_err(
                line,
                format!("duplicate sector entry for `{ticker}`"),
            ));
        }
    }
    Ok(map)
}
