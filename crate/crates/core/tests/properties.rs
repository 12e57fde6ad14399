//! Property tests for the library's structural invariants.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use ndarray::Array2;
use proptest::prelude::*;

use stresslab_core::market_data::{
    compute_returns, destandardize, fit_standardizer, rolling_windows, standardize, PriceTable,
    ReturnMatrix,
};
use stresslab_core::neural_nets::kl_divergence;
use stresslab_core::risk_metrics::{
    expected_shortfall, max_drawdown, portfolio_returns, value_at_risk, PortfolioSpec,
};

fn dates(n: usize) -> Vec<NaiveDate> {
    (0..n)
        .map(|i| NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Days::new(i as u64))
        .collect()
}

fn sectors_for(tickers: &[String]) -> BTreeMap<String, String> {
    tickers
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), format!("S{}", i % 2)))
        .collect()
}

fn return_matrix(rows: Vec<Vec<f64>>) -> ReturnMatrix {
    let n = rows[0].len();
    let t = rows.len();
    let tickers: Vec<String> = (0..n).map(|j| format!("T{j}")).collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((t, n), flat).unwrap();
    ReturnMatrix::new(dates(t), tickers.clone(), sectors_for(&tickers), values).unwrap()
}

proptest! {
    /// Standardize then destandardize is the identity within 1e-12.
    #[test]
    fn standardize_round_trip(
        rows in prop::collection::vec(
            prop::collection::vec(-0.2f64..0.2, 3),
            4..40,
        )
    ) {
        let r = return_matrix(rows);
        let t = r.num_days();
        let w = r.window(0, 0, t).unwrap();
        if let Ok(s) = fit_standardizer(&w) {
            let z = standardize(w.slice(), &s).unwrap();
            let back = destandardize(z.view(), &s).unwrap();
            for (a, b) in back.iter().zip(w.slice().iter()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    /// ES >= VaR at the same confidence on every series.
    #[test]
    fn es_dominates_var(
        series in prop::collection::vec(-0.5f64..0.5, 20..200),
        confidence in 0.80f64..0.995,
    ) {
        let var = value_at_risk(&series, confidence).unwrap();
        let es = expected_shortfall(&series, confidence).unwrap();
        prop_assert!(es >= var - 1e-15);
    }

    /// Adding a constant to all returns subtracts it from VaR and ES.
    #[test]
    fn var_es_translation_covariance(
        series in prop::collection::vec(-0.5f64..0.5, 20..120),
        shift in -0.2f64..0.2,
    ) {
        let shifted: Vec<f64> = series.iter().map(|r| r + shift).collect();
        let var0 = value_at_risk(&series, 0.95).unwrap();
        let var1 = value_at_risk(&shifted, 0.95).unwrap();
        prop_assert!((var1 - (var0 - shift)).abs() < 1e-12);
        let es0 = expected_shortfall(&series, 0.95).unwrap();
        let es1 = expected_shortfall(&shifted, 0.95).unwrap();
        prop_assert!((es1 - (es0 - shift)).abs() < 1e-12);
    }

    /// Appending returns that only set new wealth peaks leaves the maximum
    /// drawdown unchanged.
    #[test]
    fn drawdown_ignores_fresh_peaks(
        series in prop::collection::vec(-0.3f64..0.3, 1..60),
        gains in prop::collection::vec(0.2f64..0.5, 1..10),
    ) {
        let mdd = max_drawdown(&series).unwrap();
        // Each appended gain is large enough to guarantee a fresh peak
        // before the next one, so no new drawdown forms.
        let mut extended = series.clone();
        let wealth: f64 = series.iter().map(|r| 1.0 + r).product();
        let peak: f64 = series
            .iter()
            .scan(1.0, |w, r| {
                *w *= 1.0 + r;
                Some(*w)
            })
            .fold(1.0f64, f64::max);
        // One jump restores the old peak; afterwards every gain is a peak.
        extended.push(peak / wealth * 1.01 - 1.0);
        extended.extend(&gains);
        prop_assert!((max_drawdown(&extended).unwrap() - mdd).abs() < 1e-9);
    }

    /// Portfolio returns are linear in the weights.
    #[test]
    fn portfolio_linear_in_weights(
        rows in prop::collection::vec(
            prop::collection::vec(-0.1f64..0.1, 3),
            2..30,
        ),
        alpha in 0.0f64..1.0,
    ) {
        let n = 3;
        let t = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let r = Array2::from_shape_vec((t, n), flat).unwrap();
        let wa = PortfolioSpec::new(vec![0.5, 0.3, 0.2]).unwrap();
        let wb = PortfolioSpec::equal_weight(n);
        let mixed: Vec<f64> = wa
            .weights()
            .iter()
            .zip(wb.weights())
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        let sum: f64 = mixed.iter().sum();
        let mixed: Vec<f64> = mixed.iter().map(|w| w / sum).collect();
        let wm = PortfolioSpec::new(mixed).unwrap();
        let pa = portfolio_returns(r.view(), &wa).unwrap();
        let pb = portfolio_returns(r.view(), &wb).unwrap();
        let pm = portfolio_returns(r.view(), &wm).unwrap();
        for i in 0..t {
            let expected = (alpha * pa[i] + (1.0 - alpha) * pb[i]) / sum;
            prop_assert!((pm[i] - expected).abs() < 1e-12);
        }
    }

    /// Rolling windows stay in bounds and cover the last row exactly once.
    #[test]
    fn rolling_windows_cover_terminal_row(
        t in 4usize..200,
        w in 2usize..50,
        stride in 1usize..40,
    ) {
        prop_assume!(w <= t);
        let values = Array2::from_elem((t, 1), 0.01);
        let tickers = vec!["A".to_string()];
        let r = ReturnMatrix::new(dates(t), tickers.clone(), sectors_for(&tickers), values)
            .unwrap();
        let windows = rolling_windows(&r, w, stride).unwrap();
        let ends: Vec<usize> = windows.iter().map(|v| v.start() + v.len() - 1).collect();
        prop_assert_eq!(ends.iter().filter(|e| **e == t - 1).count(), 1);
        prop_assert!(windows.iter().all(|v| v.start() + v.len() <= t));
        prop_assert!(windows[0].start() == 0);
    }

    /// Cleaning a cleaned table is the identity, and returns reconstruct
    /// the cleaned prices.
    #[test]
    fn cleaning_idempotent_and_returns_invert(
        cols in prop::collection::vec(
            prop::collection::vec(10.0f64..500.0, 4..30),
            1..4,
        ),
        gap_row in 1usize..3,
    ) {
        let t = cols[0].len();
        prop_assume!(cols.iter().all(|c| c.len() == t));
        let n = cols.len();
        let mut raw = Array2::from_elem((t, n), f64::NAN);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                raw[[i, j]] = *v;
            }
        }
        // Punch an interior gap.
        raw[[gap_row, 0]] = f64::NAN;
        let tickers: Vec<String> = (0..n).map(|j| format!("T{j}")).collect();
        let table = PriceTable::from_raw(
            dates(t),
            tickers.clone(),
            sectors_for(&tickers),
            raw,
        ).unwrap();

        let again = PriceTable::from_raw(
            table.dates().to_vec(),
            table.tickers().to_vec(),
            table.sectors().clone(),
            table.prices().to_owned(),
        ).unwrap();
        prop_assert_eq!(&again, &table);

        let returns = compute_returns(&table).unwrap();
        for j in 0..n {
            let mut price = table.prices()[[0, j]];
            for i in 0..returns.num_days() {
                price *= 1.0 + returns.values()[[i, j]];
                let expected = table.prices()[[i + 1, j]];
                prop_assert!((price - expected).abs() / expected <= 1e-10);
            }
        }
    }

    /// KL divergence to the standard normal prior is non-negative.
    #[test]
    fn kl_non_negative(
        pairs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..8),
    ) {
        let mu: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let lv: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        prop_assert!(kl_divergence(&mu, &lv) >= 0.0);
    }
}
