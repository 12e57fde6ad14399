//! Augmented Dickey-Fuller unit-root test, constant-only specification.
//!
//! Regression: dx_t = c + gamma * x_{t-1} + sum_{j=1..p} phi_j * dx_{t-j} + e_t.
//! The lag order p is chosen by AIC over 0..=max_lag on a fixed effective
//! sample, and the test statistic is the t-ratio of gamma-hat compared
//! against the constant-only asymptotic critical values.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Asymptotic critical values for the constant-only specification at the
/// 1%, 5%, and 10% levels.
pub const ADF_CRITICAL_VALUES: [f64; 3] = [-3.43, -2.86, -2.57];

#[derive(Debug, Clone, PartialEq)]
pub struct AdfResult {
    /// t-ratio of the gamma coefficient.
    pub statistic: f64,
    /// Lag order selected by AIC.
    pub lag: usize,
    pub reject_1pct: bool,
    pub reject_5pct: bool,
    pub reject_10pct: bool,
    /// p-value interval bracketed by the critical values.
    pub p_value: (f64, f64),
}

struct OlsFit {
    gamma: f64,
    gamma_se: f64,
    rss: f64,
    n: usize,
    k: usize,
}

/// OLS of dx on [1, lagged level, lagged differences] for a fixed sample.
fn fit_lag(x: &[f64], dx: &[f64], p: usize, t_start: usize) -> Result<OlsFit> {
    let n_obs = x.len();
    let rows = n_obs - t_start;
    let k = p + 2;
    let mut design = DMatrix::zeros(rows, k);
    let mut y = DVector::zeros(rows);
    for (row, t) in (t_start..n_obs).enumerate() {
        // dx[i] = x[i+1] - x[i]; the regressand is dx at time t.
        y[row] = dx[t - 1];
        design[(row, 0)] = 1.0;
        design[(row, 1)] = x[t - 1];
        for j in 1..=p {
            design[(row, 1 + j)] = dx[t - 1 - j];
        }
    }

    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &y;
    let chol = xtx.clone().cholesky().ok_or(Error::SingularRegression)?;
    let beta = chol.solve(&xty);
    let resid = &y - &design * &beta;
    let rss = resid.dot(&resid);
    let sigma2 = rss / (rows - k) as f64;
    let xtx_inv = chol.inverse();
    let var_gamma = sigma2 * xtx_inv[(1, 1)];
    if !(var_gamma.is_finite() && var_gamma > 0.0) {
        return Err(Error::SingularRegression);
    }
    Ok(OlsFit {
        gamma: beta[1],
        gamma_se: var_gamma.sqrt(),
        rss,
        n: rows,
        k,
    })
}

fn aic(fit: &OlsFit) -> f64 {
    fit.n as f64 * (fit.rss / fit.n as f64).ln() + 2.0 * fit.k as f64
}

/// Runs the test on a series, selecting the lag order by AIC. Requires
/// `x.len() >= 25 + max_lag`.
pub fn adf_test(x: &[f64], max_lag: usize) -> Result<AdfResult> {
    if x.len() < 25 + max_lag {
        return Err(Error::SeriesTooShort {
            needed: 25 + max_lag,
            got: x.len(),
        });
    }
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();

    // All candidate lags share the sample starting at max_lag + 1 so the
    // AIC comparison is like-for-like.
    let t_start = max_lag + 1;
    let mut best: Option<(f64, usize)> = None;
    for p in 0..=max_lag {
        let fit = fit_lag(x, &dx, p, t_start)?;
        let score = aic(&fit);
        if best.is_none_or(|(b, _)| score < b) {
            best = Some((score, p));
        }
    }
    let (_, lag) = best.expect("at least one candidate lag");

    // Refit at the chosen lag using its full available sample.
    let fit = fit_lag(x, &dx, lag, lag + 1)?;
    let statistic = fit.gamma / fit.gamma_se;

    let [c1, c5, c10] = ADF_CRITICAL_VALUES;
    let reject_1pct = statistic < c1;
    let reject_5pct = statistic < c5;
    let reject_10pct = statistic < c10;
    let p_value = if reject_1pct {
        (0.0, 0.01)
    } else if reject_5pct {
        (0.01, 0.05)
    } else if reject_10pct {
        (0.05, 0.10)
    } else {
        (0.10, 1.0)
    };

    Ok(AdfResult {
        statistic,
        lag,
        reject_1pct,
        reject_5pct,
        reject_10pct,
        p_value,
    })
}
