//! Synthetic market generator: a linear factor structure plus GARCH(1,1)
//! idiosyncratic noise, compounded into a price panel. Exposed through the
//! CLI for reproducible demos and used as oracle data by the test suites.

use std::collections::BTreeMap;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::diagnostics::GarchParams;
use crate::error::{Error, Result};

use super::PriceTable;

/// Factor loadings: an explicit N x f matrix, or drawn uniformly from
/// [0.2, 1.0) (market-factor-like, all positive) given the seed.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadingSpec {
    Random,
    Matrix(Array2<f64>),
}

/// Specification of a synthetic market.
///
/// Unlike [`GarchParams::validate`], `omega = 0` is accepted here (with
/// `alpha = beta = 0`) so a noise-free market is representable.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub assets: usize,
    pub sectors: usize,
    pub days: usize,
    pub seed: u64,
    pub garch: GarchParams,
    /// Per-factor daily volatilities; length fixes the factor count.
    pub factor_vols: Vec<f64>,
    pub loadings: LoadingSpec,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.assets == 0 {
            return Err(Error::InvalidParameter("assets must be >= 1".into()));
        }
        if self.sectors == 0 || self.sectors > self.assets {
            return Err(Error::InvalidParameter(
                "sectors must be in 1..=assets".into(),
            ));
        }
        if self.days < 2 {
            return Err(Error::InvalidParameter("days must be >= 2".into()));
        }
        let g = &self.garch;
        let garch_ok = g.omega.is_finite()
            && g.omega >= 0.0
            && g.alpha >= 0.0
            && g.beta >= 0.0
            && g.alpha + g.beta < 1.0;
        if !garch_ok {
            return Err(Error::InvalidParameter(format!(
                "invalid GARCH parameters (omega={}, alpha={}, beta={})",
                g.omega, g.alpha, g.beta
            )));
        }
        if self.factor_vols.is_empty() || self.factor_vols.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "factor_vols must be non-empty and non-negative".into(),
            ));
        }
        if let LoadingSpec::Matrix(m) = &self.loadings {
            if m.nrows() != self.assets || m.ncols() != self.factor_vols.len() {
                return Err(Error::InvalidParameter(format!(
                    "loadings must be {} x {}",
                    self.assets,
                    self.factor_vols.len()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("loadings must be finite".into()));
            }
        }
        Ok(())
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Trading dates: consecutive weekdays starting 2004-01-01.
fn trading_dates(n: usize) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(n);
    let mut d = NaiveDate::from_ymd_opt(2004, 1, 1).expect("valid date");
    while dates.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(d);
        }
        d = d + Days::new(1);
    }
    dates
}

/// Generates a cleaned price table: `prices[0] = 100`, then compounded by
/// `r_t = loadings . factor_t + garch_noise_t`. Deterministic given the seed.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<PriceTable> {
    spec.validate()?;
    let n = spec.assets;
    let k = spec.sectors;
    let f = spec.factor_vols.len();
    let steps = spec.days - 1;

    let loadings = match &spec.loadings {
        LoadingSpec::Matrix(m) => m.clone(),
        LoadingSpec::Random => {
            let mut rng = stream_rng(spec.seed, 0);
            let mut draws = Vec::with_capacity(n * f);
            for _ in 0..n * f {
                draws.push(rng.random_range(0.2..1.0));
            }
            Array2::from_shape_vec((n, f), draws).expect("draw buffer matches shape")
        }
    };

    // Common factor shocks, one stream for all days.
    let mut factor_rng = stream_rng(spec.seed, 1);
    let mut factors = Array2::zeros((steps, f));
    for t in 0..steps {
        for j in 0..f {
            let z: f64 = StandardNormal.sample(&mut factor_rng);
            factors[[t, j]] = z * spec.factor_vols[j];
        }
    }

    // Per-asset GARCH(1,1) idiosyncratic noise, one stream per asset.
    let g = &spec.garch;
    let uncond = if g.omega == 0.0 {
        0.0
    } else {
        g.omega / (1.0 - g.alpha - g.beta)
    };
    let mut returns = Array2::zeros((steps, n));
    for a in 0..n {
        let mut rng = stream_rng(spec.seed, 2 + a as u64);
        let mut var = uncond;
        for t in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            let eps = var.sqrt() * z;
            let mut r = eps;
            for j in 0..f {
                r += loadings[[a, j]] * factors[[t, j]];
            }
            returns[[t, a]] = r;
            var = g.omega + g.alpha * eps * eps + g.beta * var;
        }
    }

    let mut prices = Array2::zeros((spec.days, n));
    for a in 0..n {
        prices[[0, a]] = 100.0;
        for t in 0..steps {
            prices[[t + 1, a]] = prices[[t, a]] * (1.0 + returns[[t, a]]);
        }
    }

    let tickers: Vec<String> = (0..n).map(|i| format!("A{:02}", i + 1)).collect();
    let sector_names: Vec<String> = (0..k).map(|s| format!("SEC{}", s + 1)).collect();
    let sectors: BTreeMap<String, String> = tickers
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), sector_names[i * k / n].clone()))
        .collect();

    PriceTable::from_raw(trading_dates(spec.days), tickers, sectors, prices)
}
