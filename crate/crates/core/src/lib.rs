//! Rolling-window latent-factor stress testing for sector-tagged equity
//! return panels.
//!
//! Three pipelines share one skeleton: extract latent risk factors from a
//! rolling window of daily returns, shock (or sample) the latent space,
//! reconstruct stressed returns, and measure the portfolio impact.
//!
//! - [`pipelines::run_pca_stress`] — linear factors via windowed PCA,
//!   deterministic perturbations.
//! - [`pipelines::run_ae_stress`] — nonlinear factors via a per-window
//!   autoencoder, deterministic perturbations of the learned latents.
//! - [`pipelines::run_vae_mc`] — a variational autoencoder whose posterior
//!   is sampled Monte Carlo style to produce a distribution of stressed
//!   portfolio returns.
//!
//! Supporting modules: [`market_data`] (ingest, cleaning, returns, windows,
//! synthetic markets), [`diagnostics`] (descriptive stats, sector
//! correlation, ADF, GARCH), [`factor_pca`], [`neural_nets`] (from-scratch
//! MLPs with analytic backprop and Adam), and [`risk_metrics`] (VaR, ES,
//! drawdown, deltas, sector shifts).
//!
//! Every stochastic operation takes an explicit seed and all results are
//! pure functions of (data, config, seed).

pub mod diagnostics;
pub mod error;
pub mod factor_pca;
pub mod market_data;
pub mod neural_nets;
pub mod pipelines;
pub mod risk_metrics;

mod stats;

pub use error::{Error, Result};
