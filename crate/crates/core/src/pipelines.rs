//! Rolling-window orchestration of the three stress pipelines.
//!
//! Latent perturbations shift an entire score/latent column by the same
//! amount, so every window yields a full stressed return path from which
//! path metrics (drawdown) are computable. Baselines use the model's own
//! reconstruction, which makes the null stress an exact identity.
//!
//! Window workers run in a parallel map with per-window seeds derived as
//! `master_seed + window_index`; result order is by window index.

use chrono::NaiveDate;
use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor_pca::PcaModel;
use crate::market_data::{
    destandardize, fit_standardizer, rolling_windows, standardize, ReturnMatrix, Standardizer,
    WindowView,
};
use crate::neural_nets::{sample_latent, train_ae, train_vae, AeModel, TrainConfig, VaeModel};
use crate::risk_metrics::{
    delta_metrics, portfolio_returns, risk_report, sector_shifts, DeltaReport, PortfolioSpec,
    RiskReport, SectorShift,
};
use crate::stats;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;
pub const DEFAULT_PCA_WINDOW: usize = 252;
pub const DEFAULT_NN_WINDOW: usize = 504;
pub const DEFAULT_LATENT_DIM: usize = 5;
pub const DEFAULT_STRIDE: usize = 21;
pub const DEFAULT_MC_SAMPLES: usize = 1000;
pub const DEFAULT_KL_WEIGHT: f64 = 1.0;
pub const DEFAULT_SINGLE_MAGNITUDE: f64 = 2.0;
pub const MC_HIST_BINS: usize = 50;

/// Default multi-factor perturbation vector for the PCA pipeline, in
/// per-component standard-deviation multiples.
pub const PCA_MULTI_DELTAS: [f64; 5] = [2.0, -1.5, 1.0, 0.5, -0.5];

/// Default multi-latent perturbation vector for the AE pipeline.
pub const AE_MULTI_DELTAS: [f64; 5] = [2.0, -1.0, 1.5, -0.5, 1.0];

/// Named crisis windows used for component attribution.
pub fn crisis_preset(name: &str) -> Option<(NaiveDate, NaiveDate)> {
    let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid preset date");
    match name {
        "gfc2008" => Some((d(2008, 9, 1), d(2009, 3, 31))),
        "covid2020" => Some((d(2020, 2, 1), d(2020, 5, 31))),
        _ => None,
    }
}

/// A latent-space perturbation: either one component shifted by a signed
/// multiple of its own standard deviation, or all components shifted by a
/// vector of such multiples.
#[derive(Debug, Clone, PartialEq)]
pub enum StressSpec {
    SingleFactor { index: usize, magnitude: f64 },
    MultiFactor { deltas: Vec<f64> },
}

impl StressSpec {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            StressSpec::SingleFactor { index, magnitude } => {
                if *index >= d {
                    return Err(Error::InvalidParameter(format!(
                        "stress component index {index} out of range 0..{d}"
                    )));
                }
                if !magnitude.is_finite() {
                    return Err(Error::InvalidParameter(
                        "stress magnitude not finite".into(),
                    ));
                }
            }
            StressSpec::MultiFactor { deltas } => {
                if deltas.len() != d {
                    return Err(Error::DimensionMismatch {
                        context: "multi-factor stress",
                        expected: d,
                        got: deltas.len(),
                    });
                }
                if deltas.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("stress deltas not finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Absolute per-column shifts given per-column standard deviations.
    pub fn shifts(&self, sigmas: &[f64]) -> Vec<f64> {
        match self {
            StressSpec::SingleFactor { index, magnitude } => {
                let mut out = vec![0.0; sigmas.len()];
                out[*index] = magnitude * sigmas[*index];
                out
            }
            StressSpec::MultiFactor { deltas } => {
                deltas.iter().zip(sigmas).map(|(d, s)| d * s).collect()
            }
        }
    }
}

/// Per-window stress outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub window: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub baseline: RiskReport,
    pub stressed: RiskReport,
    pub delta: DeltaReport,
    pub sector_shift: SectorShift,
    pub stress: StressSpec,
}

/// A window dropped from a run, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedWindow {
    pub window: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub reason: String,
}

/// Output of a PCA or AE stress run.
#[derive(Debug, Clone, PartialEq)]
pub struct StressRun {
    pub results: Vec<WindowResult>,
    pub skipped: Vec<SkippedWindow>,
}

/// Summary statistics of a Monte Carlo sample.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    /// 5% order-statistic quantile of the sampled returns.
    pub q05: f64,
}

/// Per-window Monte Carlo distribution of stressed portfolio returns.
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub window: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub samples: Vec<f64>,
    pub summary: McSummary,
    /// `MC_HIST_BINS + 1` edges spanning [min, max].
    pub hist_edges: Vec<f64>,
    /// Counts per bin; sums to the sample count.
    pub hist_counts: Vec<usize>,
}

/// Output of a VAE Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub results: Vec<McResult>,
    pub skipped: Vec<SkippedWindow>,
}

fn column_stds(m: &Array2<f64>) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| {
            let col: Vec<f64> = m.column(j).to_vec();
            stats::sample_std(&col)
        })
        .collect()
}

fn shift_columns(m: &Array2<f64>, shifts: &[f64]) -> Array2<f64> {
    let mut out = m.clone();
    for (j, s) in shifts.iter().enumerate() {
        out.column_mut(j).mapv_inplace(|v| v + s);
    }
    out
}

/// Builds the per-window result (metrics, deltas, sector shifts) from the
/// baseline and stressed reconstructions.
pub fn window_result_from_recons(
    window: &WindowView<'_>,
    stress: &StressSpec,
    baseline_recon: ArrayView2<'_, f64>,
    stressed_recon: ArrayView2<'_, f64>,
    portfolio: &PortfolioSpec,
) -> Result<WindowResult> {
    let base_series = portfolio_returns(baseline_recon, portfolio)?;
    let stressed_series = portfolio_returns(stressed_recon, portfolio)?;
    let baseline = risk_report(&base_series, DEFAULT_CONFIDENCE)?;
    let stressed = risk_report(&stressed_series, DEFAULT_CONFIDENCE)?;
    let delta = delta_metrics(&baseline, &stressed);
    let sector_shift = sector_shifts(
        baseline_recon,
        stressed_recon,
        window.matrix().tickers(),
        window.matrix().sectors(),
    )?;
    Ok(WindowResult {
        window: window.index(),
        start_date: window.start_date(),
        end_date: window.end_date(),
        baseline,
        stressed,
        delta,
        sector_shift,
        stress: stress.clone(),
    })
}

/// Fitted PCA state of one window: the model, its scores, the baseline
/// reconstruction, and per-score-column standard deviations.
#[derive(Debug, Clone)]
pub struct PcaWindowFit {
    pub model: PcaModel,
    pub scores: Array2<f64>,
    pub baseline_recon: Array2<f64>,
    pub sigmas: Vec<f64>,
}

pub fn fit_pca_window(window: &WindowView<'_>, d: usize) -> Result<PcaWindowFit> {
    let model = PcaModel::fit(window, d)?;
    let scores = model.transform(window.slice())?;
    let baseline_recon = model.inverse_transform(scores.view())?;
    let sigmas = column_stds(&scores);
    Ok(PcaWindowFit {
        model,
        scores,
        baseline_recon,
        sigmas,
    })
}

impl PcaWindowFit {
    /// Reconstruction after shifting score columns by absolute amounts.
    pub fn stressed_recon(&self, shifts: &[f64]) -> Result<Array2<f64>> {
        let stressed_scores = shift_columns(&self.scores, shifts);
        self.model.inverse_transform(stressed_scores.view())
    }
}

/// One PCA window: fit on raw returns, perturb scores, reconstruct.
pub fn pca_stress_window(
    window: &WindowView<'_>,
    d: usize,
    spec: &StressSpec,
    portfolio: &PortfolioSpec,
) -> Result<WindowResult> {
    spec.validate(d)?;
    let fit = fit_pca_window(window, d)?;
    let stressed = fit.stressed_recon(&spec.shifts(&fit.sigmas))?;
    window_result_from_recons(
        window,
        spec,
        fit.baseline_recon.view(),
        stressed.view(),
        portfolio,
    )
}

/// PCA stress over rolling windows (fit, perturb, reconstruct, measure),
/// parallel across windows. The sink observes every fitted window (for
/// model dumps); its errors abort the run.
pub fn run_pca_stress_with<F>(
    r: &ReturnMatrix,
    w: usize,
    d: usize,
    spec: &StressSpec,
    portfolio: &PortfolioSpec,
    stride: usize,
    sink: &F,
) -> Result<StressRun>
where
    F: Fn(usize, &PcaWindowFit) -> Result<()> + Sync,
{
    spec.validate(d)?;
    let windows = rolling_windows(r, w, stride)?;
    let results: Result<Vec<WindowResult>> = windows
        .par_iter()
        .map(|win| {
            let fit = fit_pca_window(win, d)?;
            sink(win.index(), &fit)?;
            let stressed = fit.stressed_recon(&spec.shifts(&fit.sigmas))?;
            window_result_from_recons(
                win,
                spec,
                fit.baseline_recon.view(),
                stressed.view(),
                portfolio,
            )
        })
        .collect();
    Ok(StressRun {
        results: results?,
        skipped: Vec::new(),
    })
}

pub fn run_pca_stress(
    r: &ReturnMatrix,
    w: usize,
    d: usize,
    spec: &StressSpec,
    portfolio: &PortfolioSpec,
    stride: usize,
) -> Result<StressRun> {
    run_pca_stress_with(r, w, d, spec, portfolio, stride, &|_, _| Ok(()))
}

/// Fitted AE state of one window: the trained model, the window's
/// standardizer, encoded latents, the destandardized baseline
/// reconstruction, and per-latent-column standard deviations.
#[derive(Debug, Clone)]
pub struct AeWindowFit {
    pub model: AeModel,
    pub standardizer: Standardizer,
    pub latents: Array2<f64>,
    pub baseline_recon: Array2<f64>,
    pub sigmas: Vec<f64>,
}

pub fn fit_ae_window(window: &WindowView<'_>, d: usize, cfg: &TrainConfig) -> Result<AeWindowFit> {
    let standardizer = fit_standardizer(window)?;
    let z_data = standardize(window.slice(), &standardizer)?;
    let mut model = train_ae(z_data.view(), d, cfg)?;
    model.standardizer = Some(standardizer.clone());
    let latents = model.encode(z_data.view())?;
    let baseline_std = model.decode(latents.view())?;
    let baseline_recon = destandardize(baseline_std.view(), &standardizer)?;
    let sigmas = column_stds(&latents);
    Ok(AeWindowFit {
        model,
        standardizer,
        latents,
        baseline_recon,
        sigmas,
    })
}

impl AeWindowFit {
    /// Destandardized reconstruction after shifting latent columns.
    pub fn stressed_recon(&self, shifts: &[f64]) -> Result<Array2<f64>> {
        let stressed_latents = shift_columns(&self.latents, shifts);
        let stressed_std = self.model.decode(stressed_latents.view())?;
        destandardize(stressed_std.view(), &self.standardizer)
    }
}

/// One AE window: standardize, train, perturb latents, decode, rescale.
pub fn ae_stress_window(
    window: &WindowView<'_>,
    d: usize,
    spec: &StressSpec,
    cfg: &TrainConfig,
    portfolio: &PortfolioSpec,
) -> Result<WindowResult> {
    spec.validate(d)?;
    let fit = fit_ae_window(window, d, cfg)?;
    let stressed = fit.stressed_recon(&spec.shifts(&fit.sigmas))?;
    window_result_from_recons(
        window,
        spec,
        fit.baseline_recon.view(),
        stressed.view(),
        portfolio,
    )
}

/// Training config for window `index` of a run: the master seed plus the
/// window index.
pub fn derive_window_config(cfg: &TrainConfig, index: usize) -> TrainConfig {
    TrainConfig {
        seed: cfg.seed.wrapping_add(index as u64),
        ..cfg.clone()
    }
}

/// AE stress over rolling windows. Per-window training seeds are
/// `cfg.seed + window_index`; a window whose training diverges is skipped
/// with a diagnostic record rather than failing the run. The sink observes
/// every fitted window (for weight dumps); its errors abort the run.
#[allow(clippy::too_many_arguments)]
pub fn run_ae_stress_with<F>(
    r: &ReturnMatrix,
    w: usize,
    d: usize,
    spec: &StressSpec,
    cfg: &TrainConfig,
    portfolio: &PortfolioSpec,
    stride: usize,
    sink: &F,
) -> Result<StressRun>
where
    F: Fn(usize, &AeWindowFit) -> Result<()> + Sync,
{
    spec.validate(d)?;
    let windows = rolling_windows(r, w, stride)?;
    let outcomes: Vec<Result<WindowResult>> = windows
        .par_iter()
        .map(|win| {
            let wcfg = derive_window_config(cfg, win.index());
            let fit = fit_ae_window(win, d, &wcfg)?;
            sink(win.index(), &fit)?;
            let stressed = fit.stressed_recon(&spec.shifts(&fit.sigmas))?;
            window_result_from_recons(
                win,
                spec,
                fit.baseline_recon.view(),
                stressed.view(),
                portfolio,
            )
        })
        .collect();
    collect_stress_outcomes(&windows, outcomes)
}

pub fn run_ae_stress(
    r: &ReturnMatrix,
    w: usize,
    d: usize,
    spec: &StressSpec,
    cfg: &TrainConfig,
    portfolio: &PortfolioSpec,
    stride: usize,
) -> Result<StressRun> {
    run_ae_stress_with(r, w, d, spec, cfg, portfolio, stride, &|_, _| Ok(()))
}

fn collect_stress_outcomes(
    windows: &[WindowView<'_>],
    outcomes: Vec<Result<WindowResult>>,
) -> Result<StressRun> {
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (win, outcome) in windows.iter().zip(outcomes) {
        match outcome {
            Ok(res) => results.push(res),
            Err(Error::TrainingDiverged { epoch }) => skipped.push(SkippedWindow {
                window: win.index(),
                start_date: win.start_date(),
                end_date: win.end_date(),
                reason: format!("training diverged (non-finite loss) at epoch {epoch}"),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(StressRun { results, skipped })
}

/// RNG stream for Monte Carlo row/noise draws, distinct from the training
/// streams that share the same per-window seed.
const STREAM_MC: u64 = 3;

/// Trained VAE state of one window: the model, the window's standardizer,
/// per-row posterior parameters, and the seed its Monte Carlo stream
/// derives from.
#[derive(Debug, Clone)]
pub struct VaeWindowFit {
    pub model: VaeModel,
    pub standardizer: Standardizer,
    pub mus: Array2<f64>,
    pub logvars: Array2<f64>,
    pub seed: u64,
}

pub fn fit_vae_window(
    window: &WindowView<'_>,
    d: usize,
    cfg: &TrainConfig,
    kl_weight: f64,
) -> Result<VaeWindowFit> {
    let standardizer = fit_standardizer(window)?;
    let z_data = standardize(window.slice(), &standardizer)?;
    let mut model = train_vae(z_data.view(), d, cfg, kl_weight)?;
    model.standardizer = Some(standardizer.clone());
    let (mus, logvars) = model.posterior(z_data.view())?;
    Ok(VaeWindowFit {
        model,
        standardizer,
        mus,
        logvars,
        seed: cfg.seed,
    })
}

impl VaeWindowFit {
    /// Draws `m` posterior samples: pick a window row uniformly at random,
    /// sample that row's latent distribution, decode, rescale, and reduce
    /// to a portfolio return across assets for that reconstructed day.
    pub fn sample(
        &self,
        window: &WindowView<'_>,
        m: usize,
        portfolio: &PortfolioSpec,
    ) -> Result<McResult> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "sample count M must be >= 1".into(),
            ));
        }
        let d = self.model.latent_dim();
        let mut rng = crate::neural_nets::stream_rng(self.seed, STREAM_MC);
        let rows = self.mus.nrows();
        let mut samples = Vec::with_capacity(m);
        for _ in 0..m {
            let row = rng.random_range(0..rows);
            let mut eps = Vec::with_capacity(d);
            for _ in 0..d {
                let e: f64 = StandardNormal.sample(&mut rng);
                eps.push(e);
            }
            let z = sample_latent(
                &self.mus.row(row).to_vec(),
                &self.logvars.row(row).to_vec(),
                &eps,
            )?;
            let z_mat = Array2::from_shape_vec((1, d), z).expect("latent row shape");
            let recon_std = self.model.decode(z_mat.view())?;
            let recon = destandardize(recon_std.view(), &self.standardizer)?;
            samples.push(portfolio_returns(recon.view(), portfolio)?[0]);
        }

        let (hist_edges, hist_counts) = histogram(&samples, MC_HIST_BINS);
        let summary = McSummary {
            mean: stats::mean(&samples),
            std: stats::sample_std(&samples),
            skewness: stats::skewness(&samples),
            q05: stats::kth_smallest(&samples, stats::tail_count(samples.len(), 0.95)),
        };
        Ok(McResult {
            window: window.index(),
            start_date: window.start_date(),
            end_date: window.end_date(),
            samples,
            summary,
            hist_edges,
            hist_counts,
        })
    }
}

/// One VAE window: train, then Monte Carlo sample the posterior.
pub fn vae_mc_window(
    window: &WindowView<'_>,
    d: usize,
    m: usize,
    cfg: &TrainConfig,
    kl_weight: f64,
    portfolio: &PortfolioSpec,
) -> Result<McResult> {
    let fit = fit_vae_window(window, d, cfg, kl_weight)?;
    fit.sample(window, m, portfolio)
}

fn histogram(samples: &[f64], bins: usize) -> (Vec<f64>, Vec<usize>) {
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
    edges[bins] = max;
    let mut counts = vec![0usize; bins];
    for x in samples {
        let idx = if width > 0.0 {
            (((x - min) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    (edges, counts)
}

/// VAE Monte Carlo over rolling windows. Per-window seeds are
/// `seed + window_index`; diverged windows are skipped with a record. The
/// sink observes every fitted window (for weight dumps); its errors abort
/// the run.
#[allow(clippy::too_many_arguments)]
pub fn run_vae_mc_with<F>(
    r: &ReturnMatrix,
    w: usize,
    d: usize,
    m: usize,
    cfg: &TrainConfig,
    portfolio: &PortfolioSpec,
    stride: usize,
    seed: u64,
    kl_weight: f64,
    sink: &F,
) -> Result<McRun>
where
    F: Fn(usize, &VaeWindowFit) -> Result<()> + Sync,
{
    let windows = rolling_windows(r, w, stride)?;
    let outcomes: Vec<Result<McResult>> = windows
        .par_iter()
        .map(|win| {
            let wcfg = derive_window_config(
                &TrainConfig {
                    seed,
                    ..cfg.clone()
                },
                win.index(),
            );
            let fit = fit_vae_window(win, d, &wcfg, kl_weight)?;
            sink(win.index(), &fit)?;
            fit.sample(win, m, portfolio)
        })
        .collect();
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (win, outcome) in windows.iter().zip(outcomes) {
        match outcome {
            Ok(res) => results.push(res),
            Err(Error::TrainingDiverged { epoch }) => skipped.push(SkippedWindow {
                window: win.index(),
                start_date: win.start_date(),
                end_date: win.end_date(),
                reason: format!("training diverged (non-finite loss) at epoch {epoch}"),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(McRun { results, skipped })
}

/// VAE Monte Carlo over rolling windows.
#[allow(clippy::too_many_arguments)]
pub fn run_vae_mc(
    r: &ReturnMatrix,
    w: usize,
    d: usize,
    m: usize,
    cfg: &TrainConfig,
    portfolio: &PortfolioSpec,
    stride: usize,
    seed: u64,
    kl_weight: f64,
) -> Result<McRun> {
    run_vae_mc_with(
        r,
        w,
        d,
        m,
        cfg,
        portfolio,
        stride,
        seed,
        kl_weight,
        &|_, _| Ok(()),
    )
}

/// Which latent-factor pipeline attribution should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineKind {
    Pca,
    Ae,
}

/// Per-factor stress impact on one crisis window.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionRow {
    /// "PC1".."PCd" or "Z1".."Zd".
    pub factor: String,
    pub d_var: f64,
    pub d_es: f64,
    pub d_drawdown: f64,
}

/// Stresses each latent dimension in isolation at `k` standard deviations
/// over the date-range window and records the delta metrics, one row per
/// dimension. The model is fitted once and reused across factors.
pub fn component_attribution(
    r: &ReturnMatrix,
    kind: PipelineKind,
    range: (NaiveDate, NaiveDate),
    k: f64,
    d: usize,
    cfg: &TrainConfig,
    portfolio: &PortfolioSpec,
) -> Result<Vec<AttributionRow>> {
    let (start, len) = r.date_span(range.0, range.1).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "crisis range {}..{} has no data rows",
            range.0, range.1
        ))
    })?;
    let window = r.window(0, start, len)?;

    let base_series_and_stressed = |baseline_recon: &Array2<f64>,
                                    stressed_of: &dyn Fn(&[f64]) -> Result<Array2<f64>>,
                                    sigmas: &[f64]|
     -> Result<Vec<AttributionRow>> {
        let base_series = portfolio_returns(baseline_recon.view(), portfolio)?;
        let baseline = risk_report(&base_series, DEFAULT_CONFIDENCE)?;
        let prefix = match kind {
            PipelineKind::Pca => "PC",
            PipelineKind::Ae => "Z",
        };
        let mut rows = Vec::with_capacity(d);
        for i in 0..d {
            let spec = StressSpec::SingleFactor {
                index: i,
                magnitude: k,
            };
            let stressed = stressed_of(&spec.shifts(sigmas))?;
            let stressed_series = portfolio_returns(stressed.view(), portfolio)?;
            let stressed_report = risk_report(&stressed_series, DEFAULT_CONFIDENCE)?;
            let delta = delta_metrics(&baseline, &stressed_report);
            rows.push(AttributionRow {
                factor: format!("{prefix}{}", i + 1),
                d_var: delta.d_var,
                d_es: delta.d_es,
                d_drawdown: delta.d_drawdown,
            });
        }
        Ok(rows)
    };

    match kind {
        PipelineKind::Pca => {
            let fit = fit_pca_window(&window, d)?;
            base_series_and_stressed(
                &fit.baseline_recon,
                &|shifts| fit.stressed_recon(shifts),
                &fit.sigmas,
            )
        }
        PipelineKind::Ae => {
            let fit = fit_ae_window(&window, d, cfg)?;
            base_series_and_stressed(
                &fit.baseline_recon,
                &|shifts| fit.stressed_recon(shifts),
                &fit.sigmas,
            )
        }
    }
}
