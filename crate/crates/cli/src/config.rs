//! Run configuration: TOML file, flag overrides, and the STRESSLAB_SEED
//! fallback. Flags always win over file values, which win over the
//! environment. Unknown file keys are rejected.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use stresslab_core::neural_nets::TrainConfig;
use stresslab_core::pipelines::{
    self, StressSpec, AE_MULTI_DELTAS, DEFAULT_KL_WEIGHT, DEFAULT_LATENT_DIM, DEFAULT_MC_SAMPLES,
    DEFAULT_NN_WINDOW, DEFAULT_PCA_WINDOW, DEFAULT_SINGLE_MAGNITUDE, DEFAULT_STRIDE,
    PCA_MULTI_DELTAS,
};

use crate::error::CliError;
use crate::{DataArgs, StressArgs, TrainArgs, WindowArgs};

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub prices: Option<String>,
    pub sectors: Option<String>,
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub d: Option<usize>,
    pub samples: Option<usize>,
    pub kl_weight: Option<f64>,
    pub max_lag: Option<usize>,
    pub crisis: Option<String>,
    pub weights: Option<Vec<f64>>,
    pub stress: Option<StressFileConfig>,
    pub train: Option<TrainFileConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressFileConfig {
    pub kind: Option<String>,
    pub factor: Option<usize>,
    pub k: Option<f64>,
    pub delta: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFileConfig {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub patience: Option<usize>,
    pub learning_rate: Option<f64>,
    pub val_fraction: Option<f64>,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::io(format!("reading config {}", p.display()), e))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))
        }
    }
}

pub fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = file.seed {
        return Ok(s);
    }
    match std::env::var("STRESSLAB_SEED") {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Usage(format!("STRESSLAB_SEED `{v}` is not a u64"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn resolve_data(file: &FileConfig, data: &DataArgs) -> Result<(String, String), CliError> {
    let prices = data
        .prices
        .as_ref()
        .map(|p| p.display().to_string())
        .or_else(|| file.prices.clone())
        .ok_or_else(|| {
            CliError::Usage("missing price CSV: pass --prices or set `prices` in the config".into())
        })?;
    let sectors = data
        .sectors
        .as_ref()
        .map(|p| p.display().to_string())
        .or_else(|| file.sectors.clone())
        .ok_or_else(|| {
            CliError::Usage(
                "missing sector map: pass --sectors or set `sectors` in the config".into(),
            )
        })?;
    Ok((prices, sectors))
}

/// Stress selection carried in the manifest's config snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct StressSnapshot {
    pub kind: String,
    pub factor: usize,
    pub k: f64,
    pub delta: Vec<f64>,
}

impl StressSnapshot {
    pub fn to_spec(&self) -> StressSpec {
        match self.kind.as_str() {
            "single" => StressSpec::SingleFactor {
                index: self.factor,
                magnitude: self.k,
            },
            _ => StressSpec::MultiFactor {
                deltas: self.delta.clone(),
            },
        }
    }
}

fn resolve_stress(
    file: &FileConfig,
    args: &StressArgs,
    d: usize,
    default_deltas: &[f64],
) -> Result<StressSnapshot, CliError> {
    let file_stress = file.stress.as_ref();
    let kind = args
        .stress
        .clone()
        .or_else(|| file_stress.and_then(|s| s.kind.clone()))
        .unwrap_or_else(|| "multi".to_string());
    if kind != "single" && kind != "multi" {
        return Err(CliError::Usage(format!(
            "stress kind `{kind}` must be `single` or `multi`"
        )));
    }
    let factor = args
        .factor
        .or_else(|| file_stress.and_then(|s| s.factor))
        .unwrap_or(0);
    let k = args
        .k
        .or_else(|| file_stress.and_then(|s| s.k))
        .unwrap_or(DEFAULT_SINGLE_MAGNITUDE);
    let explicit_delta = args
        .delta
        .clone()
        .or_else(|| file_stress.and_then(|s| s.delta.clone()));
    // The documented default vector is for d = 5; cycle its pattern when
    // the user overrides d without supplying an explicit vector.
    let delta = explicit_delta
        .clone()
        .unwrap_or_else(|| default_deltas.iter().cycle().take(d).copied().collect());

    if kind == "single" && factor >= d {
        return Err(CliError::Usage(format!(
            "stress factor index {factor} out of range for d = {d}"
        )));
    }
    if kind == "multi" && explicit_delta.is_some() && delta.len() != d {
        return Err(CliError::Usage(format!(
            "multi-factor delta has {} entries but d = {d}; pass --delta with {d} values",
            delta.len()
        )));
    }
    Ok(StressSnapshot {
        kind,
        factor,
        k,
        delta,
    })
}

/// Training hyperparameters carried in the manifest's config snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct TrainSnapshot {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub learning_rate: f64,
    pub validation_fraction: f64,
}

impl TrainSnapshot {
    pub fn to_core(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            learning_rate: self.learning_rate,
            validation_fraction: self.validation_fraction,
            seed,
            ..TrainConfig::default()
        }
    }
}

fn resolve_train(file: &FileConfig, args: &TrainArgs) -> Result<TrainSnapshot, CliError> {
    let defaults = TrainConfig::default();
    let ft = file.train.as_ref();
    let snap = TrainSnapshot {
        batch_size: args
            .batch_size
            .or_else(|| ft.and_then(|t| t.batch_size))
            .unwrap_or(defaults.batch_size),
        max_epochs: args
            .epochs
            .or_else(|| ft.and_then(|t| t.epochs))
            .unwrap_or(defaults.max_epochs),
        patience: args
            .patience
            .or_else(|| ft.and_then(|t| t.patience))
            .unwrap_or(defaults.patience),
        learning_rate: args
            .learning_rate
            .or_else(|| ft.and_then(|t| t.learning_rate))
            .unwrap_or(defaults.learning_rate),
        validation_fraction: args
            .val_fraction
            .or_else(|| ft.and_then(|t| t.val_fraction))
            .unwrap_or(defaults.validation_fraction),
    };
    if snap.batch_size == 0 || snap.max_epochs == 0 {
        return Err(CliError::Usage("batch size and epochs must be >= 1".into()));
    }
    if !(snap.validation_fraction > 0.0 && snap.validation_fraction < 1.0) {
        return Err(CliError::Usage(
            "validation fraction must be in (0, 1)".into(),
        ));
    }
    Ok(snap)
}

/// Parses a crisis selector: preset name or `YYYY-MM-DD:YYYY-MM-DD`.
pub fn parse_crisis(selector: &str) -> Result<(NaiveDate, NaiveDate), CliError> {
    if let Some(range) = pipelines::crisis_preset(selector) {
        return Ok(range);
    }
    let parts: Vec<&str> = selector.split(':').collect();
    if parts.len() == 2 {
        let from = NaiveDate::parse_from_str(parts[0], "%Y-%m-%d");
        let to = NaiveDate::parse_from_str(parts[1], "%Y-%m-%d");
        if let (Ok(from), Ok(to)) = (from, to) {
            if from <= to {
                return Ok((from, to));
            }
        }
    }
    Err(CliError::Usage(format!(
        "crisis `{selector}` is neither a preset (gfc2008, covid2020) nor a YYYY-MM-DD:YYYY-MM-DD range"
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct EdaConfig {
    pub pipeline: String,
    pub prices: String,
    pub sectors: String,
    /// None selects the Schwert rule at run time.
    pub max_lag: Option<usize>,
    pub seed: u64,
}

pub fn resolve_eda(
    file: &FileConfig,
    data: &DataArgs,
    max_lag: Option<usize>,
    seed: u64,
) -> Result<EdaConfig, CliError> {
    let (prices, sectors) = resolve_data(file, data)?;
    Ok(EdaConfig {
        pipeline: "eda".into(),
        prices,
        sectors,
        max_lag: max_lag.or(file.max_lag),
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaConfig {
    pub pipeline: String,
    pub prices: String,
    pub sectors: String,
    pub window: usize,
    pub stride: usize,
    pub d: usize,
    pub confidence: f64,
    pub stress: StressSnapshot,
    /// None means equal weights over all assets.
    pub weights: Option<Vec<f64>>,
    pub crisis: Option<String>,
    pub dump_models: bool,
    pub seed: u64,
}

pub fn resolve_pca(
    file: &FileConfig,
    data: &DataArgs,
    window: &WindowArgs,
    stress: &StressArgs,
    dump_models: bool,
    seed: u64,
) -> Result<PcaConfig, CliError> {
    let (prices, sectors) = resolve_data(file, data)?;
    let w = window.window.or(file.window).unwrap_or(DEFAULT_PCA_WINDOW);
    let stride = window.stride.or(file.stride).unwrap_or(DEFAULT_STRIDE);
    let d = window.d.or(file.d).unwrap_or(DEFAULT_LATENT_DIM);
    validate_window(w, stride, d)?;
    let snap = resolve_stress(file, stress, d, &PCA_MULTI_DELTAS)?;
    Ok(PcaConfig {
        pipeline: "pca".into(),
        prices,
        sectors,
        window: w,
        stride,
        d,
        confidence: pipelines::DEFAULT_CONFIDENCE,
        stress: snap,
        weights: file.weights.clone(),
        crisis: stress.crisis.clone().or_else(|| file.crisis.clone()),
        dump_models,
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AeConfig {
    pub pipeline: String,
    pub prices: String,
    pub sectors: String,
    pub window: usize,
    pub stride: usize,
    pub d: usize,
    pub confidence: f64,
    pub stress: StressSnapshot,
    pub train: TrainSnapshot,
    pub weights: Option<Vec<f64>>,
    pub crisis: Option<String>,
    pub dump_weights: bool,
    pub seed: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn resolve_ae(
    file: &FileConfig,
    data: &DataArgs,
    window: &WindowArgs,
    stress: &StressArgs,
    train: &TrainArgs,
    dump_weights: bool,
    seed: u64,
) -> Result<AeConfig, CliError> {
    let (prices, sectors) = resolve_data(file, data)?;
    let w = window.window.or(file.window).unwrap_or(DEFAULT_NN_WINDOW);
    let stride = window.stride.or(file.stride).unwrap_or(DEFAULT_STRIDE);
    let d = window.d.or(file.d).unwrap_or(DEFAULT_LATENT_DIM);
    validate_window(w, stride, d)?;
    let snap = resolve_stress(file, stress, d, &AE_MULTI_DELTAS)?;
    Ok(AeConfig {
        pipeline: "ae".into(),
        prices,
        sectors,
        window: w,
        stride,
        d,
        confidence: pipelines::DEFAULT_CONFIDENCE,
        stress: snap,
        train: resolve_train(file, train)?,
        weights: file.weights.clone(),
        crisis: stress.crisis.clone().or_else(|| file.crisis.clone()),
        dump_weights,
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VaeConfig {
    pub pipeline: String,
    pub prices: String,
    pub sectors: String,
    pub window: usize,
    pub stride: usize,
    pub d: usize,
    pub samples: usize,
    pub kl_weight: f64,
    pub train: TrainSnapshot,
    pub weights: Option<Vec<f64>>,
    pub dump_weights: bool,
    pub seed: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn resolve_vae(
    file: &FileConfig,
    data: &DataArgs,
    window: &WindowArgs,
    train: &TrainArgs,
    samples: Option<usize>,
    kl_weight: Option<f64>,
    dump_weights: bool,
    seed: u64,
) -> Result<VaeConfig, CliError> {
    let (prices, sectors) = resolve_data(file, data)?;
    let w = window.window.or(file.window).unwrap_or(DEFAULT_NN_WINDOW);
    let stride = window.stride.or(file.stride).unwrap_or(DEFAULT_STRIDE);
    let d = window.d.or(file.d).unwrap_or(DEFAULT_LATENT_DIM);
    validate_window(w, stride, d)?;
    let samples = samples.or(file.samples).unwrap_or(DEFAULT_MC_SAMPLES);
    let kl_weight = kl_weight.or(file.kl_weight).unwrap_or(DEFAULT_KL_WEIGHT);
    if samples == 0 {
        return Err(CliError::Usage("--samples must be >= 1".into()));
    }
    if kl_weight.is_nan() || kl_weight < 0.0 {
        return Err(CliError::Usage("--kl-weight must be >= 0".into()));
    }
    Ok(VaeConfig {
        pipeline: "vae".into(),
        prices,
        sectors,
        window: w,
        stride,
        d,
        samples,
        kl_weight,
        train: resolve_train(file, train)?,
        weights: file.weights.clone(),
        dump_weights,
        seed,
    })
}

fn validate_window(w: usize, stride: usize, d: usize) -> Result<(), CliError> {
    if w < 2 {
        return Err(CliError::Usage("window must be >= 2".into()));
    }
    if stride == 0 {
        return Err(CliError::Usage("stride must be >= 1".into()));
    }
    if d == 0 {
        return Err(CliError::Usage("d must be >= 1".into()));
    }
    Ok(())
}

/// Rejects a latent dimension the loaded panel cannot support, naming the
/// constraint.
pub fn check_latent_dim(d: usize, window: usize, n_assets: usize) -> Result<(), CliError> {
    let max_d = n_assets.min(window - 1);
    if d > max_d {
        return Err(CliError::Usage(format!(
            "d = {d} violates d <= min(window - 1, N) = min({}, {n_assets}) = {max_d}",
            window - 1
        )));
    }
    Ok(())
}

/// Synthetic market spec file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFileSpec {
    pub assets: usize,
    pub sectors: usize,
    pub days: usize,
    pub seed: u64,
    pub garch: GarchFileParams,
    pub loadings: LoadingsFile,
    /// Per-factor daily volatilities; defaults to 0.01 per factor.
    pub factor_vols: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GarchFileParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LoadingsFile {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

impl SynthFileSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading synth spec {}", path.display()), e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("synth spec {}: {e}", path.display())))
    }

    pub fn to_core(&self) -> Result<stresslab_core::market_data::SynthSpec, CliError> {
        use stresslab_core::market_data::LoadingSpec;
        let loadings = match &self.loadings {
            LoadingsFile::Named(name) if name == "random" => LoadingSpec::Random,
            LoadingsFile::Named(name) => {
                return Err(CliError::Usage(format!(
                    "loadings `{name}` not recognized; use \"random\" or an inline matrix"
                )))
            }
            LoadingsFile::Matrix(rows) => {
                let n = rows.len();
                let f = rows.first().map(|r| r.len()).unwrap_or(0);
                if n == 0 || f == 0 || rows.iter().any(|r| r.len() != f) {
                    return Err(CliError::Usage(
                        "loadings matrix must be rectangular and non-empty".into(),
                    ));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                LoadingSpec::Matrix(
                    ndarray::Array2::from_shape_vec((n, f), flat).expect("rectangular loadings"),
                )
            }
        };
        let factors = match (&self.factor_vols, &loadings) {
            (Some(v), _) => v.clone(),
            (None, LoadingSpec::Matrix(m)) => vec![0.01; m.ncols()],
            (None, LoadingSpec::Random) => vec![0.01],
        };
        Ok(stresslab_core::market_data::SynthSpec {
            assets: self.assets,
            sectors: self.sectors,
            days: self.days,
            seed: self.seed,
            garch: stresslab_core::diagnostics::GarchParams {
                omega: self.garch.omega,
                alpha: self.garch.alpha,
                beta: self.garch.beta,
            },
            factor_vols: factors,
            loadings,
        })
    }
}

/// Builds the portfolio: explicit weights (validated) or equal weight.
pub fn build_portfolio(
    weights: &Option<Vec<f64>>,
    n_assets: usize,
) -> Result<stresslab_core::risk_metrics::PortfolioSpec, CliError> {
    use stresslab_core::risk_metrics::PortfolioSpec;
    match weights {
        None => Ok(PortfolioSpec::equal_weight(n_assets)),
        Some(w) => {
            if w.len() != n_assets {
                return Err(CliError::Usage(format!(
                    "weights have {} entries but the panel has {n_assets} assets",
                    w.len()
                )));
            }
            Ok(PortfolioSpec::new(w.clone())?)
        }
    }
}

pub fn path_of(s: &str) -> PathBuf {
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DataArgs, StressArgs, TrainArgs, WindowArgs};

    fn data_args() -> DataArgs {
        DataArgs {
            prices: Some(PathBuf::from("p.csv")),
            sectors: Some(PathBuf::from("s.csv")),
        }
    }

    #[test]
    fn empty_config_resolves_to_documented_defaults() {
        let file = FileConfig::default();
        let pca = resolve_pca(
            &file,
            &data_args(),
            &WindowArgs::default(),
            &StressArgs::default(),
            false,
            42,
        )
        .unwrap();
        assert_eq!(pca.window, 252);
        assert_eq!(pca.stride, 21);
        assert_eq!(pca.d, 5);
        assert_eq!(pca.stress.kind, "multi");
        assert_eq!(pca.stress.delta, vec![2.0, -1.5, 1.0, 0.5, -0.5]);
        assert_eq!(pca.stress.k, 2.0);

        let ae = resolve_ae(
            &file,
            &data_args(),
            &WindowArgs::default(),
            &StressArgs::default(),
            &TrainArgs::default(),
            false,
            42,
        )
        .unwrap();
        assert_eq!(ae.window, 504);
        assert_eq!(ae.stress.delta, vec![2.0, -1.0, 1.5, -0.5, 1.0]);
        assert_eq!(ae.train.batch_size, 32);
        assert_eq!(ae.train.max_epochs, 200);
        assert_eq!(ae.train.patience, 10);
        assert_eq!(ae.train.validation_fraction, 0.2);

        let vae = resolve_vae(
            &file,
            &data_args(),
            &WindowArgs::default(),
            &TrainArgs::default(),
            None,
            None,
            false,
            42,
        )
        .unwrap();
        assert_eq!(vae.window, 504);
        assert_eq!(vae.samples, 1000);
        assert_eq!(vae.kl_weight, 1.0);
    }

    #[test]
    fn flags_override_file_values() {
        let file: FileConfig = toml::from_str("window = 504\nstride = 10\n").unwrap();
        let args = WindowArgs {
            window: Some(252),
            stride: None,
            d: None,
        };
        let pca = resolve_pca(
            &file,
            &data_args(),
            &args,
            &StressArgs::default(),
            false,
            42,
        )
        .unwrap();
        assert_eq!(pca.window, 252);
        assert_eq!(pca.stride, 10);
    }

    #[test]
    fn unknown_file_keys_rejected() {
        let bad: Result<FileConfig, _> = toml::from_str("wnidow = 252\n");
        assert!(bad.is_err());
    }

    #[test]
    fn latent_dim_constraint_named_in_error() {
        let err = check_latent_dim(30, 252, 25).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("d = 30"), "{msg}");
        assert!(msg.contains("min(window - 1, N)"), "{msg}");
        assert!(check_latent_dim(5, 252, 25).is_ok());
        assert!(check_latent_dim(5, 5, 25).is_err());
    }

    #[test]
    fn crisis_parsing() {
        assert!(parse_crisis("gfc2008").is_ok());
        assert!(parse_crisis("covid2020").is_ok());
        let (from, to) = parse_crisis("2011-02-03:2012-04-05").unwrap();
        assert_eq!(from.to_string(), "2011-02-03");
        assert_eq!(to.to_string(), "2012-04-05");
        assert!(parse_crisis("2012-04-05:2011-02-03").is_err());
        assert!(parse_crisis("dotcom").is_err());
    }

    #[test]
    fn multi_delta_length_must_match_d() {
        let file = FileConfig::default();
        let args = StressArgs {
            stress: Some("multi".into()),
            delta: Some(vec![1.0, 2.0]),
            ..StressArgs::default()
        };
        let window = WindowArgs {
            d: Some(5),
            ..WindowArgs::default()
        };
        assert!(resolve_pca(&file, &data_args(), &window, &args, false, 1).is_err());
    }

    #[test]
    fn synth_spec_matrix_and_random() {
        let random: SynthFileSpec = toml::from_str(
            "assets = 4\nsectors = 2\ndays = 10\nseed = 1\n\
             garch = { omega = 1e-6, alpha = 0.05, beta = 0.9 }\nloadings = \"random\"\n",
        )
        .unwrap();
        let spec = random.to_core().unwrap();
        assert_eq!(spec.factor_vols, vec![0.01]);

        let matrix: SynthFileSpec = toml::from_str(
            "assets = 2\nsectors = 1\ndays = 10\nseed = 1\n\
             garch = { omega = 1e-6, alpha = 0.05, beta = 0.9 }\n\
             loadings = [[1.0, 0.0], [0.0, 1.0]]\n",
        )
        .unwrap();
        let spec = matrix.to_core().unwrap();
        assert_eq!(spec.factor_vols.len(), 2);

        let bad: SynthFileSpec = toml::from_str(
            "assets = 2\nsectors = 1\ndays = 10\nseed = 1\n\
             garch = { omega = 1e-6, alpha = 0.05, beta = 0.9 }\nloadings = \"gaussian\"\n",
        )
        .unwrap();
        assert!(bad.to_core().is_err());
    }
}
