//! `stresslab`: rolling-window latent-factor stress testing over
//! sector-tagged daily equity returns.
//!
//! Subcommands mirror the pipeline branches: `eda` (diagnostics), `pca`,
//! `ae`, `vae` (the three stress pipelines), `synth` (reproducible demo
//! data), and `report` (verify a run directory against its manifest).
//! Every run writes flat CSVs plus a `manifest.json` with a config
//! snapshot and SHA-256 digests; identical inputs, config, and seed
//! reproduce the output files byte for byte.

mod config;
mod error;
mod manifest;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(name = "stresslab", version, about)]
struct Cli {
    /// TOML run configuration; command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default `stresslab_out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed. Fallback order: this flag, config file,
    /// STRESSLAB_SEED, then 42.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct DataArgs {
    /// Price panel CSV: header `date,<TICKER>,...`, ISO dates, empty = missing.
    #[arg(long)]
    prices: Option<PathBuf>,

    /// Sector map CSV: header `ticker,sector`.
    #[arg(long)]
    sectors: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
struct WindowArgs {
    /// Rolling window length in trading days.
    #[arg(long)]
    window: Option<usize>,

    /// Window start step in trading days.
    #[arg(long)]
    stride: Option<usize>,

    /// Latent dimension count.
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args, Debug, Default, Clone)]
struct StressArgs {
    /// Stress kind: `single` or `multi`.
    #[arg(long)]
    stress: Option<String>,

    /// Component index for single-factor stress (0-based).
    #[arg(long)]
    factor: Option<usize>,

    /// Signed sigma-multiple for single-factor stress.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,

    /// Comma-separated sigma-multiples for multi-factor stress.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta: Option<Vec<f64>>,

    /// Crisis window for attribution: a preset name (`gfc2008`,
    /// `covid2020`) or `YYYY-MM-DD:YYYY-MM-DD`.
    #[arg(long)]
    crisis: Option<String>,
}

#[derive(Args, Debug, Default, Clone)]
struct TrainArgs {
    /// Maximum training epochs.
    #[arg(long)]
    epochs: Option<usize>,

    /// Minibatch size.
    #[arg(long)]
    batch_size: Option<usize>,

    /// Early-stopping patience in epochs.
    #[arg(long)]
    patience: Option<usize>,

    /// Adam learning rate.
    #[arg(long)]
    learning_rate: Option<f64>,

    /// Chronological validation tail fraction.
    #[arg(long)]
    val_fraction: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive stats, sector correlation, ADF, and GARCH diagnostics.
    Eda {
        #[command(flatten)]
        data: DataArgs,
        /// Maximum ADF lag order (default: Schwert rule).
        #[arg(long)]
        max_lag: Option<usize>,
    },
    /// PCA stress pipeline over rolling windows of raw returns.
    Pca {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        stress: StressArgs,
        /// Also dump per-window loadings and explained variances.
        #[arg(long)]
        dump_models: bool,
    },
    /// Autoencoder stress pipeline over rolling standardized windows.
    Ae {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        stress: StressArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Also dump per-window network weights (SLNN format).
        #[arg(long)]
        dump_weights: bool,
    },
    /// VAE Monte Carlo pipeline: sample the learned posterior per window.
    Vae {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Posterior samples per window.
        #[arg(long)]
        samples: Option<usize>,
        /// Weight on the KL term of the training objective.
        #[arg(long)]
        kl_weight: Option<f64>,
        /// Also dump per-window network weights (SLNN format).
        #[arg(long)]
        dump_weights: bool,
    },
    /// Generate a synthetic market from a TOML spec.
    Synth {
        /// Synthetic market spec (assets, sectors, days, seed, garch,
        /// loadings).
        #[arg(long)]
        spec: PathBuf,
    },
    /// Verify a run directory against its manifest and summarize it.
    Report {
        /// Run directory containing manifest.json.
        #[arg(long)]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }

    let file = config::load_file_config(cli.config.as_deref())?;
    let out_dir = cli
        .out
        .or_else(|| file.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("stresslab_out"));
    let seed = config::resolve_seed(cli.seed, &file)?;

    match cli.command {
        Command::Eda { data, max_lag } => {
            let resolved = config::resolve_eda(&file, &data, max_lag, seed)?;
            run::run_eda(&resolved, &out_dir)
        }
        Command::Pca {
            data,
            window,
            stress,
            dump_models,
        } => {
            let resolved = config::resolve_pca(&file, &data, &window, &stress, dump_models, seed)?;
            run::run_pca(&resolved, &out_dir)
        }
        Command::Ae {
            data,
            window,
            stress,
            train,
            dump_weights,
        } => {
            let resolved =
                config::resolve_ae(&file, &data, &window, &stress, &train, dump_weights, seed)?;
            run::run_ae(&resolved, &out_dir)
        }
        Command::Vae {
            data,
            window,
            train,
            samples,
            kl_weight,
            dump_weights,
        } => {
            let resolved = config::resolve_vae(
                &file,
                &data,
                &window,
                &train,
                samples,
                kl_weight,
                dump_weights,
                seed,
            )?;
            run::run_vae(&resolved, &out_dir)
        }
        Command::Synth { spec } => run::run_synth(&spec, &out_dir),
        Command::Report { dir } => run::run_report(&dir),
    }
}
