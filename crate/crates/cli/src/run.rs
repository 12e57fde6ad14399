//! Command runners: load data, execute the selected pipeline, write CSVs
//! and the manifest.

use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;

use stresslab_core::diagnostics::{adf_test, descriptive_stats, garch_fit, sector_correlation};
use stresslab_core::market_data::{
    compute_returns, generate_synthetic, ingest_prices, ReturnMatrix,
};
use stresslab_core::neural_nets::write_networks;
use stresslab_core::pipelines::{
    self, McRun, PcaWindowFit, PipelineKind, SkippedWindow, StressRun, WindowResult,
};

use crate::config::{
    build_portfolio, check_latent_dim, parse_crisis, path_of, AeConfig, EdaConfig, PcaConfig,
    SynthFileSpec, VaeConfig,
};
use crate::error::CliError;
use crate::manifest::{self, WindowStatus};
use crate::output;

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(format!("creating {}", out.display()), e))
}

fn load_returns(prices: &str, sectors: &str) -> Result<ReturnMatrix, CliError> {
    let table = ingest_prices(&path_of(prices), &path_of(sectors))?;
    Ok(compute_returns(&table)?)
}

fn input_digests(paths: &[(&str, &str)]) -> Result<Vec<(String, String)>, CliError> {
    paths
        .iter()
        .map(|(label, path)| Ok((label.to_string(), manifest::sha256_hex(&path_of(path))?)))
        .collect()
}

fn window_statuses(results: &[WindowResult], skipped: &[SkippedWindow]) -> Vec<WindowStatus> {
    let mut rows: Vec<WindowStatus> = results
        .iter()
        .map(|r| WindowStatus {
            index: r.window,
            start: r.start_date.to_string(),
            end: r.end_date.to_string(),
            status: "ok".to_string(),
        })
        .chain(skipped.iter().map(|s| WindowStatus {
            index: s.window,
            start: s.start_date.to_string(),
            end: s.end_date.to_string(),
            status: format!("skipped: {}", s.reason),
        }))
        .collect();
    rows.sort_by_key(|w| w.index);
    rows
}

fn mc_window_statuses(run: &McRun) -> Vec<WindowStatus> {
    let mut rows: Vec<WindowStatus> = run
        .results
        .iter()
        .map(|r| WindowStatus {
            index: r.window,
            start: r.start_date.to_string(),
            end: r.end_date.to_string(),
            status: "ok".to_string(),
        })
        .chain(run.skipped.iter().map(|s| WindowStatus {
            index: s.window,
            start: s.start_date.to_string(),
            end: s.end_date.to_string(),
            status: format!("skipped: {}", s.reason),
        }))
        .collect();
    rows.sort_by_key(|w| w.index);
    rows
}

/// Schwert's lag rule: floor(12 * (T/100)^0.25), capped so the ADF
/// precondition T >= 25 + max_lag holds.
fn schwert_lag(t: usize) -> usize {
    let rule = (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize;
    rule.min(t.saturating_sub(25))
}

pub fn run_eda(cfg: &EdaConfig, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let returns = load_returns(&cfg.prices, &cfg.sectors)?;
    let stats = descriptive_stats(&returns)?;
    let corr = sector_correlation(&returns)?;

    let t = returns.num_days();
    let max_lag = cfg.max_lag.unwrap_or_else(|| schwert_lag(t));
    let columns: Vec<(String, Vec<f64>)> = returns
        .tickers()
        .iter()
        .enumerate()
        .map(|(j, ticker)| (ticker.clone(), returns.values().column(j).to_vec()))
        .collect();
    let adf_rows: Result<Vec<_>, stresslab_core::Error> = columns
        .par_iter()
        .map(|(ticker, series)| Ok((ticker.clone(), adf_test(series, max_lag)?)))
        .collect();
    let garch_rows: Result<Vec<_>, stresslab_core::Error> = columns
        .par_iter()
        .map(|(ticker, series)| Ok((ticker.clone(), garch_fit(series)?)))
        .collect();

    output::write_stats(&out.join("stats.csv"), &stats)?;
    output::write_sector_corr(&out.join("sector_corr.csv"), &corr)?;
    output::write_adf(&out.join("adf.csv"), &adf_rows?)?;
    output::write_garch(&out.join("garch.csv"), &garch_rows?)?;

    let inputs = input_digests(&[("prices", &cfg.prices), ("sectors", &cfg.sectors)])?;
    let outputs: Vec<String> = ["stats.csv", "sector_corr.csv", "adf.csv", "garch.csv"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    manifest::write_manifest(
        out,
        "eda",
        serde_json::to_value(cfg).expect("config serializes"),
        &inputs,
        &outputs,
        Vec::new(),
    )?;
    println!(
        "eda: {} tickers, {} days -> {}",
        returns.num_assets(),
        t,
        out.display()
    );
    Ok(())
}

pub fn run_pca(cfg: &PcaConfig, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let returns = load_returns(&cfg.prices, &cfg.sectors)?;
    check_latent_dim(cfg.d, cfg.window, returns.num_assets())?;
    let portfolio = build_portfolio(&cfg.weights, returns.num_assets())?;
    let spec = cfg.stress.to_spec();

    let collected: Mutex<Vec<(usize, PcaWindowFit)>> = Mutex::new(Vec::new());
    let dump = cfg.dump_models;
    let run: StressRun = pipelines::run_pca_stress_with(
        &returns,
        cfg.window,
        cfg.d,
        &spec,
        &portfolio,
        cfg.stride,
        &|idx, fit| {
            if dump {
                collected
                    .lock()
                    .expect("sink mutex")
                    .push((idx, fit.clone()));
            }
            Ok(())
        },
    )?;

    output::write_window_results(&out.join("window_results.csv"), &run.results)?;
    output::write_sector_shifts(&out.join("sector_shifts.csv"), &run.results)?;
    let mut outputs = vec![
        "window_results.csv".to_string(),
        "sector_shifts.csv".to_string(),
    ];

    if let Some(selector) = &cfg.crisis {
        let range = parse_crisis(selector)?;
        let rows = pipelines::component_attribution(
            &returns,
            PipelineKind::Pca,
            range,
            cfg.stress.k,
            cfg.d,
            &cfg_train_default(cfg.seed),
            &portfolio,
        )?;
        output::write_attribution(&out.join("attribution.csv"), &rows)?;
        outputs.push("attribution.csv".to_string());
    }

    if dump {
        let mut fits = collected.into_inner().expect("sink mutex");
        fits.sort_by_key(|(idx, _)| *idx);
        output::write_pca_loadings(&out.join("pca_loadings.csv"), returns.tickers(), &fits)?;
        output::write_pca_explained(&out.join("pca_explained.csv"), &fits)?;
        outputs.push("pca_loadings.csv".to_string());
        outputs.push("pca_explained.csv".to_string());
    }

    let inputs = input_digests(&[("prices", &cfg.prices), ("sectors", &cfg.sectors)])?;
    manifest::write_manifest(
        out,
        "pca",
        serde_json::to_value(cfg).expect("config serializes"),
        &inputs,
        &outputs,
        window_statuses(&run.results, &run.skipped),
    )?;
    println!("pca: {} windows -> {}", run.results.len(), out.display());
    Ok(())
}

fn cfg_train_default(seed: u64) -> stresslab_core::neural_nets::TrainConfig {
    stresslab_core::neural_nets::TrainConfig {
        seed,
        ..Default::default()
    }
}

pub fn run_ae(cfg: &AeConfig, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let returns = load_returns(&cfg.prices, &cfg.sectors)?;
    check_latent_dim(cfg.d, cfg.window, returns.num_assets())?;
    if cfg.d >= returns.num_assets() {
        return Err(CliError::Usage(format!(
            "d = {} must be smaller than the asset count N = {} for the bottleneck",
            cfg.d,
            returns.num_assets()
        )));
    }
    let portfolio = build_portfolio(&cfg.weights, returns.num_assets())?;
    let spec = cfg.stress.to_spec();
    let train = cfg.train.to_core(cfg.seed);

    let dumped: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let dump = cfg.dump_weights;
    let run = pipelines::run_ae_stress_with(
        &returns,
        cfg.window,
        cfg.d,
        &spec,
        &train,
        &portfolio,
        cfg.stride,
        &|idx, fit| {
            if dump {
                let name = format!("ae_weights_w{idx:04}.slnn");
                write_networks(&out.join(&name), &[&fit.model.encoder, &fit.model.decoder])?;
                dumped.lock().expect("sink mutex").push(name);
            }
            Ok(())
        },
    )?;

    output::write_window_results(&out.join("window_results.csv"), &run.results)?;
    output::write_sector_shifts(&out.join("sector_shifts.csv"), &run.results)?;
    let mut outputs = vec![
        "window_results.csv".to_string(),
        "sector_shifts.csv".to_string(),
    ];

    if let Some(selector) = &cfg.crisis {
        let range = parse_crisis(selector)?;
        let rows = pipelines::component_attribution(
            &returns,
            PipelineKind::Ae,
            range,
            cfg.stress.k,
            cfg.d,
            &train,
            &portfolio,
        )?;
        output::write_attribution(&out.join("attribution.csv"), &rows)?;
        outputs.push("attribution.csv".to_string());
    }

    let mut dumped = dumped.into_inner().expect("sink mutex");
    dumped.sort();
    outputs.extend(dumped);

    let inputs = input_digests(&[("prices", &cfg.prices), ("sectors", &cfg.sectors)])?;
    manifest::write_manifest(
        out,
        "ae",
        serde_json::to_value(cfg).expect("config serializes"),
        &inputs,
        &outputs,
        window_statuses(&run.results, &run.skipped),
    )?;
    println!(
        "ae: {} windows ({} skipped) -> {}",
        run.results.len(),
        run.skipped.len(),
        out.display()
    );
    Ok(())
}

pub fn run_vae(cfg: &VaeConfig, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let returns = load_returns(&cfg.prices, &cfg.sectors)?;
    check_latent_dim(cfg.d, cfg.window, returns.num_assets())?;
    if cfg.d >= returns.num_assets() {
        return Err(CliError::Usage(format!(
            "d = {} must be smaller than the asset count N = {} for the bottleneck",
            cfg.d,
            returns.num_assets()
        )));
    }
    let portfolio = build_portfolio(&cfg.weights, returns.num_assets())?;
    let train = cfg.train.to_core(cfg.seed);

    let dumped: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let dump = cfg.dump_weights;
    let run = pipelines::run_vae_mc_with(
        &returns,
        cfg.window,
        cfg.d,
        cfg.samples,
        &train,
        &portfolio,
        cfg.stride,
        cfg.seed,
        cfg.kl_weight,
        &|idx, fit| {
            if dump {
                let name = format!("vae_weights_w{idx:04}.slnn");
                write_networks(
                    &out.join(&name),
                    &[
                        &fit.model.params.trunk,
                        &fit.model.params.mu_head,
                        &fit.model.params.logvar_head,
                        &fit.model.params.decoder,
                    ],
                )?;
                dumped.lock().expect("sink mutex").push(name);
            }
            Ok(())
        },
    )?;

    output::write_mc_samples(&out.join("mc_samples.csv"), &run.results)?;
    output::write_mc_hist(&out.join("mc_hist.csv"), &run.results)?;
    output::write_mc_summary(&out.join("mc_summary.csv"), &run.results)?;
    let mut outputs = vec![
        "mc_samples.csv".to_string(),
        "mc_hist.csv".to_string(),
        "mc_summary.csv".to_string(),
    ];
    let mut dumped = dumped.into_inner().expect("sink mutex");
    dumped.sort();
    outputs.extend(dumped);

    let inputs = input_digests(&[("prices", &cfg.prices), ("sectors", &cfg.sectors)])?;
    manifest::write_manifest(
        out,
        "vae",
        serde_json::to_value(cfg).expect("config serializes"),
        &inputs,
        &outputs,
        mc_window_statuses(&run),
    )?;
    println!(
        "vae: {} windows ({} skipped), {} samples each -> {}",
        run.results.len(),
        run.skipped.len(),
        cfg.samples,
        out.display()
    );
    Ok(())
}

pub fn run_synth(spec_path: &Path, out: &Path) -> Result<(), CliError> {
    ensure_dir(out)?;
    let file_spec = SynthFileSpec::load(spec_path)?;
    let spec = file_spec.to_core()?;
    let table = generate_synthetic(&spec)?;

    output::write_prices(&out.join("prices.csv"), &table)?;
    output::write_sector_map(&out.join("sectors.csv"), &table)?;

    let inputs = vec![("spec".to_string(), manifest::sha256_hex(spec_path)?)];
    let outputs = vec!["prices.csv".to_string(), "sectors.csv".to_string()];
    let config = serde_json::json!({
        "pipeline": "synth",
        "spec_file": spec_path.display().to_string(),
        "assets": spec.assets,
        "sectors": spec.sectors,
        "days": spec.days,
        "seed": spec.seed,
    });
    manifest::write_manifest(out, "synth", config, &inputs, &outputs, Vec::new())?;
    println!(
        "synth: {} assets x {} days -> {}",
        spec.assets,
        spec.days,
        out.display()
    );
    Ok(())
}

pub fn run_report(dir: &Path) -> Result<(), CliError> {
    let m = manifest::read_manifest(dir)?;
    println!(
        "run: {} (version {}, created {})",
        m.command, m.artifact_version, m.created_utc
    );

    let mut bad = Vec::new();
    for (name, expected) in &m.outputs {
        let path = dir.join(name);
        if !path.exists() {
            println!("output {name}: MISSING");
            bad.push(name.clone());
            continue;
        }
        let actual = manifest::sha256_hex(&path)?;
        if &actual == expected {
            println!("output {name}: ok");
        } else {
            println!("output {name}: DIGEST MISMATCH");
            bad.push(name.clone());
        }
    }

    // Manifest completeness: everything in the directory must be listed.
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("reading {}", dir.display()), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io("reading run dir", e))?;
        let name = entry.file_name().to_string_lossy().to_string();
        if name != manifest::MANIFEST_FILE && !m.outputs.contains_key(&name) {
            println!("output {name}: NOT IN MANIFEST");
            bad.push(name);
        }
    }

    let ok = m.windows.iter().filter(|w| w.status == "ok").count();
    let skipped = m.windows.len() - ok;
    if !m.windows.is_empty() {
        println!("windows: {ok} ok, {skipped} skipped");
        for w in m.windows.iter().filter(|w| w.status != "ok") {
            println!(
                "  window {} [{}..{}]: {}",
                w.index, w.start, w.end, w.status
            );
        }
    }

    if bad.is_empty() {
        println!("verification: ok");
        Ok(())
    } else {
        Err(CliError::Verify(format!(
            "{} file(s) failed verification",
            bad.len()
        )))
    }
}
