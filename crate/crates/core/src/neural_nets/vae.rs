//! Variational autoencoder: a shared tanh trunk feeding parallel linear
//! mu / log-variance heads, a reparameterized sampler, and a symmetric
//! decoder. The training objective is per-sample squared reconstruction
//! error plus `kl_weight` times the closed-form KL divergence to the
//! standard Gaussian prior, averaged over the batch.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::market_data::Standardizer;

use super::adam::Adam;
use super::mlp::{self, Activation, MlpGrads, MlpParams};
use super::{
    gather_rows, stream_rng, TrainConfig, TrainReport, HIDDEN_DIM, STREAM_INIT, STREAM_NOISE,
    STREAM_SHUFFLE,
};

/// The VAE's trainable networks.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeParams {
    /// N -> 16 shared encoder trunk, tanh output.
    pub trunk: MlpParams,
    /// 16 -> d linear head producing mu.
    pub mu_head: MlpParams,
    /// 16 -> d linear head producing log sigma^2.
    pub logvar_head: MlpParams,
    /// d -> 16 -> N decoder, tanh hidden, linear output.
    pub decoder: MlpParams,
}

impl VaeParams {
    pub fn init(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, STREAM_INIT);
        let trunk = mlp::init_with_rng(&[n, HIDDEN_DIM], Activation::Tanh, &mut rng);
        let mu_head = mlp::init_with_rng(&[HIDDEN_DIM, d], Activation::Linear, &mut rng);
        let logvar_head = mlp::init_with_rng(&[HIDDEN_DIM, d], Activation::Linear, &mut rng);
        let decoder = mlp::init_with_rng(&[d, HIDDEN_DIM, n], Activation::Linear, &mut rng);
        Self {
            trunk,
            mu_head,
            logvar_head,
            decoder,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.trunk.input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.mu_head.output_dim()
    }

    /// (mu, log sigma^2) for a standardized batch.
    pub fn posterior(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array2<f64>)> {
        let h = mlp::forward(&self.trunk, x)?;
        let mu = mlp::forward(&self.mu_head, h.view())?;
        let logvar = mlp::forward(&self.logvar_head, h.view())?;
        Ok((mu, logvar))
    }

    pub fn decode(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        mlp::forward(&self.decoder, z)
    }
}

/// Gradients for every network in [`VaeParams`].
#[derive(Debug, Clone)]
pub struct VaeGrads {
    pub trunk: MlpGrads,
    pub mu_head: MlpGrads,
    pub logvar_head: MlpGrads,
    pub decoder: MlpGrads,
}

/// Closed-form KL(N(mu, diag sigma^2) || N(0, I)):
/// 0.5 * sum_j (mu_j^2 + exp(lv_j) - 1 - lv_j). Non-negative, zero iff
/// mu = 0 and log-variance = 0.
pub fn kl_divergence(mu: &[f64], log_var: &[f64]) -> f64 {
    mu.iter()
        .zip(log_var)
        .map(|(m, lv)| 0.5 * (m * m + lv.exp() - 1.0 - lv))
        .sum()
}

/// Reparameterized draw z = mu + exp(0.5 * log_var) ⊙ eps.
pub fn sample_latent(mu: &[f64], log_var: &[f64], eps: &[f64]) -> Result<Vec<f64>> {
    if mu.len() != log_var.len() || mu.len() != eps.len() {
        return Err(Error::DimensionMismatch {
            context: "sample_latent",
            expected: mu.len(),
            got: eps.len().max(log_var.len()),
        });
    }
    Ok(mu
        .iter()
        .zip(log_var)
        .zip(eps)
        .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
        .collect())
}

/// Loss and exact gradients of the VAE objective for a fixed noise draw
/// `eps` (one row per sample). Holding `eps` fixed makes this a smooth
/// function of the parameters, which finite differences can check.
pub fn grad_vae_loss(
    params: &VaeParams,
    x: ArrayView2<'_, f64>,
    eps: ArrayView2<'_, f64>,
    kl_weight: f64,
) -> Result<(f64, VaeGrads)> {
    let n = params.input_dim();
    let d = params.latent_dim();
    if x.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "vae loss input",
            expected: n,
            got: x.ncols(),
        });
    }
    if eps.nrows() != x.nrows() || eps.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "vae noise",
            expected: d,
            got: eps.ncols(),
        });
    }
    let batch = x.nrows() as f64;

    // Forward.
    let cache_trunk = mlp::forward_cached(&params.trunk, x);
    let h = cache_trunk.output().clone();
    let cache_mu = mlp::forward_cached(&params.mu_head, h.view());
    let cache_lv = mlp::forward_cached(&params.logvar_head, h.view());
    let mu = cache_mu.output();
    let logvar = cache_lv.output();
    let sigma = logvar.mapv(|lv| (0.5 * lv).exp());
    let z = mu + &(&sigma * &eps);
    let cache_dec = mlp::forward_cached(&params.decoder, z.view());
    let xhat = cache_dec.output();

    let recon = xhat
        .iter()
        .zip(x.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / batch;
    let kl = mu
        .iter()
        .zip(logvar.iter())
        .map(|(m, lv)| 0.5 * (m * m + lv.exp() - 1.0 - lv))
        .sum::<f64>()
        / batch;
    let loss = recon + kl_weight * kl;

    // Backward.
    let mut g_xhat = xhat - &x;
    g_xhat.mapv_inplace(|v| 2.0 * v / batch);
    let (dec_grads, dz) = mlp::backprop(&params.decoder, z.view(), &cache_dec, g_xhat);

    let mut g_mu = dz.clone();
    g_mu.zip_mut_with(mu, |g, m| *g += kl_weight * m / batch);

    let mut g_lv = &dz * &(&sigma * &eps);
    g_lv.mapv_inplace(|v| 0.5 * v);
    g_lv.zip_mut_with(logvar, |g, lv| {
        *g += kl_weight * 0.5 * (lv.exp() - 1.0) / batch
    });

    let (mu_grads, dh_mu) = mlp::backprop(&params.mu_head, h.view(), &cache_mu, g_mu);
    let (lv_grads, dh_lv) = mlp::backprop(&params.logvar_head, h.view(), &cache_lv, g_lv);
    let dh = dh_mu + dh_lv;
    let (trunk_grads, _) = mlp::backprop(&params.trunk, x, &cache_trunk, dh);

    Ok((
        loss,
        VaeGrads {
            trunk: trunk_grads,
            mu_head: mu_grads,
            logvar_head: lv_grads,
            decoder: dec_grads,
        },
    ))
}

/// Trained VAE.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeModel {
    pub params: VaeParams,
    /// Standardizer of the window this model was fitted on, when attached
    /// by the pipeline.
    pub standardizer: Option<Standardizer>,
    pub report: TrainReport,
}

impl VaeModel {
    pub fn latent_dim(&self) -> usize {
        self.params.latent_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.params.input_dim()
    }

    pub fn posterior(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array2<f64>)> {
        self.params.posterior(x)
    }

    pub fn decode(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.params.decode(z)
    }
}

/// Deterministic validation loss along the posterior mean path.
fn validation_loss(params: &VaeParams, x: ArrayView2<'_, f64>, kl_weight: f64) -> Result<f64> {
    let (mu, logvar) = params.posterior(x)?;
    let xhat = params.decode(mu.view())?;
    let batch = x.nrows() as f64;
    let recon = xhat
        .iter()
        .zip(x.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / batch;
    let kl = mu
        .iter()
        .zip(logvar.iter())
        .map(|(m, lv)| 0.5 * (m * m + lv.exp() - 1.0 - lv))
        .sum::<f64>()
        / batch;
    Ok(recon + kl_weight * kl)
}

/// Trains the VAE on a standardized w x N window with one noise draw per
/// sample per optimizer step. Deterministic given `cfg.seed`; early
/// stopping watches the total validation loss and the best-epoch
/// parameters are returned.
pub fn train_vae(
    data: ArrayView2<'_, f64>,
    d: usize,
    cfg: &TrainConfig,
    kl_weight: f64,
) -> Result<VaeModel> {
    let (rows, n) = (data.nrows(), data.ncols());
    let (n_train, _) = cfg.split(rows)?;
    if d == 0 || d >= n {
        return Err(Error::InvalidParameter(format!(
            "latent dimension d={d} out of range 1..{n}"
        )));
    }
    if kl_weight.is_nan() || kl_weight < 0.0 || kl_weight.is_infinite() {
        return Err(Error::InvalidParameter("kl_weight must be >= 0".into()));
    }

    let train = data.slice(ndarray::s![..n_train, ..]);
    let val = data.slice(ndarray::s![n_train.., ..]);

    let mut params = VaeParams::init(n, d, cfg.seed);
    let layer_refs: Vec<&_> = params
        .trunk
        .layers
        .iter()
        .chain(&params.mu_head.layers)
        .chain(&params.logvar_head.layers)
        .chain(&params.decoder.layers)
        .collect();
    let mut adam = Adam::new(
        &layer_refs,
        cfg.learning_rate,
        cfg.beta1,
        cfg.beta2,
        cfg.epsilon,
    );

    let mut shuffle_rng = stream_rng(cfg.seed, STREAM_SHUFFLE);
    let mut noise_rng = stream_rng(cfg.seed, STREAM_NOISE);
    let mut best_val = f64::INFINITY;
    let mut best_state = params.clone();
    let mut epochs_since_best = 0;
    let mut stopped_early = false;
    let mut final_train_loss = f64::NAN;
    let mut val_history = Vec::new();
    let mut epochs_run = 0;

    for epoch in 0..cfg.max_epochs {
        epochs_run = epoch + 1;
        let mut order: Vec<usize> = (0..n_train).collect();
        order.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = gather_rows(train, chunk);
            let mut draws = Vec::with_capacity(chunk.len() * d);
            for _ in 0..chunk.len() * d {
                let e: f64 = StandardNormal.sample(&mut noise_rng);
                draws.push(e);
            }
            let eps = Array2::from_shape_vec((chunk.len(), d), draws)
                .expect("noise buffer matches batch shape");

            let (loss, grads) = grad_vae_loss(&params, batch.view(), eps.view(), kl_weight)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            epoch_loss += loss * chunk.len() as f64;
            adam.begin_step();
            adam.update_mlp(&mut params.trunk.layers, &grads.trunk, 0);
            adam.update_mlp(&mut params.mu_head.layers, &grads.mu_head, 1);
            adam.update_mlp(&mut params.logvar_head.layers, &grads.logvar_head, 2);
            adam.update_mlp(&mut params.decoder.layers, &grads.decoder, 3);
        }
        final_train_loss = epoch_loss / n_train as f64;

        let val_loss = validation_loss(&params, val, kl_weight)?;
        if !val_loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        val_history.push(val_loss);

        if val_loss < best_val {
            best_val = val_loss;
            best_state = params.clone();
            epochs_since_best = 0;
        } else {
            epochs_since_best += 1;
            if epochs_since_best >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }

    Ok(VaeModel {
        params: best_state,
        standardizer: None,
        report: TrainReport {
            epochs_run,
            best_val_loss: best_val,
            final_train_loss,
            stopped_early,
            val_history,
        },
    })
}
