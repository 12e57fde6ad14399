//! Autoencoder: a symmetric N -> 16 -> d -> 16 -> N network trained on
//! standardized window returns with MSE loss, Adam, and early stopping on
//! the chronological-tail validation split.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::market_data::Standardizer;

use super::adam::Adam;
use super::mlp::{self, Activation, MlpParams};
use super::{
    gather_rows, stream_rng, TrainConfig, TrainReport, HIDDEN_DIM, STREAM_INIT, STREAM_SHUFFLE,
};

/// Trained autoencoder split into its encoder and decoder halves.
///
/// `decode(encode(x))` is exactly the full network's forward pass: the
/// encoder ends in the latent tanh layer, the decoder in the linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct AeModel {
    pub encoder: MlpParams,
    pub decoder: MlpParams,
    /// Standardizer of the window this model was fitted on, when attached
    /// by the pipeline.
    pub standardizer: Option<Standardizer>,
    pub report: TrainReport,
}

impl AeModel {
    pub fn latent_dim(&self) -> usize {
        self.encoder.output_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    /// w x d latents for a standardized batch.
    pub fn encode(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        mlp::forward(&self.encoder, x)
    }

    /// Standardized reconstructions from latents.
    pub fn decode(&self, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        mlp::forward(&self.decoder, z)
    }

    pub fn reconstruct(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let z = self.encode(x)?;
        self.decode(z.view())
    }
}

fn mse(a: &Array2<f64>, b: ArrayView2<'_, f64>) -> f64 {
    let count = (a.nrows() * a.ncols()) as f64;
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / count
}

/// Trains the autoencoder on a standardized w x N window. Deterministic
/// given `cfg.seed`; returns the parameters from the best validation epoch.
pub fn train_ae(data: ArrayView2<'_, f64>, d: usize, cfg: &TrainConfig) -> Result<AeModel> {
    let (rows, n) = (data.nrows(), data.ncols());
    let (n_train, _) = cfg.split(rows)?;
    if d == 0 || d >= n {
        return Err(Error::InvalidParameter(format!(
            "latent dimension d={d} out of range 1..{n}"
        )));
    }

    let train = data.slice(ndarray::s![..n_train, ..]);
    let val = data.slice(ndarray::s![n_train.., ..]);

    let shape = [n, HIDDEN_DIM, d, HIDDEN_DIM, n];
    let mut rng_init = stream_rng(cfg.seed, STREAM_INIT);
    let mut net = mlp::init_with_rng(&shape, Activation::Linear, &mut rng_init);
    let layer_refs: Vec<&_> = net.layers.iter().collect();
    let mut adam = Adam::new(
        &layer_refs,
        cfg.learning_rate,
        cfg.beta1,
        cfg.beta2,
        cfg.epsilon,
    );

    let mut shuffle_rng = stream_rng(cfg.seed, STREAM_SHUFFLE);
    let mut best_val = f64::INFINITY;
    let mut best_state = net.clone();
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
            let (loss, grads) = mlp::grad_mse(&net, batch.view())?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            epoch_loss += loss * chunk.len() as f64;
            adam.begin_step();
            adam.update_mlp(&mut net.layers, &grads, 0);
        }
        final_train_loss = epoch_loss / n_train as f64;

        let recon = mlp::forward(&net, val)?;
        let val_loss = mse(&recon, val);
        if !val_loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        val_history.push(val_loss);

        if val_loss < best_val {
            best_val = val_loss;
            best_state = net.clone();
            epochs_since_best = 0;
        } else {
            epochs_since_best += 1;
            if epochs_since_best >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let encoder = MlpParams {
        layers: best_state.layers[..2].to_vec(),
        output_activation: Activation::Tanh,
    };
    let decoder = MlpParams {
        layers: best_state.layers[2..].to_vec(),
        output_activation: Activation::Linear,
    };
    Ok(AeModel {
        encoder,
        decoder,
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
