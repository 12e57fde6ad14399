//! From-scratch feedforward networks with analytic backpropagation and
//! Adam, specialized into the autoencoder and variational autoencoder used
//! by the stress pipelines.
//!
//! Training is deterministic: initialization, epoch shuffling, and noise
//! draws each consume a distinct stream of one seeded generator, so the
//! same seed and window reproduce a model bit for bit.

mod adam;
mod ae;
mod io;
mod mlp;
mod vae;

pub use adam::Adam;
pub use ae::{train_ae, AeModel};
pub use io::{read_networks, write_networks};
pub use mlp::{forward, grad_mse, init_params, Activation, DenseLayer, MlpGrads, MlpParams};
pub use vae::{
    grad_vae_loss, kl_divergence, sample_latent, train_vae, VaeGrads, VaeModel, VaeParams,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hidden width of the symmetric encoder/decoder networks.
pub const HIDDEN_DIM: usize = 16;

/// Training hyperparameters shared by the AE and VAE.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Chronological tail fraction held out for validation.
    pub validation_fraction: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_epochs: 200,
            validation_fraction: 0.2,
            patience: 10,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Splits `rows` into (train, validation) sizes; the validation block
    /// is the chronological tail.
    pub(crate) fn split(&self, rows: usize) -> Result<(usize, usize)> {
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidParameter(
                "validation fraction must be in (0, 1)".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        let n_val = ((rows as f64 * self.validation_fraction) as usize).max(1);
        if n_val >= rows {
            return Err(Error::SeriesTooShort {
                needed: (1.0 / self.validation_fraction).ceil() as usize + 1,
                got: rows,
            });
        }
        Ok((rows - n_val, n_val))
    }
}

/// Per-window training summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub best_val_loss: f64,
    pub final_train_loss: f64,
    pub stopped_early: bool,
    /// Validation loss at each epoch, in order.
    pub val_history: Vec<f64>,
}

/// One generator per purpose, all derived from the same seed:
/// stream 0 = initialization, 1 = epoch shuffling, 2 = noise draws.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) const STREAM_INIT: u64 = 0;
pub(crate) const STREAM_SHUFFLE: u64 = 1;
pub(crate) const STREAM_NOISE: u64 = 2;

pub(crate) fn gather_rows(x: ndarray::ArrayView2<'_, f64>, idx: &[usize]) -> ndarray::Array2<f64> {
    let mut out = ndarray::Array2::zeros((idx.len(), x.ncols()));
    for (row, i) in idx.iter().enumerate() {
        out.row_mut(row).assign(&x.row(*i));
    }
    out
}
