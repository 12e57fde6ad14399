//! Dense feedforward networks with tanh hidden layers and analytic
//! backpropagation. No framework: parameters are plain arrays.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Activation applied at a network's final layer. Hidden layers are
/// always tanh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Linear,
}

/// One dense layer: `in x out` weights plus an `out` bias.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }

    fn affine(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = x.dot(&self.weights);
        for mut row in out.rows_mut() {
            row += &self.bias;
        }
        out
    }
}

/// An MLP: tanh on every hidden layer and `output_activation` at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<DenseLayer>,
    pub output_activation: Activation,
}

impl MlpParams {
    pub fn input_dim(&self) -> usize {
        self.layers.first().expect("non-empty network").input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty network").output_dim()
    }

    fn activation_at(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output_activation
        } else {
            Activation::Tanh
        }
    }
}

/// Gradients with the same shapes as the network's layers.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

pub(crate) fn glorot_layer(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> DenseLayer {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    // Row-major draw order, pinned explicitly for reproducibility.
    let mut draws = Vec::with_capacity(fan_in * fan_out);
    for _ in 0..fan_in * fan_out {
        draws.push(rng.random_range(-limit..limit));
    }
    let weights =
        Array2::from_shape_vec((fan_in, fan_out), draws).expect("draw buffer matches shape");
    DenseLayer {
        weights,
        bias: Array1::zeros(fan_out),
    }
}

pub(crate) fn init_with_rng(
    shape: &[usize],
    output_activation: Activation,
    rng: &mut ChaCha8Rng,
) -> MlpParams {
    assert!(shape.len() >= 2, "network needs at least one layer");
    let layers = shape
        .windows(2)
        .map(|pair| glorot_layer(pair[0], pair[1], rng))
        .collect();
    MlpParams {
        layers,
        output_activation,
    }
}

/// Glorot-uniform weights and zero biases, deterministic given the seed.
/// The output activation is linear.
pub fn init_params(shape: &[usize], seed: u64) -> MlpParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    init_with_rng(shape, Activation::Linear, &mut rng)
}

/// Layer outputs (post-activation) for every layer, used by backprop.
pub(crate) struct ForwardCache {
    pub activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("non-empty network")
    }
}

pub(crate) fn forward_cached(params: &MlpParams, x: ArrayView2<'_, f64>) -> ForwardCache {
    let mut activations = Vec::with_capacity(params.layers.len());
    let mut current = x.to_owned();
    for (l, layer) in params.layers.iter().enumerate() {
        let mut out = layer.affine(&current);
        if params.activation_at(l) == Activation::Tanh {
            out.mapv_inplace(f64::tanh);
        }
        current = out.clone();
        activations.push(out);
    }
    ForwardCache { activations }
}

/// Forward pass of a batch (rows are samples).
pub fn forward(params: &MlpParams, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.ncols() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "mlp forward",
            expected: params.input_dim(),
            got: x.ncols(),
        });
    }
    let mut cache = forward_cached(params, x);
    Ok(cache.activations.pop().expect("non-empty network"))
}

/// Backpropagates `grad_output` (the loss gradient with respect to the
/// network's post-activation output) through the cached forward pass,
/// returning per-layer gradients and the gradient with respect to the input.
pub(crate) fn backprop(
    params: &MlpParams,
    x: ArrayView2<'_, f64>,
    cache: &ForwardCache,
    grad_output: Array2<f64>,
) -> (MlpGrads, Array2<f64>) {
    let n_layers = params.layers.len();
    let mut weights = vec![Array2::zeros((0, 0)); n_layers];
    let mut biases = vec![Array1::zeros(0); n_layers];

    let mut delta = grad_output;
    for l in (0..n_layers).rev() {
        if params.activation_at(l) == Activation::Tanh {
            let a = &cache.activations[l];
            delta.zip_mut_with(a, |d, a| *d *= 1.0 - a * a);
        }
        let input = if l == 0 {
            x.to_owned()
        } else {
            cache.activations[l - 1].clone()
        };
        weights[l] = input.t().dot(&delta);
        biases[l] = delta.sum_axis(Axis(0));
        delta = delta.dot(&params.layers[l].weights.t());
    }
    (MlpGrads { weights, biases }, delta)
}

/// Loss and exact gradient of the mean-squared reconstruction error
/// (mean over batch rows and output columns) of the network against its
/// own input.
pub fn grad_mse(params: &MlpParams, x: ArrayView2<'_, f64>) -> Result<(f64, MlpGrads)> {
    if x.ncols() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "grad_mse",
            expected: params.input_dim(),
            got: x.ncols(),
        });
    }
    let cache = forward_cached(params, x);
    let out = cache.output();
    let mut diff = out - &x;
    let count = (x.nrows() * x.ncols()) as f64;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / count;
    diff.mapv_inplace(|d| 2.0 * d / count);
    let (grads, _) = backprop(params, x, &cache, diff);
    Ok((loss, grads))
}
