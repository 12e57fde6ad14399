//! Adam optimizer with bias-corrected moment estimates.

use ndarray::{Array1, Array2};

use super::mlp::{DenseLayer, MlpGrads};

pub struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: usize,
    m_weights: Vec<Array2<f64>>,
    v_weights: Vec<Array2<f64>>,
    m_biases: Vec<Array1<f64>>,
    v_biases: Vec<Array1<f64>>,
}

impl Adam {
    /// Moment buffers are allocated to match `layers`; the same layer order
    /// must be used on every update.
    pub fn new(
        layers: &[&DenseLayer],
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    ) -> Self {
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step: 0,
            m_weights: layers
                .iter()
                .map(|l| Array2::zeros(l.weights.raw_dim()))
                .collect(),
            v_weights: layers
                .iter()
                .map(|l| Array2::zeros(l.weights.raw_dim()))
                .collect(),
            m_biases: layers.iter().map(|l| Array1::zeros(l.bias.len())).collect(),
            v_biases: layers.iter().map(|l| Array1::zeros(l.bias.len())).collect(),
        }
    }

    /// Advances the shared step counter; call once per minibatch before
    /// applying the per-layer updates.
    pub fn begin_step(&mut self) {
        self.step += 1;
    }

    /// Applies one Adam update to layer `idx` in place.
    pub fn update(
        &mut self,
        idx: usize,
        layer: &mut DenseLayer,
        gw: &Array2<f64>,
        gb: &Array1<f64>,
    ) {
        let (lr, b1, b2, eps) = (self.learning_rate, self.beta1, self.beta2, self.epsilon);
        let t = self.step as i32;
        let bc1 = 1.0 - b1.powi(t);
        let bc2 = 1.0 - b2.powi(t);

        let m = &mut self.m_weights[idx];
        let v = &mut self.v_weights[idx];
        m.zip_mut_with(gw, |m, g| *m = b1 * *m + (1.0 - b1) * g);
        v.zip_mut_with(gw, |v, g| *v = b2 * *v + (1.0 - b2) * g * g);
        layer.weights.indexed_iter_mut().for_each(|(i, w)| {
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            *w -= lr * m_hat / (v_hat.sqrt() + eps);
        });

        let m = &mut self.m_biases[idx];
        let v = &mut self.v_biases[idx];
        m.zip_mut_with(gb, |m, g| *m = b1 * *m + (1.0 - b1) * g);
        v.zip_mut_with(gb, |v, g| *v = b2 * *v + (1.0 - b2) * g * g);
        layer.bias.indexed_iter_mut().for_each(|(i, b)| {
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            *b -= lr * m_hat / (v_hat.sqrt() + eps);
        });
    }

    /// Updates every layer of one network against its gradients.
    pub fn update_mlp(&mut self, layers: &mut [DenseLayer], grads: &MlpGrads, offset: usize) {
        for (i, layer) in layers.iter_mut().enumerate() {
            self.update(offset + i, layer, &grads.weights[i], &grads.biases[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_step_moves_against_gradient() {
        let mut layer = DenseLayer {
            weights: array![[1.0]],
            bias: array![0.5],
        };
        let mut adam = Adam::new(&[&layer], 0.1, 0.9, 0.999, 1e-8);
        adam.begin_step();
        let gw = array![[2.0]];
        let gb = array![-1.0];
        adam.update(0, &mut layer, &gw, &gb);
        // First step moves by ~lr in the gradient's sign direction.
        assert!((layer.weights[[0, 0]] - (1.0 - 0.1)).abs() < 1e-6);
        assert!((layer.bias[0] - (0.5 + 0.1)).abs() < 1e-6);
    }
}
