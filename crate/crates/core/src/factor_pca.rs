//! Windowed principal component analysis on raw (non-standardized) returns,
//! via eigendecomposition of the N x N sample covariance.
//!
//! Determinism conventions: components are ordered by descending explained
//! variance, the maximum-absolute entry of every loading column is made
//! positive (first such index on ties), and exactly tied eigenvalues are
//! ordered by that index. Identical windows produce bit-identical models.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::market_data::WindowView;

/// Fitted PCA model: column means, orthonormal N x d loading matrix, and
/// per-component explained variances.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    means: Vec<f64>,
    loadings: Array2<f64>,
    explained: Vec<f64>,
    total_variance: f64,
}

impl PcaModel {
    /// Fits the top-d principal directions of the mean-centered window.
    /// Requires 1 <= d <= min(w-1, N). A rank-deficient window is allowed:
    /// trailing explained variances are zero and the loading columns stay
    /// orthonormal.
    pub fn fit(window: &WindowView<'_>, d: usize) -> Result<Self> {
        let x = window.slice();
        let (w, n) = (x.nrows(), x.ncols());
        let max_d = (w - 1).min(n);
        if d == 0 || d > max_d {
            return Err(Error::InvalidParameter(format!(
                "component count d={d} out of range 1..={max_d}"
            )));
        }

        let means: Vec<f64> = x
            .axis_iter(Axis(1))
            .map(|col| col.sum() / w as f64)
            .collect();
        let mut centered = x.to_owned();
        for mut row in centered.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v -= means[j];
            }
        }
        let cov = centered.t().dot(&centered) / (w as f64 - 1.0);

        let sym = DMatrix::from_fn(n, n, |i, j| cov[[i, j]]);
        let eig = SymmetricEigen::new(sym);

        struct Component {
            lambda: f64,
            vector: Vec<f64>,
            anchor: usize,
        }
        let mut components: Vec<Component> = (0..n)
            .map(|k| {
                let lambda = eig.eigenvalues[k].max(0.0);
                let mut vector: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, k)]).collect();
                let anchor = vector
                    .iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| {
                        a.abs()
                            .partial_cmp(&b.abs())
                            .expect("finite eigenvector entries")
                    })
                    .map(|(i, _)| i)
                    .expect("non-empty eigenvector");
                if vector[anchor] < 0.0 {
                    for v in &mut vector {
                        *v = -*v;
                    }
                }
                Component {
                    lambda,
                    vector,
                    anchor,
                }
            })
            .collect();
        components.sort_by(|a, b| {
            b.lambda
                .partial_cmp(&a.lambda)
                .expect("finite eigenvalues")
                .then(a.anchor.cmp(&b.anchor))
        });

        let total_variance: f64 = components.iter().map(|c| c.lambda).sum();
        let mut loadings = Array2::zeros((n, d));
        for (j, c) in components.iter().take(d).enumerate() {
            for i in 0..n {
                loadings[[i, j]] = c.vector[i];
            }
        }
        let explained: Vec<f64> = components.iter().take(d).map(|c| c.lambda).collect();

        Ok(Self {
            means,
            loadings,
            explained,
            total_variance,
        })
    }

    /// Projects rows into component space: scores = (X - means) . L.
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.num_assets() {
            return Err(Error::DimensionMismatch {
                context: "pca transform",
                expected: self.num_assets(),
                got: x.ncols(),
            });
        }
        let mut centered = x.to_owned();
        for mut row in centered.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v -= self.means[j];
            }
        }
        Ok(centered.dot(&self.loadings))
    }

    /// Reconstructs returns from scores: X-hat = scores . L^T + means.
    pub fn inverse_transform(&self, scores: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if scores.ncols() != self.num_components() {
            return Err(Error::DimensionMismatch {
                context: "pca inverse transform",
                expected: self.num_components(),
                got: scores.ncols(),
            });
        }
        let mut out = scores.dot(&self.loadings.t());
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += self.means[j];
            }
        }
        Ok(out)
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// N x d loading matrix with orthonormal columns.
    pub fn loadings(&self) -> ArrayView2<'_, f64> {
        self.loadings.view()
    }

    /// Explained variances, descending.
    pub fn explained_variances(&self) -> &[f64] {
        &self.explained
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        self.explained
            .iter()
            .map(|l| l / self.total_variance)
            .collect()
    }

    pub fn num_assets(&self) -> usize {
        self.loadings.nrows()
    }

    pub fn num_components(&self) -> usize {
        self.loadings.ncols()
    }
}
