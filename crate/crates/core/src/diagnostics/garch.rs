//! GARCH(1,1) maximum-likelihood fitting and simulation.
//!
//! Variance recursion: var_t = omega + alpha * eps_{t-1}^2 + beta * var_{t-1}
//! with eps_t the demeaned return and var_0 the sample variance. The
//! Gaussian likelihood is maximized by Nelder-Mead simplex descent over an
//! unconstrained reparameterization: log omega, and logistic transforms
//! that keep alpha, beta >= 0 with alpha + beta < 1.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::stats;

const LN_2PI: f64 = 1.8378770664093453;

fn pos_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// GARCH(1,1) coefficients (omega in variance units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GarchParams {
    /// Strict validity: omega > 0, alpha >= 0, beta >= 0, alpha + beta < 1.
    pub fn validate(&self) -> Result<()> {
        let ok = self.omega > 0.0
            && self.omega.is_finite()
            && self.alpha >= 0.0
            && self.beta >= 0.0
            && self.alpha + self.beta < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid GARCH parameters (omega={}, alpha={}, beta={})",
                self.omega, self.alpha, self.beta
            )))
        }
    }

    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }
}

/// Result of a GARCH(1,1) fit.
#[derive(Debug, Clone, PartialEq)]
pub struct GarchFit {
    pub params: GarchParams,
    pub persistence: f64,
    pub log_likelihood: f64,
    pub converged: bool,
}

/// Gaussian log-likelihood of a series under fixed parameters, demeaning
/// first and starting the recursion at the sample variance.
pub fn garch_log_likelihood(x: &[f64], params: &GarchParams) -> Result<f64> {
    let (eps, var0) = demean(x)?;
    let nll = negative_log_likelihood(&eps, var0, params.omega, params.alpha, params.beta);
    Ok(-nll)
}

fn demean(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = stats::mean(x);
    let eps: Vec<f64> = x.iter().map(|v| v - m).collect();
    let var0 = stats::sample_variance(&eps);
    if !pos_finite(var0) {
        return Err(Error::DegenerateSeries {
            name: "garch input".into(),
        });
    }
    Ok((eps, var0))
}

fn negative_log_likelihood(eps: &[f64], var0: f64, omega: f64, alpha: f64, beta: f64) -> f64 {
    let mut var = var0;
    let mut nll = 0.0;
    for (t, e) in eps.iter().enumerate() {
        if t > 0 {
            var = omega + alpha * eps[t - 1] * eps[t - 1] + beta * var;
        }
        if !pos_finite(var) {
            return f64::INFINITY;
        }
        nll += 0.5 * (LN_2PI + var.ln() + e * e / var);
    }
    nll
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// theta = (log omega, logit persistence, logit alpha-share).
fn from_unconstrained(theta: &[f64]) -> GarchParams {
    let omega = theta[0].exp();
    let persistence = sigmoid(theta[1]);
    let share = sigmoid(theta[2]);
    GarchParams {
        omega,
        alpha: persistence * share,
        beta: persistence * (1.0 - share),
    }
}

/// Fits GARCH(1,1) by maximum likelihood. Needs at least 250 observations.
/// A non-converged optimization still returns the best point found, with
/// `converged = false`.
pub fn garch_fit(x: &[f64]) -> Result<GarchFit> {
    if x.len() < 250 {
        return Err(Error::SeriesTooShort {
            needed: 250,
            got: x.len(),
        });
    }
    let (eps, var0) = demean(x)?;

    // Start at alpha = 0.05, beta = 0.85, omega matching the sample variance.
    let p0: f64 = 0.90;
    let share0: f64 = 0.05 / p0;
    let theta0 = [(var0 * (1.0 - p0)).ln(), logit(p0), logit(share0)];

    let objective = |theta: &[f64]| {
        let p = from_unconstrained(theta);
        negative_log_likelihood(&eps, var0, p.omega, p.alpha, p.beta)
    };
    let outcome = nelder_mead(objective, &theta0, 0.5, 600);

    let params = from_unconstrained(&outcome.x);
    Ok(GarchFit {
        params,
        persistence: params.persistence(),
        log_likelihood: -outcome.f,
        converged: outcome.converged,
    })
}

/// Simulates a zero-mean GARCH(1,1) return series, starting the variance
/// recursion at the unconditional variance. Deterministic given the seed.
pub fn garch_simulate(params: &GarchParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut var = params.unconditional_variance();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let eps = var.sqrt() * z;
        out.push(eps);
        var = params.omega + params.alpha * eps * eps + params.beta * var;
    }
    Ok(out)
}

struct SimplexOutcome {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

/// Nelder-Mead simplex descent with standard coefficients
/// (reflect 1, expand 2, contract 0.5, shrink 0.5).
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
) -> SimplexOutcome {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if (worst - best).abs() <= 1e-10 * (1.0 + best.abs()) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let worst_x = simplex[dim].0.clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst_x)
            .map(|(c, w)| c + (c - w))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < simplex[0].1 {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst_x)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let f_expand = f(&expand);
            simplex[dim] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
        } else if f_reflect < simplex[dim - 1].1 {
            simplex[dim] = (reflect, f_reflect);
        } else {
            let (contract, f_contract) = if f_reflect < simplex[dim].1 {
                let x: Vec<f64> = centroid
                    .iter()
                    .zip(&reflect)
                    .map(|(c, r)| c + 0.5 * (r - c))
                    .collect();
                let fx = f(&x);
                (x, fx)
            } else {
                let x: Vec<f64> = centroid
                    .iter()
                    .zip(&worst_x)
                    .map(|(c, w)| c + 0.5 * (w - c))
                    .collect();
                let fx = f(&x);
                (x, fx)
            };
            if f_contract < simplex[dim].1.min(f_reflect) {
                simplex[dim] = (contract, f_contract);
            } else {
                let best_x = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let shrunk: Vec<f64> = best_x
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    entry.1 = f(&shrunk);
                    entry.0 = shrunk;
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    SimplexOutcome {
        x: simplex[0].0.clone(),
        f: simplex[0].1,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncorrelated_case_is_iid_with_variance_omega() {
        let params = GarchParams {
            omega: 0.5,
            alpha: 0.0,
            beta: 0.0,
        };
        let x = garch_simulate(&params, 50_000, 5).unwrap();
        let var = stats::sample_variance(&x);
        assert!((var - 0.5).abs() / 0.5 < 0.05, "var = {var}");
    }

    #[test]
    fn simulation_is_deterministic() {
        let params = GarchParams {
            omega: 0.2,
            alpha: 0.1,
            beta: 0.8,
        };
        assert_eq!(
            garch_simulate(&params, 100, 9).unwrap(),
            garch_simulate(&params, 100, 9).unwrap()
        );
    }

    #[test]
    fn long_simulation_matches_unconditional_variance() {
        let params = GarchParams {
            omega: 0.2,
            alpha: 0.1,
            beta: 0.8,
        };
        let x = garch_simulate(&params, 100_000, 13).unwrap();
        let var = stats::sample_variance(&x);
        assert!((var - 2.0).abs() / 2.0 < 0.10, "var = {var}");
    }

    #[test]
    fn invalid_parameters_rejected() {
        for params in [
            GarchParams {
                omega: 0.0,
                alpha: 0.1,
                beta: 0.1,
            },
            GarchParams {
                omega: 0.1,
                alpha: -0.1,
                beta: 0.1,
            },
            GarchParams {
                omega: 0.1,
                alpha: 0.5,
                beta: 0.5,
            },
        ] {
            assert!(garch_simulate(&params, 10, 0).is_err());
        }
    }

    #[test]
    fn fit_requires_250_observations() {
        let x = vec![0.0; 100];
        assert!(matches!(
            garch_fit(&x).unwrap_err(),
            Error::SeriesTooShort { .. }
        ));
    }

    #[test]
    fn fit_recovers_simulated_parameters() {
        let truth = GarchParams {
            omega: 0.2291,
            alpha: 0.0824,
            beta: 0.8340,
        };
        let x = garch_simulate(&truth, 5000, 17).unwrap();
        let fit = garch_fit(&x).unwrap();
        assert!(
            (fit.params.beta - truth.beta).abs() < 0.05,
            "{:?}",
            fit.params
        );
        assert!(
            (fit.params.alpha - truth.alpha).abs() / truth.alpha < 0.35,
            "{:?}",
            fit.params
        );
        assert!(fit.persistence < 1.0);

        // Conditional variances under the fitted parameters stay positive
        // along the whole series.
        let m = stats::mean(&x);
        let eps: Vec<f64> = x.iter().map(|v| v - m).collect();
        let mut var = stats::sample_variance(&eps);
        for t in 0..eps.len() {
            if t > 0 {
                var = fit.params.omega
                    + fit.params.alpha * eps[t - 1] * eps[t - 1]
                    + fit.params.beta * var;
            }
            assert!(var > 0.0, "variance at t={t}");
        }
    }

    #[test]
    fn iid_gaussian_fit_has_small_alpha_and_matching_variance() {
        let params = GarchParams {
            omega: 1.7,
            alpha: 0.0,
            beta: 0.0,
        };
        let x = garch_simulate(&params, 8000, 23).unwrap();
        let fit = garch_fit(&x).unwrap();
        assert!(fit.params.alpha < 0.05, "{:?}", fit.params);
        let implied = fit.params.unconditional_variance();
        assert!(
            (implied - 1.7).abs() / 1.7 < 0.15,
            "implied var = {implied}"
        );
    }

    #[test]
    fn optimum_beats_initialization() {
        let truth = GarchParams {
            omega: 0.1,
            alpha: 0.1,
            beta: 0.8,
        };
        let x = garch_simulate(&truth, 2000, 31).unwrap();
        let fit = garch_fit(&x).unwrap();
        let var0 = stats::sample_variance(&x);
        let init = GarchParams {
            omega: 0.1 * var0,
            alpha: 0.05,
            beta: 0.85,
        };
        let ll_init = garch_log_likelihood(&x, &init).unwrap();
        assert!(fit.log_likelihood >= ll_init);
    }

    #[test]
    fn recovery_over_parameter_grid() {
        // Includes a beta = 0 triple: the closed-at-zero boundary must be
        // representable by the logistic transform.
        let grid = [
            (
                GarchParams {
                    omega: 0.2291,
                    alpha: 0.0824,
                    beta: 0.8340,
                },
                101,
            ),
            (
                GarchParams {
                    omega: 0.10,
                    alpha: 0.05,
                    beta: 0.90,
                },
                102,
            ),
            (
                GarchParams {
                    omega: 0.50,
                    alpha: 0.20,
                    beta: 0.60,
                },
                103,
            ),
            (
                GarchParams {
                    omega: 1.00,
                    alpha: 0.10,
                    beta: 0.00,
                },
                104,
            ),
            (
                GarchParams {
                    omega: 0.05,
                    alpha: 0.00,
                    beta: 0.50,
                },
                105,
            ),
        ];
        for (truth, seed) in grid {
            let x = garch_simulate(&truth, 5000, seed).unwrap();
            let fit = garch_fit(&x).unwrap();
            assert!(
                (fit.params.beta - truth.beta).abs() < 0.10,
                "beta {:?} -> {:?}",
                truth,
                fit.params
            );
            assert!(
                (fit.params.alpha - truth.alpha).abs() < 0.05
                    || (fit.params.alpha - truth.alpha).abs() / truth.alpha < 0.35,
                "alpha {:?} -> {:?}",
                truth,
                fit.params
            );
            assert!(fit.persistence < 1.0);
            let ll_sim_truth = garch_log_likelihood(&x, &truth).unwrap();
            assert!(fit.log_likelihood >= ll_sim_truth - 1e-6);
        }
    }
}
