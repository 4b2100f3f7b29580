//! L2-regularized logistic regression fitted by damped Newton steps.
//!
//! Parameters are packed as `theta = [w_1, ..., w_d, b]`; the intercept is
//! not penalized. Objective: `0.5 |w|^2 + C sum_i log(1 + exp(-y_i (w.x_i + b)))`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sign_of;
use crate::groundtruth::SunShade;
use crate::matrix::{dot, Matrix};

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn margin(theta: &[f64], row: &[f64]) -> f64 {
    let d = row.len();
    dot(&theta[..d], row) + theta[d]
}

pub fn objective(theta: &[f64], x: &Matrix, y: &[f64], c: f64) -> f64 {
    let d = x.ncols();
    let penalty = 0.5 * dot(&theta[..d], &theta[..d]);
    let loss: f64 = x.rows_iter().zip(y).map(|(r, yi)| softplus(-yi * margin(theta, r))).sum();
    penalty + c * loss
}

pub fn gradient(theta: &[f64], x: &Matrix, y: &[f64], c: f64) -> Vec<f64> {
    let d = x.ncols();
    let mut g: Vec<f64> = theta[..d].to_vec();
    g.push(0.0);
    for (r, yi) in x.rows_iter().zip(y) {
        // d/dz softplus(-y z) = -y sigmoid(-y z)
        let s = -yi * sigmoid(-yi * margin(theta, r)) * c;
        for j in 0..d {
            g[j] += s * r[j];
        }
        g[d] += s;
    }
    g
}

fn hessian(theta: &[f64], x: &Matrix, c: f64) -> DMatrix<f64> {
    let d = x.ncols();
    let mut h = DMatrix::<f64>::zeros(d + 1, d + 1);
    for j in 0..d {
        h[(j, j)] = 1.0;
    }
    let mut aug = vec![1.0; d + 1];
    for r in x.rows_iter() {
        let p = sigmoid(margin(theta, r));
        let s = c * p * (1.0 - p);
        if s == 0.0 {
            continue;
        }
        aug[..d].copy_from_slice(r);
        for a in 0..=d {
            let sa = s * aug[a];
            for b in a..=d {
                h[(a, b)] += sa * aug[b];
            }
        }
    }
    for a in 0..=d {
        for b in 0..a {
            h[(a, b)] = h[(b, a)];
        }
    }
    h
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

impl LogisticModel {
    pub fn fit(x: &Matrix, labels: &[SunShade], c: f64, grad_tol: f64, max_iter: usize) -> LogisticModel {
        let y: Vec<f64> = labels.iter().map(|l| sign_of(*l)).collect();
        let d = x.ncols();
        let mut theta = vec![0.0; d + 1];
        let mut f = objective(&theta, x, &y, c);
        let mut g = gradient(&theta, x, &y, c);
        let mut iterations = 0;
        while norm(&g) > grad_tol && iterations < max_iter {
            iterations += 1;
            let mut h = hessian(&theta, x, c);
            let rhs = DVector::from_column_slice(&g);
            let step = loop {
                if let Some(ch) = h.clone().cholesky() {
                    break ch.solve(&rhs);
                }
                // the intercept row can be singular when all curvature vanishes
                for a in 0..=d {
                    h[(a, a)] += 1e-10 + h[(a, a)].abs() * 1e-12;
                }
            };
            let slope = -dot(step.as_slice(), &g);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
                let fc = objective(&cand, x, &y, c);
                if fc <= f + 1e-4 * t * slope {
                    theta = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            g = gradient(&theta, x, &y, c);
            if !accepted {
                break;
            }
        }
        let gradient_norm = norm(&g);
        LogisticModel {
            weights: theta[..d].to_vec(),
            intercept: theta[d],
            iterations,
            gradient_norm,
            converged: gradient_norm <= grad_tol,
        }
    }

    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        x.rows_iter().map(|r| dot(&self.weights, r) + self.intercept).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::testdata::blobs;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_matches_central_differences() {
        let (x, labels) = blobs(30, 12);
        let y: Vec<f64> = labels.iter().map(|l| sign_of(*l)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let theta: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = gradient(&theta, &x, &y, 1.0);
            for k in 0..3 {
                let h = 1e-5;
                let mut p = theta.clone();
                let mut m = theta.clone();
                p[k] += h;
                m[k] -= h;
                let fd = (objective(&p, &x, &y, 1.0) - objective(&m, &x, &y, 1.0)) / (2.0 * h);
                let rel = (fd - g[k]).abs() / g[k].abs().max(fd.abs()).max(1e-8);
                assert!(rel <= 1e-5, "component {k}: analytic {} numeric {fd}", g[k]);
            }
        }
    }

    #[test]
    fn converges_to_small_gradient() {
        let (x, y) = blobs(50, 3);
        let m = LogisticModel::fit(&x, &y, 1.0, 1e-6, 100);
        assert!(m.converged, "{}", m.gradient_norm);
        assert!(m.gradient_norm <= 1e-6);
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0 && softplus(-1000.0) < 1e-300);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
