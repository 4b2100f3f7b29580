//! Linear and quadratic discriminant analysis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::class_indices;
use crate::groundtruth::SunShade;
use crate::matrix::{dot, Matrix};

fn class_mean(x: &Matrix, rows: &[usize]) -> DVector<f64> {
    let mut m = DVector::zeros(x.ncols());
    for &i in rows {
        for j in 0..x.ncols() {
            m[j] += x.get(i, j);
        }
    }
    m / rows.len() as f64
}

fn scatter(x: &Matrix, rows: &[usize], mean: &DVector<f64>) -> DMatrix<f64> {
    let d = x.ncols();
    let mut s = DMatrix::zeros(d, d);
    let mut c = vec![0.0; d];
    for &i in rows {
        for j in 0..d {
            c[j] = x.get(i, j) - mean[j];
        }
        for a in 0..d {
            for b in a..d {
                s[(a, b)] += c[a] * c[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            s[(a, b)] = s[(b, a)];
        }
    }
    s
}

fn log_priors(y: &[SunShade]) -> [f64; 2] {
    let classes = class_indices(y);
    let n = y.len() as f64;
    [(classes[0].len() as f64 / n).ln(), (classes[1].len() as f64 / n).ln()]
}

/// Shared-covariance discriminant; the decision function is linear,
/// `w.x + b`, with `w = S^+ (mu_sun - mu_shade)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LdaModel {
    /// Pooled within-class covariance, inverted with an SVD pseudo-inverse.
    pub fn fit(x: &Matrix, y: &[SunShade]) -> LdaModel {
        let classes = class_indices(y);
        let means = [class_mean(x, &classes[0]), class_mean(x, &classes[1])];
        let dof = (y.len() as f64 - 2.0).max(1.0);
        let pooled = (scatter(x, &classes[0], &means[0]) + scatter(x, &classes[1], &means[1])) / dof;
        let svd = pooled.svd(true, true);
        let cutoff = svd.singular_values.max() * 1e-10;
        let pinv = svd.pseudo_inverse(cutoff).expect("u and v were computed");
        let w = &pinv * (&means[1] - &means[0]);
        let priors = log_priors(y);
        let intercept = -0.5 * (means[1].dot(&(&pinv * &means[1])) - means[0].dot(&(&pinv * &means[0])))
            + priors[1]
            - priors[0];
        LdaModel {
            weights: w.iter().copied().collect(),
            intercept,
        }
    }

    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        x.rows_iter().map(|r| dot(&self.weights, r) + self.intercept).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdaClass {
    pub mean: Vec<f64>,
    /// Lower Cholesky factor of the regularized covariance.
    pub cholesky: Matrix,
    pub log_det: f64,
    pub log_prior: f64,
}

impl QdaClass {
    fn log_density(&self, row: &[f64]) -> f64 {
        let d = row.len();
        // forward substitution: solve L z = row - mean
        let mut z = vec![0.0; d];
        for a in 0..d {
            let mut s = row[a] - self.mean[a];
            for b in 0..a {
                s -= self.cholesky.get(a, b) * z[b];
            }
            z[a] = s / self.cholesky.get(a, a);
        }
        -0.5 * (self.log_det + dot(&z, &z)) + self.log_prior
    }
}

/// Per-class covariance discriminant with a diagonal ridge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QdaModel {
    pub classes: [QdaClass; 2],
}

impl QdaModel {
    pub fn fit(x: &Matrix, y: &[SunShade], ridge: f64) -> QdaModel {
        let d = x.ncols();
        let idx = class_indices(y);
        let priors = log_priors(y);
        let fit_class = |c: usize| {
            let mean = class_mean(x, &idx[c]);
            let dof = (idx[c].len() as f64 - 1.0).max(1.0);
            let cov = scatter(x, &idx[c], &mean) / dof;
            let mut r = ridge;
            let chol = loop {
                let reg = &cov + DMatrix::identity(d, d) * r;
                if let Some(ch) = reg.cholesky() {
                    break ch.l();
                }
                // degenerate class covariance: grow the ridge until positive definite
                r = if r > 0.0 { r * 10.0 } else { 1e-12 };
            };
            let log_det = 2.0 * (0..d).map(|a| chol[(a, a)].ln()).sum::<f64>();
            let mut l = Matrix::zeros(d, d);
            for a in 0..d {
                for b in 0..=a {
                    l.set(a, b, chol[(a, b)]);
                }
            }
            QdaClass {
                mean: mean.iter().copied().collect(),
                cholesky: l,
                log_det,
                log_prior: priors[c],
            }
        };
        QdaModel {
            classes: [fit_class(0), fit_class(1)],
        }
    }

    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        x.rows_iter()
            .map(|r| self.classes[1].log_density(r) - self.classes[0].log_density(r))
            .collect()
    }
}
