use serde::{Deserialize, Serialize};

use super::class_indices;
use crate::groundtruth::SunShade;
use crate::matrix::Matrix;

/// Gaussian naive Bayes. Index 0 is `Shade`, 1 is `Sun`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    pub log_priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

fn column_stats(x: &Matrix, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let d = x.ncols();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in rows {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for &i in rows {
        for j in 0..d {
            var[j] += (x.get(i, j) - mean[j]).powi(2);
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    (mean, var)
}

impl GaussianNbModel {
    /// Adds `var_smoothing` times the largest feature variance to every
    /// class variance.
    pub fn fit(x: &Matrix, y: &[SunShade], var_smoothing: f64) -> GaussianNbModel {
        let all: Vec<usize> = (0..y.len()).collect();
        let (_, overall) = column_stats(x, &all);
        let epsilon = var_smoothing * overall.iter().cloned().fold(0.0, f64::max);
        let classes = class_indices(y);
        let n = y.len() as f64;
        let stats = [column_stats(x, &classes[0]), column_stats(x, &classes[1])];
        let bump = |v: &Vec<f64>| -> Vec<f64> {
            // keep variances strictly positive when every feature is constant
            v.iter().map(|s| (s + epsilon).max(f64::MIN_POSITIVE)).collect()
        };
        GaussianNbModel {
            log_priors: [
                (classes[0].len() as f64 / n).ln(),
                (classes[1].len() as f64 / n).ln(),
            ],
            means: [stats[0].0.clone(), stats[1].0.clone()],
            variances: [bump(&stats[0].1), bump(&stats[1].1)],
        }
    }

    pub fn joint_log_likelihood(&self, row: &[f64]) -> [f64; 2] {
        let mut out = self.log_priors;
        for (c, o) in out.iter_mut().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let var = self.variances[c][j];
                *o -= 0.5 * (2.0 * std::f64::consts::PI * var).ln() + (v - self.means[c][j]).powi(2) / (2.0 * var);
            }
        }
        out
    }

    /// Log-likelihood ratio of `Sun` over `Shade`.
    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        x.rows_iter()
            .map(|r| {
                let j = self.joint_log_likelihood(r);
                j[1] - j[0]
            })
            .collect()
    }
}
