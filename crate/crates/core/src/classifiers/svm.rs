//! Soft-margin kernel SVM trained by SMO with second-order working-set
//! selection, in the style of LIBSVM's C-SVC solver.

use std::rc::Rc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, KernelKind};
use super::sign_of;
use crate::groundtruth::SunShade;
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    pub c: f64,
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    /// Iteration cap in passes; one pass is n/2 pair updates.
    pub max_passes: f64,
    pub cache_bytes: usize,
}

impl Default for SvmOptions {
    fn default() -> Self {
        SvmOptions {
            c: 1.0,
            tol: 1e-3,
            max_passes: 10_000.0,
            cache_bytes: 256 << 20,
        }
    }
}

/// Dual solution. The decision value of training row `i` is
/// `sum_j alpha_j y_j K(x_j, x_i) - rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    /// Gradient of the dual objective, `(Q alpha)_i - 1`.
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Columns of `Q_ij = y_i y_j K(x_i, x_j)` in single precision with LRU
/// eviction.
struct QCache<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    kernel: Kernel,
    norms: Vec<f64>,
    columns: Vec<Option<Rc<[f32]>>>,
    last_used: Vec<u64>,
    resident: Vec<usize>,
    capacity: usize,
    clock: u64,
}

impl<'a> QCache<'a> {
    fn new(x: &'a Matrix, y: &'a [f64], kernel: Kernel, cache_bytes: usize) -> Self {
        let n = x.nrows();
        let capacity = (cache_bytes / (4 * n.max(1))).clamp(2, n.max(2));
        QCache {
            x,
            y,
            kernel,
            norms: x.rows_iter().map(|r| dot(r, r)).collect(),
            columns: vec![None; n],
            last_used: vec![0; n],
            resident: Vec::new(),
            capacity,
            clock: 0,
        }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.x.row(i), self.x.row(j));
        match self.kernel.kind {
            KernelKind::Rbf => {
                let d2 = (self.norms[i] + self.norms[j] - 2.0 * dot(a, b)).max(0.0);
                (-self.kernel.gamma * d2).exp()
            }
            _ => self.kernel.eval(a, b),
        }
    }

    fn diagonal(&self, i: usize) -> f64 {
        self.kernel.eval(self.x.row(i), self.x.row(i))
    }

    fn column(&mut self, j: usize) -> Rc<[f32]> {
        self.clock += 1;
        self.last_used[j] = self.clock;
        if let Some(c) = &self.columns[j] {
            return Rc::clone(c);
        }
        if self.resident.len() >= self.capacity {
            let (pos, _) = self
                .resident
                .iter()
                .enumerate()
                .min_by_key(|(_, &c)| self.last_used[c])
                .expect("cache is non-empty");
            let victim = self.resident.swap_remove(pos);
            self.columns[victim] = None;
        }
        let yj = self.y[j];
        let col: Rc<[f32]> = (0..self.x.nrows())
            .map(|i| (self.y[i] * yj * self.k(i, j)) as f32)
            .collect();
        self.columns[j] = Some(Rc::clone(&col));
        self.resident.push(j);
        col
    }
}

const TAU: f64 = 1e-12;

/// Solves `min 0.5 a'Qa - e'a` subject to `0 <= a_i <= c` and `y'a = 0`.
pub fn solve(x: &Matrix, y: &[f64], kernel: Kernel, options: &SvmOptions) -> Solution {
    let n = x.nrows();
    let c = options.c;
    let mut q = QCache::new(x, y, kernel, options.cache_bytes);
    let qd: Vec<f64> = (0..n).map(|i| q.diagonal(i)).collect();
    let mut alpha = vec![0.0; n];
    let mut g = vec![-1.0; n];
    let max_iter = ((options.max_passes * (n as f64 / 2.0).ceil()).min(usize::MAX as f64) as usize).max(1);
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // first index: maximal violating pair member from the "up" set
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if y[t] > 0.0 {
                if !upper(alpha[t]) && -g[t] >= gmax {
                    gmax = -g[t];
                    i = t;
                }
            } else if !lower(alpha[t]) && g[t] >= gmax {
                gmax = g[t];
                i = t;
            }
        }
        let qi = if i == usize::MAX { None } else { Some(q.column(i)) };
        // second index: largest decrease of the second-order model
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if y[t] > 0.0 {
                if !lower(alpha[t]) {
                    let diff = gmax + g[t];
                    if g[t] >= gmax2 {
                        gmax2 = g[t];
                    }
                    if let (true, Some(qi)) = (diff > 0.0, &qi) {
                        let quad = qd[i] + qd[t] - 2.0 * y[i] * f64::from(qi[t]);
                        let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                        if obj <= best {
                            best = obj;
                            j = t;
                        }
                    }
                }
            } else if !upper(alpha[t]) {
                let diff = gmax - g[t];
                if -g[t] >= gmax2 {
                    gmax2 = -g[t];
                }
                if let (true, Some(qi)) = (diff > 0.0, &qi) {
                    let quad = qd[i] + qd[t] + 2.0 * y[i] * f64::from(qi[t]);
                    let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                    if obj <= best {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        if gmax + gmax2 < options.tol || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;
        let qi = qi.expect("i selected");
        let qj = q.column(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = qd[i] + qd[j] + 2.0 * f64::from(qi[j]);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * f64::from(qi[j]);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            g[t] += f64::from(qi[t]) * di + f64::from(qj[t]) * dj;
        }
    }

    Solution {
        rho: compute_rho(&alpha, &g, y, c),
        alpha,
        gradient: g,
        iterations,
        converged,
    }
}

fn compute_rho(alpha: &[f64], g: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * g[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub support_vectors: Matrix,
    /// `alpha_i y_i` per support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    pub fn fit(x: &Matrix, labels: &[SunShade], kernel: Kernel, options: &SvmOptions) -> SvmModel {
        let y: Vec<f64> = labels.iter().map(|l| sign_of(*l)).collect();
        let sol = solve(x, &y, kernel, options);
        let sv: Vec<usize> = (0..x.nrows()).filter(|&i| sol.alpha[i] > 0.0).collect();
        SvmModel {
            kernel,
            support_vectors: x.select_rows(&sv),
            coef: sv.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
            rho: sol.rho,
            iterations: sol.iterations,
            converged: sol.converged,
        }
    }

    pub fn decision_value(&self, row: &[f64]) -> f64 {
        let mut s = 0.0;
        for (k, sv) in self.support_vectors.rows_iter().enumerate() {
            s += self.coef[k] * self.kernel.eval(sv, row);
        }
        s - self.rho
    }

    pub fn decision_values(&self, x: &Matrix) -> Vec<f64> {
        (0..x.nrows())
            .into_par_iter()
            .map(|i| self.decision_value(x.row(i)))
            .collect()
    }
}
