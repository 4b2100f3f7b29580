use serde::{Deserialize, Serialize};

use crate::matrix::{dot, squared_distance, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Poly,
    Rbf,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub gamma: f64,
    pub coef0: f64,
    pub degree: f64,
}

impl Kernel {
    /// Uses `gamma = 1 / (n_features * var(X))` over all entries of `x`,
    /// falling back to 1 when that variance is zero.
    pub fn for_training(kind: KernelKind, x: &Matrix, degree: f64, coef0: f64) -> Kernel {
        let values = x.as_slice();
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let gamma = if var > 0.0 { 1.0 / (x.ncols() as f64 * var) } else { 1.0 };
        Kernel {
            kind,
            gamma,
            coef0,
            degree,
        }
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        kernel(self.kind, x, z, self)
    }
}

/// Linear `<x,z>`, polynomial `(gamma <x,z> + coef0)^degree`, RBF
/// `exp(-gamma |x-z|^2)` and sigmoid `tanh(gamma <x,z> + coef0)`.
pub fn kernel(kind: KernelKind, x: &[f64], z: &[f64], params: &Kernel) -> f64 {
    assert_eq!(x.len(), z.len(), "kernel arguments differ in dimension");
    match kind {
        KernelKind::Linear => dot(x, z),
        KernelKind::Poly => (params.gamma * dot(x, z) + params.coef0).powf(params.degree),
        KernelKind::Rbf => (-params.gamma * squared_distance(x, z)).exp(),
        KernelKind::Sigmoid => (params.gamma * dot(x, z) + params.coef0).tanh(),
    }
}
