//! Twelve binary sun/shade classifiers behind one train/predict contract.
//!
//! Every model standardizes its inputs with statistics from the training
//! matrix unless `ClassifierSpec::standardize` is false. Internally `Sun` is the positive
//! class; exact ties in a decision value go to `Shade`.

pub mod discriminant;
pub mod ensemble;
pub mod kernel;
pub mod knn;
pub mod logistic;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureSetMask, Standardizer};
use crate::groundtruth::SunShade;
use crate::matrix::Matrix;

pub const MODEL_FORMAT: &str = "sunshade-model/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("expected {expected} feature columns, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{0} rows but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("training matrix is empty")]
    Empty,
    #[error("hyperparameter {name}: {message}")]
    Hyperparameter { name: String, message: String },
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("model format {0:?} is not supported")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SvmLinear,
    SvmPoly,
    SvmRbf,
    SvmSigmoid,
    DecisionTree,
    RandomForest,
    LogisticRegression,
    AdaBoost,
    GaussianNb,
    KNearest,
    Qda,
    Lda,
}

impl Method {
    pub const ALL: [Method; 12] = [
        Method::SvmLinear,
        Method::SvmPoly,
        Method::SvmRbf,
        Method::SvmSigmoid,
        Method::DecisionTree,
        Method::RandomForest,
        Method::LogisticRegression,
        Method::AdaBoost,
        Method::GaussianNb,
        Method::KNearest,
        Method::Qda,
        Method::Lda,
    ];

    /// Command-line identifier.
    pub fn id(self) -> &'static str {
        match self {
            Method::SvmLinear => "svm-linear",
            Method::SvmPoly => "svm-poly",
            Method::SvmRbf => "svm-rbf",
            Method::SvmSigmoid => "svm-sigmoid",
            Method::DecisionTree => "decision-tree",
            Method::RandomForest => "random-forest",
            Method::LogisticRegression => "logistic-regression",
            Method::AdaBoost => "adaboost",
            Method::GaussianNb => "gaussian-nb",
            Method::KNearest => "knn",
            Method::Qda => "qda",
            Method::Lda => "lda",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Method::SvmLinear => "SVM (Linear)",
            Method::SvmPoly => "SVM (Polynomial)",
            Method::SvmRbf => "SVM (RBF)",
            Method::SvmSigmoid => "SVM (Sigmoid)",
            Method::DecisionTree => "Decision Tree",
            Method::RandomForest => "Random Forest",
            Method::LogisticRegression => "Logistic Regression",
            Method::AdaBoost => "AdaBoost",
            Method::GaussianNb => "Gaussian Naive Bayes",
            Method::KNearest => "k-Nearest Neighbors",
            Method::Qda => "QDA",
            Method::Lda => "LDA",
        }
    }

    pub fn kernel_kind(self) -> Option<kernel::KernelKind> {
        match self {
            Method::SvmLinear => Some(kernel::KernelKind::Linear),
            Method::SvmPoly => Some(kernel::KernelKind::Poly),
            Method::SvmRbf => Some(kernel::KernelKind::Rbf),
            Method::SvmSigmoid => Some(kernel::KernelKind::Sigmoid),
            _ => None,
        }
    }

    /// Default hyperparameters. Integer-valued settings are stored as floats.
    pub fn defaults(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            Method::SvmLinear => &[("c", 1.0), ("tol", 1e-3), ("max_passes", 10_000.0), ("cache_mb", 1024.0)],
            Method::SvmPoly => &[
                ("c", 1.0),
                ("degree", 3.0),
                ("coef0", 0.0),
                ("tol", 1e-3),
                ("max_passes", 10_000.0),
                ("cache_mb", 1024.0),
            ],
            Method::SvmRbf => &[("c", 1.0), ("tol", 1e-3), ("max_passes", 10_000.0), ("cache_mb", 1024.0)],
            Method::SvmSigmoid => &[
                ("c", 1.0),
                ("coef0", 0.0),
                ("tol", 1e-3),
                ("max_passes", 10_000.0),
                ("cache_mb", 1024.0),
            ],
            Method::DecisionTree => &[("min_samples_split", 2.0)],
            Method::RandomForest => &[("n_trees", 100.0), ("min_samples_split", 2.0)],
            Method::LogisticRegression => &[("c", 1.0), ("grad_tol", 1e-6), ("max_iter", 100.0)],
            Method::AdaBoost => &[("n_estimators", 50.0), ("learning_rate", 1.0)],
            Method::GaussianNb => &[("var_smoothing", 1e-9)],
            Method::KNearest => &[("k", 5.0)],
            Method::Qda => &[("ridge", 1e-6)],
            Method::Lda => &[],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.id() == key)
            .ok_or_else(|| ClassifierError::UnknownMethod(s.to_string()))
    }
}

/// Parses a comma-separated method list; `all` selects every method.
pub fn parse_method_list(s: &str) -> Result<Vec<Method>, ClassifierError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Method = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(ClassifierError::UnknownMethod(s.to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub method: Method,
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: u64,
    /// Z-score inputs with training statistics before fitting.
    pub standardize: bool,
}

impl ClassifierSpec {
    pub fn new(method: Method) -> Self {
        ClassifierSpec {
            method,
            hyperparameters: method.defaults(),
            seed: 0,
            standardize: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Overrides one hyperparameter; unknown names are rejected.
    pub fn with(mut self, name: &str, value: f64) -> Result<Self, ClassifierError> {
        if !self.hyperparameters.contains_key(name) {
            return Err(ClassifierError::Hyperparameter {
                name: name.to_string(),
                message: format!("not a setting of {}", self.method),
            });
        }
        self.hyperparameters.insert(name.to_string(), value);
        Ok(self)
    }

    fn get(&self, name: &str) -> Result<f64, ClassifierError> {
        let v = self
            .hyperparameters
            .get(name)
            .copied()
            .or_else(|| self.method.defaults().get(name).copied())
            .ok_or_else(|| ClassifierError::Hyperparameter {
                name: name.to_string(),
                message: "missing".into(),
            })?;
        if !v.is_finite() {
            return Err(ClassifierError::Hyperparameter {
                name: name.to_string(),
                message: "must be finite".into(),
            });
        }
        Ok(v)
    }

    fn positive(&self, name: &str) -> Result<f64, ClassifierError> {
        let v = self.get(name)?;
        if v <= 0.0 {
            return Err(ClassifierError::Hyperparameter {
                name: name.to_string(),
                message: "must be positive".into(),
            });
        }
        Ok(v)
    }

    fn count(&self, name: &str) -> Result<usize, ClassifierError> {
        let v = self.positive(name)?;
        if v.fract() != 0.0 {
            return Err(ClassifierError::Hyperparameter {
                name: name.to_string(),
                message: "must be a whole number".into(),
            });
        }
        Ok(v as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FittedParams {
    Svm(svm::SvmModel),
    Tree(tree::Tree),
    Forest(ensemble::Forest),
    AdaBoost(ensemble::AdaBoost),
    Logistic(logistic::LogisticModel),
    GaussianNb(naive_bayes::GaussianNbModel),
    KNearest(knn::KnnModel),
    Lda(discriminant::LdaModel),
    Qda(discriminant::QdaModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub spec: ClassifierSpec,
    pub standardizer: Standardizer,
    pub mask: Option<FeatureSetMask>,
    pub feature_names: Vec<String>,
    pub params: FittedParams,
    /// Set when an iterative solver stopped at its iteration cap.
    pub convergence_warning: bool,
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        self.standardizer.means.len()
    }

    pub fn with_features(mut self, mask: Option<FeatureSetMask>, names: Vec<String>) -> Self {
        self.mask = mask;
        self.feature_names = names;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model parameters are finite")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, ClassifierError> {
        let model: TrainedModel =
            serde_json::from_str(text).map_err(|e| ClassifierError::Format(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(ClassifierError::Format(model.format));
        }
        Ok(model)
    }

    /// Positive values favour `Sun`.
    pub fn decision_values(&self, x: &Matrix) -> Result<Vec<f64>, ClassifierError> {
        if x.ncols() != self.n_features() {
            return Err(ClassifierError::Dimension {
                expected: self.n_features(),
                got: x.ncols(),
            });
        }
        if !x.all_finite() {
            return Err(ClassifierError::NonFinite);
        }
        let z = self.standardizer.apply(x);
        Ok(match &self.params {
            FittedParams::Svm(m) => m.decision_values(&z),
            FittedParams::Tree(t) => t.decision_values(&z),
            FittedParams::Forest(f) => f.decision_values(&z),
            FittedParams::AdaBoost(a) => a.decision_values(&z),
            FittedParams::Logistic(m) => m.decision_values(&z),
            FittedParams::GaussianNb(m) => m.decision_values(&z),
            FittedParams::KNearest(m) => m.decision_values(&z),
            FittedParams::Lda(m) => m.decision_values(&z),
            FittedParams::Qda(m) => m.decision_values(&z),
        })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<SunShade>, ClassifierError> {
        Ok(self.decision_values(x)?.into_iter().map(label_of).collect())
    }
}

pub fn predict(model: &TrainedModel, x: &Matrix) -> Result<Vec<SunShade>, ClassifierError> {
    model.predict(x)
}

/// `Sun` for strictly positive decision values.
pub fn label_of(decision: f64) -> SunShade {
    if decision > 0.0 {
        SunShade::Sun
    } else {
        SunShade::Shade
    }
}

pub(crate) fn sign_of(label: SunShade) -> f64 {
    match label {
        SunShade::Sun => 1.0,
        SunShade::Shade => -1.0,
    }
}

fn check_training_input(x: &Matrix, y: &[SunShade]) -> Result<(), ClassifierError> {
    if x.nrows() != y.len() {
        return Err(ClassifierError::LengthMismatch(x.nrows(), y.len()));
    }
    if x.is_empty() || x.ncols() == 0 {
        return Err(ClassifierError::Empty);
    }
    if !x.all_finite() {
        return Err(ClassifierError::NonFinite);
    }
    if y.iter().all(|l| *l == y[0]) {
        return Err(ClassifierError::SingleClass);
    }
    Ok(())
}

pub fn train(spec: &ClassifierSpec, x: &Matrix, y: &[SunShade]) -> Result<TrainedModel, ClassifierError> {
    check_training_input(x, y)?;
    for name in spec.hyperparameters.keys() {
        if !spec.method.defaults().contains_key(name) {
            return Err(ClassifierError::Hyperparameter {
                name: name.clone(),
                message: format!("not a setting of {}", spec.method),
            });
        }
    }
    let standardizer = if spec.standardize {
        Standardizer::fit(x)
    } else {
        Standardizer::identity(x.ncols())
    };
    let z = standardizer.apply(x);
    let mut convergence_warning = false;
    let params = match spec.method {
        Method::SvmLinear | Method::SvmPoly | Method::SvmRbf | Method::SvmSigmoid => {
            let kind = spec.method.kernel_kind().expect("svm method");
            let kernel = kernel::Kernel::for_training(
                kind,
                &z,
                spec.get("degree").unwrap_or(3.0),
                spec.get("coef0").unwrap_or(0.0),
            );
            let options = svm::SvmOptions {
                c: spec.positive("c")?,
                tol: spec.positive("tol")?,
                max_passes: spec.positive("max_passes")?,
                cache_bytes: (spec.positive("cache_mb")? * 1024.0 * 1024.0) as usize,
            };
            let model = svm::SvmModel::fit(&z, y, kernel, &options);
            convergence_warning = !model.converged;
            FittedParams::Svm(model)
        }
        Method::DecisionTree => {
            let options = tree::TreeOptions {
                min_samples_split: spec.count("min_samples_split")?.max(2),
                ..tree::TreeOptions::default()
            };
            FittedParams::Tree(tree::Tree::fit(&z, y, None, &options, None))
        }
        Method::RandomForest => FittedParams::Forest(ensemble::Forest::fit(
            &z,
            y,
            spec.count("n_trees")?,
            spec.count("min_samples_split")?.max(2),
            spec.seed,
        )),
        Method::AdaBoost => FittedParams::AdaBoost(ensemble::AdaBoost::fit(
            &z,
            y,
            spec.count("n_estimators")?,
            spec.positive("learning_rate")?,
        )),
        Method::LogisticRegression => {
            let model = logistic::LogisticModel::fit(
                &z,
                y,
                spec.positive("c")?,
                spec.positive("grad_tol")?,
                spec.count("max_iter")?,
            );
            convergence_warning = !model.converged;
            FittedParams::Logistic(model)
        }
        Method::GaussianNb => {
            FittedParams::GaussianNb(naive_bayes::GaussianNbModel::fit(&z, y, spec.get("var_smoothing")?.max(0.0)))
        }
        Method::KNearest => FittedParams::KNearest(knn::KnnModel::fit(&z, y, spec.count("k")?)),
        Method::Lda => FittedParams::Lda(discriminant::LdaModel::fit(&z, y)),
        Method::Qda => FittedParams::Qda(discriminant::QdaModel::fit(&z, y, spec.get("ridge")?.max(0.0))),
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.to_string(),
        spec: spec.clone(),
        standardizer,
        mask: None,
        feature_names: Vec::new(),
        params,
        convergence_warning,
    })
}

/// Indices of the rows in each class, `Shade` first.
pub(crate) fn class_indices(y: &[SunShade]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, l) in y.iter().enumerate() {
        out[(*l == SunShade::Sun) as usize].push(i);
    }
    out
}
