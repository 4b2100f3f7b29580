//! Leave-one-day-out cross-validation, permutation importance, feature-set
//! ablation and cross-scene evaluation.
//!
//! Every task (method, pattern, mask) draws its randomness from a seed
//! derived from the base seed and a task name, so results do not depend on
//! how rayon schedules the work.

pub mod report;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{train, ClassifierError, ClassifierSpec, Method, TrainedModel};
use crate::features::{apply_mask, labels_of, FeatureRow, FeatureSetMask};
use crate::groundtruth::SunShade;
use crate::matrix::Matrix;
use crate::minute::Minute;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("both classes are required, found only {0}")]
    SingleClass(SunShade),
    #[error("no rows")]
    Empty,
    #[error("{0} predictions but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("invalid fold patterns: {0}")]
    Patterns(String),
    #[error("{method} on {pattern}: {source}")]
    Task {
        method: Method,
        pattern: String,
        source: ClassifierError,
    },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("at least 2 repeats are required, got {0}")]
    Repeats(usize),
}

/// Counts with `Sun` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl Metrics {
    /// Accuracy plus precision, recall and f1 macro-averaged over both
    /// classes. Zero denominators give 0.
    pub fn from_confusion(c: Confusion) -> Metrics {
        let p_sun = ratio(c.tp, c.tp + c.fp);
        let p_shade = ratio(c.tn, c.tn + c.fn_);
        let r_sun = ratio(c.tp, c.tp + c.fn_);
        let r_shade = ratio(c.tn, c.tn + c.fp);
        Metrics {
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision: (p_sun + p_shade) / 2.0,
            recall: (r_sun + r_shade) / 2.0,
            f1: (harmonic(p_sun, r_sun) + harmonic(p_shade, r_shade)) / 2.0,
            confusion: c,
        }
    }

    /// Field-wise mean; confusion counts are summed.
    pub fn mean(items: &[Metrics]) -> Metrics {
        let n = items.len().max(1) as f64;
        let mut confusion = Confusion::default();
        for m in items {
            confusion.add(&m.confusion);
        }
        Metrics {
            accuracy: items.iter().map(|m| m.accuracy).sum::<f64>() / n,
            precision: items.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: items.iter().map(|m| m.recall).sum::<f64>() / n,
            f1: items.iter().map(|m| m.f1).sum::<f64>() / n,
            confusion,
        }
    }
}

pub fn compute_metrics(predicted: &[SunShade], actual: &[SunShade]) -> Result<Metrics, EvalError> {
    if predicted.len() != actual.len() {
        return Err(EvalError::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut c = Confusion::default();
    for (p, a) in predicted.iter().zip(actual) {
        match (p, a) {
            (SunShade::Sun, SunShade::Sun) => c.tp += 1,
            (SunShade::Shade, SunShade::Shade) => c.tn += 1,
            (SunShade::Sun, SunShade::Shade) => c.fp += 1,
            (SunShade::Shade, SunShade::Sun) => c.fn_ += 1,
        }
    }
    Ok(Metrics::from_confusion(c))
}

/// Seed for one named task: FNV-1a over the base seed and the name.
pub fn task_seed(base: u64, task: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in base.to_le_bytes().iter().chain(task.as_bytes()) {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Indices (ascending) of a class-balanced subset: the majority class is
/// undersampled without replacement to the minority count.
pub fn balance_indices(labels: &[SunShade], seed: u64) -> Result<Vec<usize>, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut shade = Vec::new();
    let mut sun = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        match l {
            SunShade::Shade => shade.push(i),
            SunShade::Sun => sun.push(i),
        }
    }
    if shade.is_empty() {
        return Err(EvalError::SingleClass(SunShade::Sun));
    }
    if sun.is_empty() {
        return Err(EvalError::SingleClass(SunShade::Shade));
    }
    let (minority, mut majority) = if sun.len() < shade.len() { (sun, shade) } else { (shade, sun) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (kept, _) = majority.partial_shuffle(&mut rng, minority.len());
    let mut out: Vec<usize> = minority.iter().chain(kept.iter()).copied().collect();
    out.sort_unstable();
    Ok(out)
}

pub fn balance_classes(rows: &[FeatureRow], seed: u64) -> Result<Vec<FeatureRow>, EvalError> {
    let idx = balance_indices(&labels_of(rows), seed)?;
    Ok(idx.into_iter().map(|i| rows[i].clone()).collect())
}

/// Day identifier used for folds: the UTC calendar date of the minute.
pub fn day_of(row: &FeatureRow) -> NaiveDate {
    row.minute.date()
}

pub fn days_of(rows: &[FeatureRow]) -> BTreeSet<NaiveDate> {
    rows.iter().map(day_of).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPattern {
    pub name: String,
    pub training_days: BTreeSet<NaiveDate>,
    pub test_day: NaiveDate,
}

impl FoldPattern {
    /// One pattern per day, in date order, each testing on that day and
    /// training on all others.
    pub fn leave_one_day_out(days: &BTreeSet<NaiveDate>) -> Result<Vec<FoldPattern>, EvalError> {
        if days.len() < 2 {
            return Err(EvalError::Patterns(format!(
                "leave-one-day-out needs at least 2 days, found {}",
                days.len()
            )));
        }
        Ok(days
            .iter()
            .enumerate()
            .map(|(i, d)| FoldPattern {
                name: format!("Pattern-{}", i + 1),
                training_days: days.iter().filter(|x| *x != d).copied().collect(),
                test_day: *d,
            })
            .collect())
    }

    pub fn from_rows(rows: &[FeatureRow]) -> Result<Vec<FoldPattern>, EvalError> {
        FoldPattern::leave_one_day_out(&days_of(rows))
    }
}

fn check_patterns(rows: &[FeatureRow], patterns: &[FoldPattern]) -> Result<(), EvalError> {
    if patterns.is_empty() {
        return Err(EvalError::Patterns("no patterns".into()));
    }
    let present = days_of(rows);
    for p in patterns {
        if p.training_days.contains(&p.test_day) {
            return Err(EvalError::Patterns(format!("{} tests on one of its training days", p.name)));
        }
        for d in p.training_days.iter().chain(std::iter::once(&p.test_day)) {
            if !present.contains(d) {
                return Err(EvalError::Patterns(format!("{}: no rows for day {d}", p.name)));
            }
        }
    }
    Ok(())
}

/// Canonical (minute, satellite) order, so results do not depend on the
/// order rows arrive in.
fn canonical(rows: &[FeatureRow]) -> Vec<FeatureRow> {
    let mut out = rows.to_vec();
    out.sort_by(|a, b| (a.minute, a.sat).cmp(&(b.minute, b.sat)));
    out
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub seed: u64,
    /// Also score a per-minute majority vote over satellites.
    pub minute_vote: bool,
}

/// What a fold actually trained and tested on, recorded from the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAudit {
    pub training_days: BTreeSet<NaiveDate>,
    pub standardizer_days: BTreeSet<NaiveDate>,
    pub test_days: BTreeSet<NaiveDate>,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternResult {
    pub pattern: String,
    pub metrics: Metrics,
    pub minute_vote: Option<Metrics>,
    pub audit: FoldAudit,
    pub convergence_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub mask: FeatureSetMask,
    pub per_pattern: Vec<PatternResult>,
    pub mean: Metrics,
    pub minute_vote_mean: Option<Metrics>,
}

impl MethodResult {
    fn from_patterns(method: Method, mask: FeatureSetMask, per_pattern: Vec<PatternResult>) -> MethodResult {
        let mean = Metrics::mean(&per_pattern.iter().map(|p| p.metrics).collect::<Vec<_>>());
        let votes: Option<Vec<Metrics>> = per_pattern.iter().map(|p| p.minute_vote).collect();
        MethodResult {
            method,
            mask,
            mean,
            minute_vote_mean: votes.map(|v| Metrics::mean(&v)),
            per_pattern,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub seed: u64,
    pub mask: FeatureSetMask,
    pub patterns: Vec<FoldPattern>,
    /// In the order the specs were given.
    pub methods: Vec<MethodResult>,
}

impl CvReport {
    /// Methods by mean accuracy, best first; ties keep input order.
    pub fn ranked(&self) -> Vec<&MethodResult> {
        let mut v: Vec<&MethodResult> = self.methods.iter().collect();
        v.sort_by(|a, b| b.mean.accuracy.total_cmp(&a.mean.accuracy));
        v
    }

    pub fn result(&self, method: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// Majority label per minute (ties go to `Shade`) against the minute's label.
pub fn minute_vote_metrics(minutes: &[Minute], predicted: &[SunShade], actual: &[SunShade]) -> Result<Metrics, EvalError> {
    if minutes.len() != predicted.len() {
        return Err(EvalError::LengthMismatch(predicted.len(), minutes.len()));
    }
    let mut votes: BTreeMap<Minute, (i64, SunShade)> = BTreeMap::new();
    for ((m, p), a) in minutes.iter().zip(predicted).zip(actual) {
        let e = votes.entry(*m).or_insert((0, *a));
        e.0 += if *p == SunShade::Sun { 1 } else { -1 };
    }
    let (pred, truth): (Vec<SunShade>, Vec<SunShade>) = votes
        .values()
        .map(|(v, a)| (if *v > 0 { SunShade::Sun } else { SunShade::Shade }, *a))
        .unzip();
    compute_metrics(&pred, &truth)
}

struct Task<'a> {
    spec: &'a ClassifierSpec,
    mask: FeatureSetMask,
    pattern: &'a FoldPattern,
}

fn run_task(rows: &[FeatureRow], task: &Task, options: &CvOptions) -> Result<PatternResult, EvalError> {
    let p = task.pattern;
    let training: Vec<FeatureRow> = rows
        .iter()
        .filter(|r| p.training_days.contains(&day_of(r)))
        .cloned()
        .collect();
    let test: Vec<&FeatureRow> = rows.iter().filter(|r| day_of(r) == p.test_day).collect();
    // the balanced subset depends only on the pattern, so every method and
    // mask sees the same training rows
    let training = balance_classes(&training, task_seed(options.seed, &format!("balance/{}", p.name)))?;
    let training_days = days_of(&training);
    assert!(
        !training_days.contains(&p.test_day),
        "test day {} leaked into training for {}",
        p.test_day,
        p.name
    );
    let (x, names) = apply_mask(&training, task.mask);
    let spec = task
        .spec
        .clone()
        .with_seed(task_seed(options.seed, &format!("{}/{}/{}", task.spec.method, task.mask.code(), p.name)));
    let wrap = |source| EvalError::Task {
        method: task.spec.method,
        pattern: p.name.clone(),
        source,
    };
    let model = train(&spec, &x, &labels_of(&training)).map_err(wrap)?;
    let model = model.with_features(Some(task.mask), names);
    let test_rows: Vec<FeatureRow> = test.iter().map(|r| (*r).clone()).collect();
    let (xt, _) = apply_mask(&test_rows, task.mask);
    let yt = labels_of(&test_rows);
    let predicted = model.predict(&xt).map_err(wrap)?;
    let metrics = compute_metrics(&predicted, &yt)?;
    let minute_vote = if options.minute_vote {
        let minutes: Vec<Minute> = test_rows.iter().map(|r| r.minute).collect();
        Some(minute_vote_metrics(&minutes, &predicted, &yt)?)
    } else {
        None
    };
    Ok(PatternResult {
        pattern: p.name.clone(),
        metrics,
        minute_vote,
        audit: FoldAudit {
            standardizer_days: training_days.clone(),
            training_days,
            test_days: test_rows.iter().map(day_of).collect(),
            n_train: training.len(),
            n_test: test_rows.len(),
        },
        convergence_warning: model.convergence_warning,
    })
}

/// Runs every (spec, mask) combination over every pattern, in parallel,
/// and regroups results in input order.
fn run_grid(
    rows: &[FeatureRow],
    patterns: &[FoldPattern],
    combos: &[(ClassifierSpec, FeatureSetMask)],
    options: &CvOptions,
) -> Result<Vec<MethodResult>, EvalError> {
    check_patterns(rows, patterns)?;
    let rows = canonical(rows);
    let tasks: Vec<Task> = combos
        .iter()
        .flat_map(|(spec, mask)| {
            patterns.iter().map(move |pattern| Task {
                spec,
                mask: *mask,
                pattern,
            })
        })
        .collect();
    let results: Vec<Result<PatternResult, EvalError>> =
        tasks.par_iter().map(|t| run_task(&rows, t, options)).collect();
    let mut results = results.into_iter();
    let mut out = Vec::with_capacity(combos.len());
    for (spec, mask) in combos {
        let per_pattern = results.by_ref().take(patterns.len()).collect::<Result<Vec<_>, _>>()?;
        out.push(MethodResult::from_patterns(spec.method, *mask, per_pattern));
    }
    Ok(out)
}

/// Per pattern: balance the training days, fit (standardizer included) on
/// them, predict the test day. Reports per-pattern and mean metrics.
pub fn run_cv(
    rows: &[FeatureRow],
    patterns: &[FoldPattern],
    specs: &[ClassifierSpec],
    mask: FeatureSetMask,
    options: &CvOptions,
) -> Result<CvReport, EvalError> {
    let combos: Vec<_> = specs.iter().map(|s| (s.clone(), mask)).collect();
    Ok(CvReport {
        seed: options.seed,
        mask,
        patterns: patterns.to_vec(),
        methods: run_grid(rows, patterns, &combos, options)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub seed: u64,
    pub method: Method,
    pub patterns: Vec<FoldPattern>,
    /// One entry per valid mask, in [`FeatureSetMask::all_valid`] order.
    pub masks: Vec<MethodResult>,
}

impl AblationReport {
    pub fn result(&self, mask: FeatureSetMask) -> Option<&MethodResult> {
        self.masks.iter().find(|m| m.mask == mask)
    }
}

/// Cross-validation of one classifier over all 14 feature-set masks.
pub fn run_ablation(
    rows: &[FeatureRow],
    patterns: &[FoldPattern],
    spec: &ClassifierSpec,
    options: &CvOptions,
) -> Result<AblationReport, EvalError> {
    let combos: Vec<_> = FeatureSetMask::all_valid().into_iter().map(|m| (spec.clone(), m)).collect();
    Ok(AblationReport {
        seed: options.seed,
        method: spec.method,
        patterns: patterns.to_vec(),
        masks: run_grid(rows, patterns, &combos, options)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature_name: String,
    pub mean_drop: f64,
    pub std_dev: f64,
}

/// Accuracy drop when one column of `x` is shuffled, for every column,
/// `repeats` times each. Entries are sorted by mean drop, largest first.
/// The standard deviation is the population one over repeats.
pub fn permutation_importance(
    model: &TrainedModel,
    x: &Matrix,
    y: &[SunShade],
    repeats: usize,
    seed: u64,
) -> Result<Vec<ImportanceEntry>, EvalError> {
    if repeats < 2 {
        return Err(EvalError::Repeats(repeats));
    }
    if x.nrows() != y.len() {
        return Err(EvalError::LengthMismatch(x.nrows(), y.len()));
    }
    let accuracy = |m: &Matrix| -> Result<f64, EvalError> { Ok(compute_metrics(&model.predict(m)?, y)?.accuracy) };
    let baseline = accuracy(x)?;
    let d = x.ncols();
    let drops: Vec<Result<Vec<f64>, EvalError>> = (0..d)
        .into_par_iter()
        .map(|j| {
            let column = x.column(j);
            let mut shuffled = x.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, &format!("importance/{j}")));
            (0..repeats)
                .map(|_| {
                    let mut c = column.clone();
                    c.shuffle(&mut rng);
                    shuffled.set_column(j, &c);
                    Ok(baseline - accuracy(&shuffled)?)
                })
                .collect()
        })
        .collect();
    let mut entries = Vec::with_capacity(d);
    for (j, drops) in drops.into_iter().enumerate() {
        let drops = drops?;
        let mean = drops.iter().sum::<f64>() / repeats as f64;
        let var = drops.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / repeats as f64;
        entries.push(ImportanceEntry {
            feature_name: model.feature_names.get(j).cloned().unwrap_or_else(|| format!("x{j}")),
            mean_drop: mean,
            std_dev: var.sqrt(),
        });
    }
    entries.sort_by(|a, b| b.mean_drop.total_cmp(&a.mean_drop));
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub seed: u64,
    pub method: Method,
    pub pattern: FoldPattern,
    pub repeats: usize,
    pub baseline_accuracy: f64,
    pub entries: Vec<ImportanceEntry>,
}

/// Trains on the pattern's balanced training days with the full feature
/// set and measures importance on its test day.
pub fn importance_on_pattern(
    rows: &[FeatureRow],
    pattern: &FoldPattern,
    spec: &ClassifierSpec,
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport, EvalError> {
    check_patterns(rows, std::slice::from_ref(pattern))?;
    let rows = canonical(rows);
    let training: Vec<FeatureRow> = rows
        .iter()
        .filter(|r| pattern.training_days.contains(&day_of(r)))
        .cloned()
        .collect();
    let test: Vec<FeatureRow> = rows.iter().filter(|r| day_of(r) == pattern.test_day).cloned().collect();
    let training = balance_classes(&training, task_seed(seed, &format!("balance/{}", pattern.name)))?;
    let (x, names) = apply_mask(&training, FeatureSetMask::ALL);
    let spec = spec.clone().with_seed(task_seed(seed, &format!("{}/importance", spec.method)));
    let model = train(&spec, &x, &labels_of(&training))?.with_features(Some(FeatureSetMask::ALL), names);
    let (xt, _) = apply_mask(&test, FeatureSetMask::ALL);
    let yt = labels_of(&test);
    let baseline_accuracy = compute_metrics(&model.predict(&xt)?, &yt)?.accuracy;
    Ok(ImportanceReport {
        seed,
        method: spec.method,
        pattern: pattern.clone(),
        repeats,
        baseline_accuracy,
        entries: permutation_importance(&model, &xt, &yt, repeats, seed)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSceneReport {
    pub seed: u64,
    pub method: Method,
    pub mask: FeatureSetMask,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: Metrics,
}

/// Trains on all of one scene (balanced) and tests on all of another.
pub fn cross_scene_eval(
    train_rows: &[FeatureRow],
    test_rows: &[FeatureRow],
    spec: &ClassifierSpec,
    mask: FeatureSetMask,
    seed: u64,
) -> Result<CrossSceneReport, EvalError> {
    if test_rows.is_empty() {
        return Err(EvalError::Empty);
    }
    let training = balance_classes(&canonical(train_rows), task_seed(seed, "balance/cross-scene"))?;
    let (x, names) = apply_mask(&training, mask);
    let spec = spec.clone().with_seed(task_seed(seed, &format!("{}/cross-scene", spec.method)));
    let model = train(&spec, &x, &labels_of(&training))?.with_features(Some(mask), names);
    let test = canonical(test_rows);
    let (xt, _) = apply_mask(&test, mask);
    Ok(CrossSceneReport {
        seed,
        method: spec.method,
        mask,
        n_train: training.len(),
        n_test: test.len(),
        metrics: compute_metrics(&model.predict(&xt)?, &labels_of(&test))?,
    })
}

/// Labels permuted across all rows; used as a null check.
pub fn shuffle_labels(rows: &[FeatureRow], seed: u64) -> Vec<FeatureRow> {
    let rows = canonical(rows);
    let mut labels = labels_of(&rows);
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    rows.into_iter()
        .zip(labels)
        .map(|(mut r, l)| {
            r.label = l;
            r
        })
        .collect()
}

/// Runs `f` on a rayon pool capped at `jobs` threads (0 means rayon's
/// default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(f)
}
