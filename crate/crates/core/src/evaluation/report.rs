//! Aligned plain-text tables and CSV exports for evaluation reports.

use std::io::Write;

use serde::Serialize;

use super::{AblationReport, CrossSceneReport, CvReport, ImportanceReport, Metrics, MethodResult};
use crate::features::Feature;

/// First column left-aligned, the rest right-aligned.
pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                s.push_str(&format!("{c:<w$}"));
            } else {
                s.push_str(&format!("  {c:>w$}"));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out.push_str(&line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(|s| s.as_str()).collect()));
    }
    out
}

fn f4(v: f64) -> String {
    format!("{v:.4}")
}

fn metric_cells(m: &Metrics) -> Vec<String> {
    vec![f4(m.accuracy), f4(m.recall), f4(m.precision), f4(m.f1)]
}

const METRIC_HEADERS: [&str; 4] = ["Accuracy", "Recall", "Precision", "F1-score"];

fn with_metric_headers(first: &'static str) -> Vec<&'static str> {
    std::iter::once(first).chain(METRIC_HEADERS).collect()
}

/// Methods ranked by mean accuracy over the patterns.
pub fn cv_table(report: &CvReport) -> String {
    let rows: Vec<Vec<String>> = report
        .ranked()
        .into_iter()
        .map(|r| {
            let mut row = vec![r.method.display_name().to_string()];
            row.extend(metric_cells(&r.mean));
            row
        })
        .collect();
    format!(
        "Leave-one-day-out cross-validation, mask {}, {} patterns\n{}",
        report.mask.code(),
        report.patterns.len(),
        render_table(&with_metric_headers("Method"), &rows)
    )
}

/// Same ranking as [`cv_table`], scored by per-minute majority vote. `None`
/// when the report was run without it.
pub fn minute_vote_table(report: &CvReport) -> Option<String> {
    let rows = report
        .ranked()
        .into_iter()
        .map(|r| {
            r.minute_vote_mean.map(|m| {
                let mut row = vec![r.method.display_name().to_string()];
                row.extend(metric_cells(&m));
                row
            })
        })
        .collect::<Option<Vec<_>>>()?;
    Some(format!(
        "Per-minute majority vote\n{}",
        render_table(&with_metric_headers("Method"), &rows)
    ))
}

/// Masks in their canonical order.
pub fn ablation_table(report: &AblationReport) -> String {
    let rows: Vec<Vec<String>> = report
        .masks
        .iter()
        .map(|r| {
            let mut row = vec![r.mask.code()];
            row.extend(metric_cells(&r.mean));
            row
        })
        .collect();
    format!(
        "Feature-set ablation, {}\n{}",
        report.method.display_name(),
        render_table(&with_metric_headers("Mask"), &rows)
    )
}

fn display_feature(name: &str) -> String {
    Feature::from_column_name(name).map(|f| f.display_name()).unwrap_or_else(|| name.to_string())
}

pub fn importance_table(report: &ImportanceReport) -> String {
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            vec![
                display_feature(&e.feature_name),
                format!("{:.4} ± {:.4}", e.mean_drop, e.std_dev),
            ]
        })
        .collect();
    format!(
        "Permutation importance, {}, test day {}, baseline accuracy {:.4}, {} repeats\n{}",
        report.method.display_name(),
        report.pattern.test_day,
        report.baseline_accuracy,
        report.repeats,
        render_table(&["Feature", "Weight"], &rows)
    )
}

pub fn cross_scene_table(report: &CrossSceneReport) -> String {
    let mut row = vec![report.method.display_name().to_string()];
    row.extend(metric_cells(&report.metrics));
    format!(
        "Cross-scene evaluation, mask {}, {} training rows, {} test rows\n{}",
        report.mask.code(),
        report.n_train,
        report.n_test,
        render_table(&with_metric_headers("Method"), &[row])
    )
}

#[derive(Serialize)]
struct MetricsRecord<'a> {
    method: &'a str,
    mask: String,
    pattern: &'a str,
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    tp: usize,
    tn: usize,
    fp: usize,
    #[serde(rename = "fn")]
    fn_: usize,
}

impl<'a> MetricsRecord<'a> {
    fn new(r: &'a MethodResult, pattern: &'a str, m: &Metrics) -> Self {
        MetricsRecord {
            method: r.method.id(),
            mask: r.mask.code(),
            pattern,
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            tp: m.confusion.tp,
            tn: m.confusion.tn,
            fp: m.confusion.fp,
            fn_: m.confusion.fn_,
        }
    }
}

fn write_results<'a, W: Write>(out: W, results: impl Iterator<Item = &'a MethodResult>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        for p in &r.per_pattern {
            w.serialize(MetricsRecord::new(r, &p.pattern, &p.metrics))?;
        }
        w.serialize(MetricsRecord::new(r, "mean", &r.mean))?;
    }
    w.flush()?;
    Ok(())
}

/// One line per (method, pattern) plus a `mean` line per method, ranked.
pub fn write_cv_csv<W: Write>(out: W, report: &CvReport) -> csv::Result<()> {
    write_results(out, report.ranked().into_iter())
}

pub fn write_ablation_csv<W: Write>(out: W, report: &AblationReport) -> csv::Result<()> {
    write_results(out, report.masks.iter())
}

pub fn write_importance_csv<W: Write>(out: W, report: &ImportanceReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "feature", "display_name", "mean_drop", "std_dev"])?;
    for (i, e) in report.entries.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            e.feature_name.clone(),
            display_feature(&e.feature_name),
            e.mean_drop.to_string(),
            e.std_dev.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cross_scene_csv<W: Write>(out: W, report: &CrossSceneReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let m = &report.metrics;
    w.write_record(["method", "mask", "n_train", "n_test", "accuracy", "precision", "recall", "f1"])?;
    w.write_record([
        report.method.id().to_string(),
        report.mask.code(),
        report.n_train.to_string(),
        report.n_test.to_string(),
        m.accuracy.to_string(),
        m.precision.to_string(),
        m.recall.to_string(),
        m.f1.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_align() {
        let t = render_table(&["Name", "Value"], &[vec!["a".into(), "1.0".into()], vec!["long name".into(), "22.50".into()]]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()), "{t}");
        assert!(lines[2].starts_with("a "));
        assert!(lines[2].ends_with("  1.0"));
    }

    #[test]
    fn feature_names_are_displayed_in_table_notation() {
        assert_eq!(display_feature(Feature::ST.column_name()), "S(t)");
        assert_eq!(display_feature("noise"), "noise");
    }
}
