//! Log files to feature rows: parse, aggregate, compute sun positions, label
//! and join.

use std::collections::BTreeMap;
use std::io::{BufRead, Read};

use chrono::Duration;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ephemeris::EphemerisError;
use crate::features::{aggregate_minutes, build_rows, session_position, sun_positions_for, FeatureRow};
use crate::groundtruth::{minute_labels, parse_uv_csv, GroundTruthError, SunShade, UvSample};
use crate::minute::Minute;
use crate::nmea::{parse_log, ParseStats};
use crate::scenesim::SceneOutput;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{source_name}: {message}")]
    Input { source_name: String, message: String },
    #[error("{source_name}: no valid position fix")]
    NoFix { source_name: String },
    #[error("{source_name}: {source}")]
    Ephemeris {
        source_name: String,
        #[source]
        source: EphemerisError,
    },
    #[error("ground truth required: no UV samples")]
    NoGroundTruth,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub sessions: Vec<(String, ParseStats)>,
    pub observations: usize,
    pub aggregates: usize,
    pub uv_samples: usize,
    pub uv_skipped_rows: usize,
    pub labeled_minutes: usize,
    pub rows: usize,
    pub dropped_aggregates: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineOutput {
    pub rows: Vec<FeatureRow>,
    pub stats: PipelineStats,
}

pub struct LabelOptions {
    pub threshold: f64,
    pub clock_offset: Duration,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            threshold: crate::groundtruth::DEFAULT_SHADE_THRESHOLD,
            clock_offset: Duration::zero(),
        }
    }
}

/// Builds feature rows from named NMEA sessions and UV logs. Each NMEA
/// source is one stationary session whose position is the median of its
/// valid fixes.
pub fn rows_from_sources<N: BufRead, U: Read>(
    nmea: Vec<(String, N)>,
    uv: Vec<(String, U)>,
    options: &LabelOptions,
) -> Result<PipelineOutput, PipelineError> {
    let mut stats = PipelineStats::default();
    let mut samples: Vec<UvSample> = Vec::new();
    for (name, reader) in uv {
        let log = parse_uv_csv(reader).map_err(|e: GroundTruthError| PipelineError::Input {
            source_name: name.clone(),
            message: e.to_string(),
        })?;
        stats.uv_skipped_rows += log.skipped_rows;
        samples.extend(log.samples);
    }
    if samples.is_empty() {
        return Err(PipelineError::NoGroundTruth);
    }
    stats.uv_samples = samples.len();
    let labels = minute_labels(&samples, options.threshold, options.clock_offset);
    stats.labeled_minutes = labels.len();

    let mut rows = Vec::new();
    for (name, reader) in nmea {
        let log = parse_log(reader).map_err(|e| PipelineError::Input {
            source_name: name.clone(),
            message: e.to_string(),
        })?;
        let (lat, lon) = session_position(&log.fixes).ok_or_else(|| PipelineError::NoFix {
            source_name: name.clone(),
        })?;
        let aggregates = aggregate_minutes(&log.observations);
        let sun = sun_positions_for(&aggregates, lat, lon).map_err(|source| PipelineError::Ephemeris {
            source_name: name.clone(),
            source,
        })?;
        let built = build_rows(&aggregates, &sun, &labels);
        stats.observations += log.observations.len();
        stats.aggregates += aggregates.len();
        stats.dropped_aggregates += built.dropped;
        stats.sessions.push((name, log.stats));
        rows.extend(built.rows);
    }
    rows.sort_by(|a, b| (a.minute, a.sat).cmp(&(b.minute, b.sat)));
    stats.rows = rows.len();
    Ok(PipelineOutput { rows, stats })
}

/// Runs a simulated scene's logs through the full parsing pipeline.
pub fn rows_from_scene(scene: &SceneOutput, options: &LabelOptions) -> Result<PipelineOutput, PipelineError> {
    let nmea = scene
        .days
        .iter()
        .map(|d| (format!("{}/{}.nmea", scene.config.name, d.date), d.nmea.as_bytes()))
        .collect();
    let uv = scene
        .days
        .iter()
        .map(|d| (format!("{}/{}_uv.csv", scene.config.name, d.date), d.uv_csv.as_bytes()))
        .collect();
    rows_from_sources(nmea, uv, options)
}

/// Fraction of rows labeled sun.
pub fn sun_fraction(rows: &[FeatureRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().filter(|r| r.label == SunShade::Sun).count() as f64 / rows.len() as f64
}

pub fn label_counts(rows: &[FeatureRow]) -> BTreeMap<SunShade, usize> {
    let mut out = BTreeMap::new();
    for r in rows {
        *out.entry(r.label).or_insert(0) += 1;
    }
    out
}

pub fn minutes_of(rows: &[FeatureRow]) -> Vec<Minute> {
    let mut m: Vec<Minute> = rows.iter().map(|r| r.minute).collect();
    m.dedup();
    m
}
