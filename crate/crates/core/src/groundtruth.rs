//! UV-sensor ground truth: CSV ingestion, per-minute UV Index averaging and
//! the sun/shade threshold.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minute::{format_utc, parse_utc, Minute};

/// Minute-mean UV Index below this value is shade.
pub const DEFAULT_SHADE_THRESHOLD: f64 = 0.35;

pub const UV_CSV_HEADER: [&str; 4] = ["timestamp", "uva", "uvb", "uvi"];

#[derive(Debug, Error)]
pub enum GroundTruthError {
    #[error("I/O error reading UV log: {0}")]
    Io(#[from] std::io::Error),
    #[error("UV log header must contain columns timestamp,uva,uvb,uvi")]
    MissingHeader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SunShade {
    // declaration order matches the lexicographic order of the text labels
    Shade,
    Sun,
}

impl SunShade {
    pub fn as_str(self) -> &'static str {
        match self {
            SunShade::Shade => "shade",
            SunShade::Sun => "sun",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SunShade::Shade => SunShade::Sun,
            SunShade::Sun => SunShade::Shade,
        }
    }
}

impl fmt::Display for SunShade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SunShade {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "sun" => Ok(SunShade::Sun),
            "shade" => Ok(SunShade::Shade),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvSample {
    pub timestamp_utc: DateTime<Utc>,
    pub uva: f64,
    pub uvb: f64,
    pub uvi: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UvLog {
    pub samples: Vec<UvSample>,
    pub skipped_rows: usize,
}

fn parse_value(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_uv_csv<R: Read>(input: R) -> Result<UvLog, GroundTruthError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => GroundTruthError::Io(io),
        _ => GroundTruthError::MissingHeader,
    })?;
    let column = |name: &str| header.iter().position(|h| h == name);
    let (Some(ts), Some(uva), Some(uvb), Some(uvi)) =
        (column("timestamp"), column("uva"), column("uvb"), column("uvi"))
    else {
        return Err(GroundTruthError::MissingHeader);
    };

    let mut log = UvLog::default();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => match e.into_kind() {
                csv::ErrorKind::Io(io) => return Err(GroundTruthError::Io(io)),
                _ => {
                    log.skipped_rows += 1;
                    continue;
                }
            },
        };
        let sample = (|| {
            Some(UvSample {
                timestamp_utc: parse_utc(record.get(ts)?)?,
                uva: parse_value(record.get(uva)?)?,
                uvb: parse_value(record.get(uvb)?)?,
                uvi: parse_value(record.get(uvi)?).filter(|v| *v >= 0.0)?,
            })
        })();
        match sample {
            Some(s) => log.samples.push(s),
            None => log.skipped_rows += 1,
        }
    }
    Ok(log)
}

pub fn write_uv_csv<W: Write>(out: W, samples: &[UvSample]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(UV_CSV_HEADER)?;
    for s in samples {
        w.write_record([
            format_utc(s.timestamp_utc),
            s.uva.to_string(),
            s.uvb.to_string(),
            s.uvi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean UV Index per minute. Minutes without samples are absent.
pub fn minute_uvi(samples: &[UvSample]) -> BTreeMap<Minute, f64> {
    let mut sums: BTreeMap<Minute, (f64, usize)> = BTreeMap::new();
    for s in samples {
        let e = sums.entry(Minute::containing(s.timestamp_utc)).or_default();
        e.0 += s.uvi;
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(m, (sum, n))| (m, sum / n as f64))
        .collect()
}

/// Shade iff `uvi < threshold`; the boundary value itself is sun.
pub fn label_with_threshold(uvi: f64, threshold: f64) -> SunShade {
    if uvi < threshold {
        SunShade::Shade
    } else {
        SunShade::Sun
    }
}

pub fn label(uvi: f64) -> SunShade {
    label_with_threshold(uvi, DEFAULT_SHADE_THRESHOLD)
}

/// Per-minute labels after shifting the UV clock by `clock_offset` onto the
/// GNSS clock.
pub fn minute_labels(
    samples: &[UvSample],
    threshold: f64,
    clock_offset: Duration,
) -> BTreeMap<Minute, SunShade> {
    let shifted: Vec<UvSample> = samples
        .iter()
        .map(|s| UvSample {
            timestamp_utc: s.timestamp_utc + clock_offset,
            ..*s
        })
        .collect();
    minute_uvi(&shifted)
        .into_iter()
        .map(|(m, uvi)| (m, label_with_threshold(uvi, threshold)))
        .collect()
}
