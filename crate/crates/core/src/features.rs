//! Per-minute satellite aggregates and the 15-column feature rows built from
//! them, plus feature-set masks and z-score standardization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ephemeris::{solar_position, EphemerisError, SolarPosition};
use crate::groundtruth::SunShade;
use crate::matrix::Matrix;
use crate::minute::Minute;
use crate::nmea::{PositionFix, SatKey, SatObservation, Talker};

pub const NUM_FEATURES: usize = 15;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("invalid feature mask {0:?}: need at least one of A, B, C")]
    InvalidMask(String),
    #[error("feature CSV line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    /// Satellite azimuth and elevation.
    Sat,
    /// C/N0.
    Cn0,
    /// Sun azimuth and elevation.
    Sun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Offset {
    Now,
    Prev,
    Next,
}

/// The fifteen features in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Feature {
    ST,
    STm1,
    STp1,
    ASatT,
    ASatTm1,
    ASatTp1,
    ESatT,
    ESatTm1,
    ESatTp1,
    ASunT,
    ASunTm1,
    ASunTp1,
    ESunT,
    ESunTm1,
    ESunTp1,
}

impl Feature {
    pub const ALL: [Feature; NUM_FEATURES] = [
        Feature::ST,
        Feature::STm1,
        Feature::STp1,
        Feature::ASatT,
        Feature::ASatTm1,
        Feature::ASatTp1,
        Feature::ESatT,
        Feature::ESatTm1,
        Feature::ESatTp1,
        Feature::ASunT,
        Feature::ASunTm1,
        Feature::ASunTp1,
        Feature::ESunT,
        Feature::ESunTm1,
        Feature::ESunTp1,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn column_name(self) -> &'static str {
        COLUMN_NAMES[self.index()]
    }

    /// Human-readable name such as `S(t-1)` or `E_SUN(t)`.
    pub fn display_name(self) -> String {
        let quantity = match self.index() / 3 {
            0 => "S",
            1 => "A_SAT",
            2 => "E_SAT",
            3 => "A_SUN",
            _ => "E_SUN",
        };
        let t = match self.offset() {
            Offset::Now => "t",
            Offset::Prev => "t-1",
            Offset::Next => "t+1",
        };
        format!("{quantity}({t})")
    }

    pub fn set(self) -> FeatureSet {
        match self.index() / 3 {
            0 => FeatureSet::Cn0,
            1 | 2 => FeatureSet::Sat,
            _ => FeatureSet::Sun,
        }
    }

    pub fn offset(self) -> Offset {
        match self.index() % 3 {
            0 => Offset::Now,
            1 => Offset::Prev,
            _ => Offset::Next,
        }
    }

    pub fn from_column_name(name: &str) -> Option<Feature> {
        COLUMN_NAMES.iter().position(|c| *c == name).map(|i| Feature::ALL[i])
    }
}

const COLUMN_NAMES: [&str; NUM_FEATURES] = [
    "s_t", "s_tm1", "s_tp1", "a_sat_t", "a_sat_tm1", "a_sat_tp1", "e_sat_t", "e_sat_tm1",
    "e_sat_tp1", "a_sun_t", "a_sun_tm1", "a_sun_tp1", "e_sun_t", "e_sun_tm1", "e_sun_tp1",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinuteSatAggregate {
    pub minute: Minute,
    pub sat: SatKey,
    pub mean_cn0_dbhz: f64,
    pub mean_azimuth_deg: f64,
    pub mean_elevation_deg: f64,
    pub sample_count: usize,
}

/// Mean direction of a set of azimuths, in [0, 360). Returns `None` when the
/// unit vectors cancel out.
pub fn circular_mean_deg(angles: &[f64]) -> Option<f64> {
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| {
        let r = a.to_radians();
        (s + r.sin(), c + r.cos())
    });
    if s.hypot(c) < 1e-9 * angles.len().max(1) as f64 {
        return None;
    }
    let deg = s.atan2(c).to_degrees().rem_euclid(360.0);
    // snap values that round to the wrap point
    Some(if deg >= 360.0 - 1e-9 { 0.0 } else { deg })
}

/// Groups observations by (minute, satellite). Observations without C/N0 are
/// ignored. Output is sorted by satellite, then minute.
pub fn aggregate_minutes(observations: &[SatObservation]) -> Vec<MinuteSatAggregate> {
    let mut groups: BTreeMap<(SatKey, Minute), Vec<&SatObservation>> = BTreeMap::new();
    for o in observations.iter().filter(|o| o.cn0_dbhz.is_some()) {
        groups
            .entry((o.key(), Minute::containing(o.timestamp_utc)))
            .or_default()
            .push(o);
    }
    groups
        .into_iter()
        .map(|((sat, minute), obs)| {
            let n = obs.len() as f64;
            let azimuths: Vec<f64> = obs.iter().map(|o| o.azimuth_deg).collect();
            MinuteSatAggregate {
                minute,
                sat,
                mean_cn0_dbhz: obs.iter().map(|o| o.cn0_dbhz.unwrap_or(0.0)).sum::<f64>() / n,
                // opposing directions have no mean; fall back to the first sample
                mean_azimuth_deg: circular_mean_deg(&azimuths).unwrap_or(azimuths[0]),
                mean_elevation_deg: obs.iter().map(|o| o.elevation_deg).sum::<f64>() / n,
                sample_count: obs.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub minute: Minute,
    pub sat: SatKey,
    /// Indexed by [`Feature::index`].
    pub values: [f64; NUM_FEATURES],
    pub label: SunShade,
}

impl FeatureRow {
    pub fn get(&self, f: Feature) -> f64 {
        self.values[f.index()]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuiltRows {
    pub rows: Vec<FeatureRow>,
    /// Aggregates lacking a neighbour minute, a label or a sun position.
    pub dropped: usize,
}

pub fn build_rows(
    aggregates: &[MinuteSatAggregate],
    sun_positions: &BTreeMap<Minute, SolarPosition>,
    labels: &BTreeMap<Minute, SunShade>,
) -> BuiltRows {
    let index: HashMap<(SatKey, Minute), &MinuteSatAggregate> =
        aggregates.iter().map(|a| ((a.sat, a.minute), a)).collect();
    let mut out = BuiltRows::default();
    for a in aggregates {
        let t = a.minute;
        let row = (|| {
            let prev = index.get(&(a.sat, t.prev()))?;
            let next = index.get(&(a.sat, t.next()))?;
            let label = *labels.get(&t)?;
            let sun = [sun_positions.get(&t)?, sun_positions.get(&t.prev())?, sun_positions.get(&t.next())?];
            let sat = [a, *prev, *next];
            let mut values = [0.0; NUM_FEATURES];
            for k in 0..3 {
                values[k] = sat[k].mean_cn0_dbhz;
                values[3 + k] = sat[k].mean_azimuth_deg;
                values[6 + k] = sat[k].mean_elevation_deg;
                values[9 + k] = sun[k].azimuth_deg;
                values[12 + k] = sun[k].elevation_deg;
            }
            Some(FeatureRow { minute: t, sat: a.sat, values, label })
        })();
        match row {
            Some(r) => out.rows.push(r),
            None => out.dropped += 1,
        }
    }
    out.rows.sort_by(|x, y| (x.minute, x.sat).cmp(&(y.minute, y.sat)));
    out
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Median latitude and longitude of the valid fixes.
pub fn session_position(fixes: &[PositionFix]) -> Option<(f64, f64)> {
    let valid = fixes.iter().filter(|f| f.valid);
    let (mut lats, mut lons): (Vec<f64>, Vec<f64>) = valid
        .filter_map(|f| Some((f.latitude_deg?, f.longitude_deg?)))
        .unzip();
    Some((median(&mut lats)?, median(&mut lons)?))
}

/// Sun positions at the start of every minute covered by the aggregates and
/// their neighbours.
pub fn sun_positions_for(
    aggregates: &[MinuteSatAggregate],
    latitude_deg: f64,
    longitude_deg: f64,
) -> Result<BTreeMap<Minute, SolarPosition>, EphemerisError> {
    let mut out = BTreeMap::new();
    for a in aggregates {
        for m in [a.minute.prev(), a.minute, a.minute.next()] {
            if !out.contains_key(&m) {
                out.insert(m, solar_position(latitude_deg, longitude_deg, m.start())?);
            }
        }
    }
    Ok(out)
}

/// Which feature sets a model sees. `D` adds the t-1 and t+1 variants of the
/// selected base sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureSetMask {
    pub include_sat: bool,
    pub include_cn0: bool,
    pub include_sun: bool,
    pub include_delta: bool,
}

impl FeatureSetMask {
    pub const ALL: FeatureSetMask = FeatureSetMask {
        include_sat: true,
        include_cn0: true,
        include_sun: true,
        include_delta: true,
    };

    pub fn new(sat: bool, cn0: bool, sun: bool, delta: bool) -> Result<Self, FeatureError> {
        let m = FeatureSetMask {
            include_sat: sat,
            include_cn0: cn0,
            include_sun: sun,
            include_delta: delta,
        };
        if sat || cn0 || sun {
            Ok(m)
        } else {
            Err(FeatureError::InvalidMask(m.code()))
        }
    }

    /// Four-character code, e.g. `AB-D`.
    pub fn code(&self) -> String {
        [
            (self.include_sat, 'A'),
            (self.include_cn0, 'B'),
            (self.include_sun, 'C'),
            (self.include_delta, 'D'),
        ]
        .iter()
        .map(|&(on, c)| if on { c } else { '-' })
        .collect()
    }

    /// The 14 valid masks: the 7 base-set subsets without D, then with D.
    pub fn all_valid() -> Vec<FeatureSetMask> {
        let mut out = Vec::with_capacity(14);
        for delta in [false, true] {
            for bits in [0b100u8, 0b010, 0b001, 0b110, 0b101, 0b011, 0b111] {
                out.push(
                    FeatureSetMask::new(bits & 0b100 != 0, bits & 0b010 != 0, bits & 0b001 != 0, delta)
                        .expect("non-empty"),
                );
            }
        }
        out
    }

    pub fn includes(&self, f: Feature) -> bool {
        let base = match f.set() {
            FeatureSet::Sat => self.include_sat,
            FeatureSet::Cn0 => self.include_cn0,
            FeatureSet::Sun => self.include_sun,
        };
        base && (self.include_delta || f.offset() == Offset::Now)
    }

    /// Selected features in CSV column order.
    pub fn features(&self) -> Vec<Feature> {
        Feature::ALL.into_iter().filter(|f| self.includes(*f)).collect()
    }
}

impl fmt::Display for FeatureSetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl FromStr for FeatureSetMask {
    type Err = FeatureError;

    /// Accepts the positional code (`A-C-`) or the bare letters (`AC`, `abcd`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || FeatureError::InvalidMask(s.to_string());
        let upper = s.to_ascii_uppercase();
        let mut flags = [false; 4];
        if upper.len() == 4 && upper.contains('-') {
            for (i, c) in upper.chars().enumerate() {
                match c {
                    '-' => {}
                    c if c == "ABCD".as_bytes()[i] as char => flags[i] = true,
                    _ => return Err(bad()),
                }
            }
        } else {
            for c in upper.chars() {
                let i = "ABCD".find(c).ok_or_else(bad)?;
                if flags[i] {
                    return Err(bad());
                }
                flags[i] = true;
            }
        }
        FeatureSetMask::new(flags[0], flags[1], flags[2], flags[3]).map_err(|_| bad())
    }
}

impl Serialize for FeatureSetMask {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.code())
    }
}

impl<'de> Deserialize<'de> for FeatureSetMask {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Feature matrix for the masked columns plus their names.
pub fn apply_mask(rows: &[FeatureRow], mask: FeatureSetMask) -> (Matrix, Vec<String>) {
    let features = mask.features();
    let mut data = Vec::with_capacity(rows.len() * features.len());
    for r in rows {
        data.extend(features.iter().map(|f| r.get(*f)));
    }
    let names = features.iter().map(|f| f.column_name().to_string()).collect();
    (Matrix::new(rows.len(), features.len(), data), names)
}

pub fn labels_of(rows: &[FeatureRow]) -> Vec<SunShade> {
    rows.iter().map(|r| r.label).collect()
}

/// Per-column z-score parameters. A column whose standard deviation is below
/// 1e-12 is mapped to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

const MIN_STD: f64 = 1e-12;

impl Standardizer {
    /// Population mean and standard deviation of each column.
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.nrows().max(1) as f64;
        let d = x.ncols();
        let mut means = vec![0.0; d];
        for row in x.rows_iter() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for row in x.rows_iter() {
            for j in 0..d {
                vars[j] += (row[j] - means[j]).powi(2);
            }
        }
        let stds = vars.into_iter().map(|v| (v / n).sqrt()).collect();
        Standardizer { means, stds }
    }

    /// Identity transform for `d` columns.
    pub fn identity(d: usize) -> Standardizer {
        Standardizer {
            means: vec![0.0; d],
            stds: vec![1.0; d],
        }
    }

    pub fn apply_row(&self, row: &[f64], out: &mut [f64]) {
        for j in 0..row.len() {
            out[j] = if self.stds[j] < MIN_STD {
                0.0
            } else {
                (row[j] - self.means[j]) / self.stds[j]
            };
        }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.nrows(), x.ncols());
        for i in 0..x.nrows() {
            self.apply_row(x.row(i), out.row_mut(i));
        }
        out
    }
}

pub fn standardize_fit(x: &Matrix) -> Standardizer {
    Standardizer::fit(x)
}

pub fn standardize_apply(x: &Matrix, stats: &Standardizer) -> Matrix {
    stats.apply(x)
}

pub fn feature_csv_header() -> Vec<&'static str> {
    let mut h = vec!["minute_utc", "talker", "svid"];
    h.extend(COLUMN_NAMES);
    h.push("label");
    h
}

pub fn write_feature_csv<W: Write>(out: W, rows: &[FeatureRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(feature_csv_header())?;
    for r in rows {
        let mut rec = vec![r.minute.to_string(), r.sat.talker.to_string(), r.sat.svid.to_string()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        rec.push(r.label.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<FeatureRow>, FeatureError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let to_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(io) => FeatureError::Io(io),
            kind => FeatureError::Csv {
                line,
                message: format!("{kind:?}"),
            },
        }
    };
    let header = reader.headers().map_err(to_err)?.clone();
    let expected = feature_csv_header();
    if header.iter().ne(expected.iter().copied()) {
        return Err(FeatureError::Csv {
            line: 1,
            message: format!("expected header {}", expected.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(to_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let fail = |message: String| FeatureError::Csv { line, message };
        let minute: Minute = rec[0].parse().map_err(|e| fail(format!("minute: {e}")))?;
        let talker = Talker::new(&rec[1]).ok_or_else(|| fail(format!("talker {:?}", &rec[1])))?;
        let svid: u16 = rec[2].parse().map_err(|e| fail(format!("svid: {e}")))?;
        let mut values = [0.0; NUM_FEATURES];
        for (j, v) in values.iter_mut().enumerate() {
            *v = rec[3 + j]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| fail(format!("{}: {:?}", COLUMN_NAMES[j], &rec[3 + j])))?;
        }
        let label: SunShade = rec[3 + NUM_FEATURES].parse().map_err(fail)?;
        rows.push(FeatureRow {
            minute,
            sat: SatKey { talker, svid },
            values,
            label,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{DateTime, Duration, Utc};
    use proptest::prelude::*;

    fn t0() -> DateTime<Utc> {
        "2021-09-21T10:00:00Z".parse().unwrap()
    }

    fn obs(svid: u16, secs: i64, az: f64, el: f64, cn0: Option<f64>) -> SatObservation {
        SatObservation {
            talker: Talker::new("GP").unwrap(),
            svid,
            elevation_deg: el,
            azimuth_deg: az,
            cn0_dbhz: cn0,
            timestamp_utc: t0() + Duration::seconds(secs),
        }
    }

    #[test]
    fn aggregates_mean_per_minute() {
        let o = [
            obs(1, 0, 10.0, 30.0, Some(44.0)),
            obs(1, 20, 12.0, 31.0, Some(46.0)),
            obs(1, 40, 14.0, 32.0, Some(48.0)),
            obs(1, 50, 90.0, 80.0, None),
        ];
        let a = aggregate_minutes(&o);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].mean_cn0_dbhz, 46.0);
        assert_eq!(a[0].sample_count, 3);
        assert!((a[0].mean_elevation_deg - 31.0).abs() < 1e-12);
        assert!((a[0].mean_azimuth_deg - 12.0).abs() < 1e-9);
    }

    #[test]
    fn azimuth_mean_wraps() {
        assert_eq!(circular_mean_deg(&[359.0, 1.0]), Some(0.0));
        let m = circular_mean_deg(&[350.0, 20.0]).unwrap();
        assert!((m - 5.0).abs() < 1e-9);
        assert_eq!(circular_mean_deg(&[0.0, 180.0]), None);
    }

    #[test]
    fn observation_without_cn0_contributes_nothing() {
        assert!(aggregate_minutes(&[obs(3, 0, 1.0, 1.0, None)]).is_empty());
    }

    fn visible(svid: u16, minutes: std::ops::Range<i64>) -> Vec<SatObservation> {
        minutes
            .map(|m| obs(svid, m * 60, 100.0 + m as f64, 40.0, Some(40.0 + m as f64)))
            .collect()
    }

    fn sun_and_labels(minutes: std::ops::Range<i64>) -> (BTreeMap<Minute, SolarPosition>, BTreeMap<Minute, SunShade>) {
        let base = Minute::containing(t0());
        let sun = minutes
            .clone()
            .map(|m| {
                let p = SolarPosition {
                    azimuth_deg: 150.0 + m as f64 * 0.25,
                    elevation_deg: 50.0,
                };
                (Minute(base.0 + m), p)
            })
            .collect();
        let labels = minutes.map(|m| (Minute(base.0 + m), SunShade::Sun)).collect();
        (sun, labels)
    }

    #[test]
    fn boundary_minutes_are_dropped() {
        let a = aggregate_minutes(&visible(7, 0..6));
        let (sun, labels) = sun_and_labels(-5..20);
        let built = build_rows(&a, &sun, &labels);
        let minutes: Vec<String> = built.rows.iter().map(|r| r.minute.to_string()).collect();
        assert_eq!(
            minutes,
            ["2021-09-21T10:01:00Z", "2021-09-21T10:02:00Z", "2021-09-21T10:03:00Z", "2021-09-21T10:04:00Z"]
        );
        assert_eq!(built.dropped, 2);
        let r = &built.rows[0];
        assert_eq!((r.get(Feature::ST), r.get(Feature::STm1), r.get(Feature::STp1)), (41.0, 40.0, 42.0));
        assert_eq!(r.get(Feature::ASunTp1), 150.5);
    }

    #[test]
    fn minute_without_label_has_no_rows() {
        let a = aggregate_minutes(&visible(7, 0..6));
        let (sun, mut labels) = sun_and_labels(-5..20);
        labels.remove(&Minute(Minute::containing(t0()).0 + 2));
        let built = build_rows(&a, &sun, &labels);
        assert_eq!(built.rows.len(), 3);
        assert!(built.rows.iter().all(|r| r.minute.0 != Minute::containing(t0()).0 + 2));
    }

    #[test]
    fn full_day_row_count() {
        // 13 satellites over 722 minutes leaves 720 labeled interior minutes each
        let mut o = Vec::new();
        for svid in 1..=13 {
            o.extend(visible(svid, 0..722));
        }
        let a = aggregate_minutes(&o);
        let (sun, labels) = sun_and_labels(-1..723);
        assert_eq!(build_rows(&a, &sun, &labels).rows.len(), 13 * 720);
    }

    fn mask(code: &str) -> FeatureSetMask {
        code.parse().unwrap()
    }

    #[test]
    fn mask_column_counts() {
        let row = FeatureRow {
            minute: Minute(0),
            sat: SatKey {
                talker: Talker::new("GP").unwrap(),
                svid: 1,
            },
            values: std::array::from_fn(|i| i as f64),
            label: SunShade::Sun,
        };
        let (x, names) = apply_mask(std::slice::from_ref(&row), mask("-B--"));
        assert_eq!(names, ["s_t"]);
        assert_eq!(x.row(0), &[0.0]);
        assert_eq!(apply_mask(std::slice::from_ref(&row), mask("ABCD")).1.len(), 15);
        let (_, ac) = apply_mask(std::slice::from_ref(&row), mask("A-C-"));
        assert_eq!(ac, ["a_sat_t", "e_sat_t", "a_sun_t", "e_sun_t"]);
        let (_, bd) = apply_mask(std::slice::from_ref(&row), mask("-B-D"));
        assert_eq!(bd, ["s_t", "s_tm1", "s_tp1"]);
    }

    #[test]
    fn mask_codes() {
        assert!("---D".parse::<FeatureSetMask>().is_err());
        assert!("----".parse::<FeatureSetMask>().is_err());
        assert!("".parse::<FeatureSetMask>().is_err());
        assert!("AA".parse::<FeatureSetMask>().is_err());
        assert!("B-C-".parse::<FeatureSetMask>().is_err());
        assert_eq!(mask("abd").code(), "AB-D");
        let all = FeatureSetMask::all_valid();
        assert_eq!(all.len(), 14);
        let unique: std::collections::BTreeSet<_> = all.iter().map(|m| m.code()).collect();
        assert_eq!(unique.len(), 14);
        for m in &all {
            assert_eq!(m.code().parse::<FeatureSetMask>().unwrap(), *m);
            let per_set = 2 * m.include_sat as usize + m.include_cn0 as usize + 2 * m.include_sun as usize;
            let factor = if m.include_delta { 3 } else { 1 };
            assert_eq!(m.features().len(), per_set * factor);
        }
    }

    #[test]
    fn standardize_two_points() {
        let x = Matrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        let s = standardize_fit(&x);
        assert_eq!(s.means, [2.0, 5.0]);
        assert_eq!(s.stds[0], 1.0);
        let z = standardize_apply(&x, &s);
        assert_eq!(z.column(0), [-1.0, 1.0]);
        assert_eq!(z.column(1), [0.0, 0.0]);
        // test data uses the training statistics
        let test = Matrix::from_rows(&[vec![10.0, 7.0]]);
        assert_eq!(standardize_apply(&test, &s).row(0), &[8.0, 0.0]);
    }

    #[test]
    fn session_position_is_median_of_valid_fixes() {
        let fix = |lat: f64, lon: f64, valid: bool| PositionFix {
            timestamp_utc: t0(),
            latitude_deg: Some(lat),
            longitude_deg: Some(lon),
            valid,
        };
        let fixes = [fix(35.0, 139.0, true), fix(80.0, 0.0, true), fix(35.1, 139.1, true), fix(0.0, 0.0, false)];
        assert_eq!(session_position(&fixes), Some((35.1, 139.0)));
        assert_eq!(session_position(&fixes[3..]), None);
    }

    #[test]
    fn feature_csv_round_trip() {
        let a = aggregate_minutes(&visible(7, 0..6));
        let (sun, labels) = sun_and_labels(-5..20);
        let rows = build_rows(&a, &sun, &labels).rows;
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "minute_utc,talker,svid,s_t,s_tm1,s_tp1,a_sat_t,a_sat_tm1,a_sat_tp1,e_sat_t,e_sat_tm1,\
             e_sat_tp1,a_sun_t,a_sun_tm1,a_sun_tp1,e_sun_t,e_sun_tm1,e_sun_tp1,label\n"
        ));
        assert_eq!(read_feature_csv(&buf[..]).unwrap(), rows);
        assert!(read_feature_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn display_names() {
        assert_eq!(Feature::ST.display_name(), "S(t)");
        assert_eq!(Feature::ESunTm1.display_name(), "E_SUN(t-1)");
        assert_eq!(Feature::from_column_name("a_sun_tp1"), Some(Feature::ASunTp1));
    }

    proptest! {
        #[test]
        fn rows_are_finite_and_temporally_consistent(
            cn0 in proptest::collection::vec(20.0f64..55.0, 3..40),
            start_az in 0.0f64..360.0,
        ) {
            let o: Vec<SatObservation> = cn0
                .iter()
                .enumerate()
                .map(|(m, &c)| obs(4, m as i64 * 60 + 5, (start_az + m as f64 * 0.7) % 360.0, 45.0, Some(c)))
                .collect();
            let a = aggregate_minutes(&o);
            let (sun, labels) = sun_and_labels(-2..50);
            let rows = build_rows(&a, &sun, &labels).rows;
            prop_assert_eq!(rows.len(), cn0.len() - 2);
            for r in &rows {
                prop_assert!(r.values.iter().all(|v| v.is_finite()));
            }
            for w in rows.windows(2) {
                prop_assert_eq!(w[0].get(Feature::STp1), w[1].get(Feature::ST));
                prop_assert_eq!(w[1].get(Feature::STm1), w[0].get(Feature::ST));
            }
        }

        #[test]
        fn aggregate_means_within_range(values in proptest::collection::vec((20.0f64..55.0, 0.0f64..90.0), 1..20)) {
            let o: Vec<SatObservation> = values
                .iter()
                .enumerate()
                .map(|(i, &(c, e))| obs(9, i as i64, 100.0, e, Some(c)))
                .collect();
            let a = aggregate_minutes(&o);
            prop_assert_eq!(a.len(), 1);
            let lo = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
            let hi = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(a[0].mean_cn0_dbhz >= lo - 1e-9 && a[0].mean_cn0_dbhz <= hi + 1e-9);
            prop_assert!((a[0].mean_azimuth_deg - 100.0).abs() < 1e-9);
        }
    }
}
