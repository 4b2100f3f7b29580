//! Synthetic scenes with known ground truth: satellite arcs, occluders that
//! block both sunlight and satellite signals, and the NMEA and UV logs a
//! receiver and UV sensor would record.
//!
//! The receiver alternates between an open-sky spot and a sheltered spot
//! beside the occluders (`shelter_dwell_minutes`). Without a dwell schedule
//! it stays sheltered for the whole session.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Timelike, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ephemeris::solar_position;
use crate::groundtruth::{self, SunShade, UvSample, DEFAULT_SHADE_THRESHOLD};
use crate::minute::Minute;
use crate::nmea::{frame, SatKey, SatObservation, Talker};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot parse scene config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DayWindow {
    pub date: NaiveDate,
    /// UTC hours since midnight.
    pub start_hour: f64,
    pub end_hour: f64,
}

impl DayWindow {
    pub fn start(&self) -> DateTime<Utc> {
        self.date.and_hms_opt(0, 0, 0).expect("midnight").and_utc()
            + Duration::seconds((self.start_hour * 3600.0).round() as i64)
    }

    pub fn minutes(&self) -> usize {
        ((self.end_hour - self.start_hour) * 60.0).round() as usize
    }
}

/// Blocks directions with azimuth in `[azimuth_min_deg, azimuth_max_deg]`
/// (wrapping through north when min > max) and elevation below the mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occluder {
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub elevation_mask_deg: f64,
}

impl Occluder {
    pub fn blocks(&self, azimuth_deg: f64, elevation_deg: f64) -> bool {
        let in_range = if self.azimuth_min_deg <= self.azimuth_max_deg {
            (self.azimuth_min_deg..=self.azimuth_max_deg).contains(&azimuth_deg)
        } else {
            azimuth_deg >= self.azimuth_min_deg || azimuth_deg <= self.azimuth_max_deg
        };
        in_range && elevation_deg < self.elevation_mask_deg
    }
}

pub fn occluded(occluders: &[Occluder], azimuth_deg: f64, elevation_deg: f64) -> bool {
    occluders.iter().any(|o| o.blocks(azimuth_deg, elevation_deg))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub days: Vec<DayWindow>,
    pub occluders: Vec<Occluder>,
    /// Inclusive range of segment lengths for the open/sheltered schedule.
    pub shelter_dwell_minutes: Option<(u32, u32)>,
    pub n_satellites: usize,
    /// Satellites below this elevation are not reported.
    pub elevation_cutoff_deg: f64,
    pub pass_hours: (f64, f64),
    pub gap_hours: (f64, f64),
    /// Unobstructed C/N0 at the zenith.
    pub cn0_base_dbhz: f64,
    /// Fraction of `cn0_base_dbhz` left at the horizon.
    pub cn0_horizon_fraction: f64,
    pub cn0_attenuation_dbhz: f64,
    pub cn0_noise_std: f64,
    pub uvi_peak: f64,
    pub uvi_shade_factor: f64,
    pub uvi_noise_std: f64,
    pub shade_threshold: f64,
    pub seed: u64,
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, "must be finite"))
            }
        };
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(invalid("name", "must be non-empty ASCII letters, digits, '-' or '_'"));
        }
        finite("latitude_deg", self.latitude_deg)?;
        finite("longitude_deg", self.longitude_deg)?;
        if self.latitude_deg.abs() > 90.0 {
            return Err(invalid("latitude_deg", "must be within [-90, 90]"));
        }
        if self.longitude_deg.abs() > 180.0 {
            return Err(invalid("longitude_deg", "must be within [-180, 180]"));
        }
        if self.days.is_empty() {
            return Err(invalid("days", "at least one day is required"));
        }
        for (i, d) in self.days.iter().enumerate() {
            if !(0.0..24.0).contains(&d.start_hour) || !(d.start_hour < d.end_hour && d.end_hour <= 24.0) {
                return Err(invalid(format!("days[{i}]"), "need 0 <= start_hour < end_hour <= 24"));
            }
        }
        let mut dates: Vec<_> = self.days.iter().map(|d| d.date).collect();
        dates.sort();
        dates.dedup();
        if dates.len() != self.days.len() {
            return Err(invalid("days", "dates must be distinct"));
        }
        for (i, o) in self.occluders.iter().enumerate() {
            let field = format!("occluders[{i}]");
            if !(0.0..=90.0).contains(&o.elevation_mask_deg) {
                return Err(invalid(field, "elevation_mask_deg must be within [0, 90]"));
            }
            if !(0.0..=360.0).contains(&o.azimuth_min_deg) || !(0.0..=360.0).contains(&o.azimuth_max_deg) {
                return Err(invalid(field, "azimuths must be within [0, 360]"));
            }
        }
        if let Some((lo, hi)) = self.shelter_dwell_minutes {
            if lo == 0 || lo > hi {
                return Err(invalid("shelter_dwell_minutes", "need 1 <= min <= max"));
            }
        }
        if self.n_satellites == 0 || self.n_satellites > 90 {
            return Err(invalid("n_satellites", "must be within [1, 90]"));
        }
        if !(0.0..90.0).contains(&self.elevation_cutoff_deg) {
            return Err(invalid("elevation_cutoff_deg", "must be within [0, 90)"));
        }
        for (name, (lo, hi)) in [("pass_hours", self.pass_hours), ("gap_hours", self.gap_hours)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(invalid(name, "need 0 < min <= max"));
            }
        }
        for (name, v) in [
            ("cn0_base_dbhz", self.cn0_base_dbhz),
            ("cn0_attenuation_dbhz", self.cn0_attenuation_dbhz),
            ("cn0_noise_std", self.cn0_noise_std),
            ("uvi_peak", self.uvi_peak),
            ("uvi_noise_std", self.uvi_noise_std),
            ("shade_threshold", self.shade_threshold),
        ] {
            finite(name, v)?;
            if v < 0.0 {
                return Err(invalid(name, "must be non-negative"));
            }
        }
        if !(0.0..=1.0).contains(&self.cn0_horizon_fraction) {
            return Err(invalid("cn0_horizon_fraction", "must be within [0, 1]"));
        }
        if !(self.uvi_shade_factor > 0.0 && self.uvi_shade_factor < 1.0) {
            return Err(invalid("uvi_shade_factor", "must be within (0, 1)"));
        }
        if self.uvi_peak * self.uvi_shade_factor >= self.shade_threshold {
            return Err(invalid(
                "uvi_shade_factor",
                "shaded UVI at peak sun must stay below shade_threshold",
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<SceneConfig, ConfigError> {
        let cfg: SceneConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn base_config(name: &str, seed: u64) -> SceneConfig {
    SceneConfig {
        name: name.to_string(),
        latitude_deg: 36.05,
        longitude_deg: 0.42,
        days: Vec::new(),
        occluders: Vec::new(),
        shelter_dwell_minutes: Some((3, 30)),
        n_satellites: 18,
        elevation_cutoff_deg: 5.0,
        pass_hours: (4.0, 7.0),
        gap_hours: (3.0, 8.0),
        cn0_base_dbhz: 48.0,
        cn0_horizon_fraction: 0.7,
        cn0_attenuation_dbhz: 12.0,
        cn0_noise_std: 2.0,
        uvi_peak: 7.0,
        uvi_shade_factor: 0.04,
        uvi_noise_std: 0.02,
        shade_threshold: DEFAULT_SHADE_THRESHOLD,
        seed,
    }
}

fn window(date: &str, start_hour: f64, end_hour: f64) -> DayWindow {
    DayWindow {
        date: date.parse().expect("valid date literal"),
        start_hour,
        end_hour,
    }
}

/// Scene A: four 12-hour summer days beside a wall-and-canopy shelter open to
/// the north. Scene B: one day at a nearby site with a differently shaped
/// shelter.
pub fn default_scenes() -> (SceneConfig, SceneConfig) {
    let mut a = base_config("scene-a", 42);
    a.days = ["2021-07-05", "2021-07-07", "2021-07-09", "2021-07-12"]
        .iter()
        .map(|d| window(d, 6.0, 18.0))
        .collect();
    a.occluders = vec![Occluder {
        azimuth_min_deg: 10.0,
        azimuth_max_deg: 350.0,
        elevation_mask_deg: 80.0,
    }];

    let mut b = base_config("scene-b", 4242);
    b.latitude_deg = 36.0518;
    b.longitude_deg = 0.4210;
    b.days = vec![window("2021-07-20", 6.5, 17.5)];
    b.occluders = vec![
        Occluder {
            azimuth_min_deg: 20.0,
            azimuth_max_deg: 170.0,
            elevation_mask_deg: 72.0,
        },
        Occluder {
            azimuth_min_deg: 170.0,
            azimuth_max_deg: 250.0,
            elevation_mask_deg: 85.0,
        },
        Occluder {
            azimuth_min_deg: 250.0,
            azimuth_max_deg: 340.0,
            elevation_mask_deg: 72.0,
        },
    ];
    b.shelter_dwell_minutes = Some((5, 25));
    (a, b)
}

pub fn builtin_scene(name: &str) -> Option<SceneConfig> {
    let (a, b) = default_scenes();
    match name {
        "default-a" | "scene-a" | "a" => Some(a),
        "default-b" | "scene-b" | "b" => Some(b),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinuteTruth {
    pub minute: Minute,
    pub sheltered: bool,
    pub sun_occluded: bool,
    /// Clear-sky UVI at mid-minute reaches the shade threshold.
    pub daylight: bool,
    pub label: SunShade,
    pub occluded_satellites: Vec<SatKey>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub minutes: Vec<MinuteTruth>,
}

pub const TRUTH_CSV_HEADER: [&str; 3] = ["minute_utc", "sun_occluded", "label"];

impl SceneTruth {
    pub fn to_csv(&self) -> String {
        let mut out = TRUTH_CSV_HEADER.join(",");
        out.push('\n');
        for m in &self.minutes {
            let _ = writeln!(out, "{},{},{}", m.minute, m.sun_occluded, m.label);
        }
        out
    }

    pub fn label_at(&self, minute: Minute) -> Option<SunShade> {
        self.minutes
            .binary_search_by_key(&minute, |m| m.minute)
            .ok()
            .map(|i| self.minutes[i].label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDay {
    pub date: NaiveDate,
    pub nmea: String,
    pub uv_csv: String,
    /// Exactly the observations written to `nmea`, as decoded values.
    pub observations: Vec<SatObservation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneOutput {
    pub config: SceneConfig,
    pub days: Vec<SceneDay>,
    pub truth: SceneTruth,
}

fn rng_for(seed: u64, day: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((day as u64) << 8) | purpose);
    rng
}

const STREAM_SCHEDULE: u64 = 1;
const STREAM_ORBITS: u64 = 2;
const STREAM_CN0: u64 = 3;
const STREAM_UV: u64 = 4;

/// Talker and SVID for the i-th simulated satellite, cycling through GPS,
/// GLONASS and Galileo numbering.
pub fn satellite_key(i: usize) -> SatKey {
    let (talker, base) = match i % 3 {
        0 => ("GP", 1),
        1 => ("GL", 65),
        _ => ("GA", 1),
    };
    SatKey {
        talker: Talker::new(talker).expect("valid talker"),
        svid: base + (i / 3) as u16,
    }
}

type Vec3 = [f64; 3];

/// East-north-up unit vector.
fn enu(azimuth_deg: f64, elevation_deg: f64) -> Vec3 {
    let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    [el.cos() * az.sin(), el.cos() * az.cos(), el.sin()]
}

fn az_el(p: Vec3) -> (f64, f64) {
    let el = p[2].clamp(-1.0, 1.0).asin().to_degrees();
    let az = p[0].atan2(p[1]).to_degrees().rem_euclid(360.0);
    (az, el)
}

/// One horizon-to-horizon arc along a great circle through `top`.
#[derive(Debug, Clone, Copy)]
struct Pass {
    start: DateTime<Utc>,
    seconds: f64,
    top: Vec3,
    along: Vec3,
}

impl Pass {
    fn position(&self, t: DateTime<Utc>) -> Option<(f64, f64)> {
        let dt = (t - self.start).num_milliseconds() as f64 / 1000.0;
        if !(0.0..=self.seconds).contains(&dt) {
            return None;
        }
        let theta = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * dt / self.seconds;
        let (c, s) = (theta.cos(), theta.sin());
        Some(az_el([
            c * self.top[0] + s * self.along[0],
            c * self.top[1] + s * self.along[1],
            c * self.top[2] + s * self.along[2],
        ]))
    }
}

fn passes_for_day(cfg: &SceneConfig, rng: &mut ChaCha8Rng, start: DateTime<Utc>, end: DateTime<Utc>) -> Vec<Pass> {
    let hours = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| Duration::seconds((rng.gen_range(lo..=hi) * 3600.0) as i64);
    // begin far enough back that a pass may already be in progress
    let mut cursor = start - hours(rng, (0.0, cfg.pass_hours.1 + cfg.gap_hours.1));
    let mut passes = Vec::new();
    while cursor < end {
        let seconds = hours(rng, cfg.pass_hours).num_seconds() as f64;
        let culmination: f64 = rng.gen_range(15.0..85.0);
        let azimuth: f64 = rng.gen_range(0.0..360.0);
        let top = enu(azimuth, culmination);
        // horizontal direction perpendicular to `top`; the sign picks the direction of travel
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let a = azimuth.to_radians();
        let along = [sign * a.cos(), -sign * a.sin(), 0.0];
        passes.push(Pass {
            start: cursor,
            seconds,
            top,
            along,
        });
        cursor += Duration::seconds(seconds as i64) + hours(rng, cfg.gap_hours);
    }
    passes
}

/// Per-minute sheltered flags. Segments come in pairs of equal length with
/// a random order, so open and sheltered time balance.
fn shelter_schedule(cfg: &SceneConfig, rng: &mut ChaCha8Rng, minutes: usize) -> Vec<bool> {
    let Some((lo, hi)) = cfg.shelter_dwell_minutes else {
        return vec![true; minutes];
    };
    let mut out = Vec::with_capacity(minutes + 2 * hi as usize);
    while out.len() < minutes {
        let len = rng.gen_range(lo..=hi) as usize;
        let first = rng.gen_bool(0.5);
        out.extend(std::iter::repeat(first).take(len));
        out.extend(std::iter::repeat(!first).take(len));
    }
    out.truncate(minutes);
    out
}

fn clear_sky_uvi(cfg: &SceneConfig, sun_elevation_deg: f64) -> f64 {
    cfg.uvi_peak * sun_elevation_deg.to_radians().sin().max(0.0).powf(1.2)
}

fn nmea_time(t: DateTime<Utc>) -> String {
    format!("{:02}{:02}{:02}.00", t.hour(), t.minute(), t.second())
}

fn nmea_coordinate(value: f64, degree_digits: usize, hemispheres: [char; 2]) -> String {
    let hemi = if value >= 0.0 { hemispheres[0] } else { hemispheres[1] };
    let v = value.abs();
    let mut degrees = v.floor();
    let mut minutes = ((v - degrees) * 60.0 * 10_000.0).round() / 10_000.0;
    if minutes >= 60.0 {
        degrees += 1.0;
        minutes -= 60.0;
    }
    format!("{:0dw$}{:07.4},{hemi}", degrees as u32, minutes, dw = degree_digits)
}

fn rmc_sentence(t: DateTime<Utc>, lat: f64, lon: f64) -> String {
    frame(&format!(
        "GNRMC,{},A,{},{},0.0,0.0,{},,,A",
        nmea_time(t),
        nmea_coordinate(lat, 2, ['N', 'S']),
        nmea_coordinate(lon, 3, ['E', 'W']),
        t.format("%d%m%y")
    ))
}

/// GSV sentences for one talker, four satellites per sentence.
fn gsv_sentences(talker: Talker, sats: &[(u16, i32, i32, i32)], out: &mut String) {
    let total = sats.len().div_ceil(4);
    for (i, chunk) in sats.chunks(4).enumerate() {
        let mut body = format!("{}GSV,{},{},{:02}", talker, total, i + 1, sats.len());
        for (svid, el, az, cn0) in chunk {
            let _ = write!(body, ",{svid:02},{el:02},{az:03},{cn0:02}");
        }
        out.push_str(&frame(&body));
        out.push_str("\r\n");
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

fn simulate_day(cfg: &SceneConfig, day_index: usize, window: &DayWindow) -> (SceneDay, Vec<MinuteTruth>) {
    let start = window.start();
    let minutes = window.minutes();
    let end = start + Duration::minutes(minutes as i64);
    let sheltered = shelter_schedule(cfg, &mut rng_for(cfg.seed, day_index, STREAM_SCHEDULE), minutes);
    let mut orbit_rng = rng_for(cfg.seed, day_index, STREAM_ORBITS);
    let orbits: Vec<(SatKey, Vec<Pass>)> = (0..cfg.n_satellites)
        .map(|i| (satellite_key(i), passes_for_day(cfg, &mut orbit_rng, start, end)))
        .collect();
    let mut cn0_rng = rng_for(cfg.seed, day_index, STREAM_CN0);
    let mut uv_rng = rng_for(cfg.seed, day_index, STREAM_UV);
    let cn0_noise = Normal::new(0.0, cfg.cn0_noise_std).expect("validated std");
    let uv_noise = Normal::new(0.0, cfg.uvi_noise_std).expect("validated std");

    let mut nmea = String::new();
    let mut observations = Vec::new();
    let mut uv = Vec::with_capacity(minutes * 60);
    let mut truth = Vec::with_capacity(minutes);
    let occluders_now = |k: usize| -> &[Occluder] {
        if sheltered[k] {
            &cfg.occluders
        } else {
            &[]
        }
    };

    for (k, &is_sheltered) in sheltered.iter().enumerate() {
        let t = start + Duration::minutes(k as i64);
        let occ = occluders_now(k);
        nmea.push_str(&rmc_sentence(t, cfg.latitude_deg, cfg.longitude_deg));
        nmea.push_str("\r\n");

        let mut by_talker: Vec<(Talker, Vec<(u16, i32, i32, i32)>)> = Vec::new();
        let mut occluded_satellites = Vec::new();
        for (key, passes) in &orbits {
            let Some((az, el)) = passes.iter().find_map(|p| p.position(t)) else {
                continue;
            };
            if el < cfg.elevation_cutoff_deg {
                continue;
            }
            let blocked = occluded(occ, az, el);
            if blocked {
                occluded_satellites.push(*key);
            }
            let taper = cfg.cn0_horizon_fraction + (1.0 - cfg.cn0_horizon_fraction) * el.to_radians().sin();
            let cn0 = cfg.cn0_base_dbhz * taper - if blocked { cfg.cn0_attenuation_dbhz } else { 0.0 }
                + cn0_noise.sample(&mut cn0_rng);
            let cn0 = cn0.round().clamp(10.0, 55.0) as i32;
            let el_i = el.round().clamp(0.0, 90.0) as i32;
            let az_i = az.round() as i32 % 360;
            match by_talker.iter_mut().find(|(tk, _)| *tk == key.talker) {
                Some((_, v)) => v.push((key.svid, el_i, az_i, cn0)),
                None => by_talker.push((key.talker, vec![(key.svid, el_i, az_i, cn0)])),
            }
        }
        for (talker, mut sats) in by_talker {
            sats.sort_by_key(|s| s.0);
            gsv_sentences(talker, &sats, &mut nmea);
            observations.extend(sats.iter().map(|&(svid, el, az, cn0)| SatObservation {
                talker,
                svid,
                elevation_deg: el as f64,
                azimuth_deg: az as f64,
                cn0_dbhz: Some(cn0 as f64),
                timestamp_utc: t,
            }));
        }

        for s in 0..60 {
            let ts = t + Duration::seconds(s);
            let sun = solar_position(cfg.latitude_deg, cfg.longitude_deg, ts).expect("validated position");
            let blocked = occluded(occ, sun.azimuth_deg, sun.elevation_deg);
            let factor = if blocked { cfg.uvi_shade_factor } else { 1.0 };
            let uvi = round_to((clear_sky_uvi(cfg, sun.elevation_deg) * factor + uv_noise.sample(&mut uv_rng)).max(0.0), 4);
            uv.push(UvSample {
                timestamp_utc: ts,
                uva: round_to(uvi * 120.0, 2),
                uvb: round_to(uvi * 60.0, 2),
                uvi,
            });
        }

        let mid = solar_position(cfg.latitude_deg, cfg.longitude_deg, t + Duration::seconds(30)).expect("validated position");
        let sun_occluded = occluded(occ, mid.azimuth_deg, mid.elevation_deg);
        let daylight = clear_sky_uvi(cfg, mid.elevation_deg) >= cfg.shade_threshold;
        truth.push(MinuteTruth {
            minute: Minute::containing(t),
            sheltered: is_sheltered,
            sun_occluded,
            daylight,
            label: if sun_occluded || !daylight { SunShade::Shade } else { SunShade::Sun },
            occluded_satellites,
        });
    }

    let mut uv_csv = Vec::new();
    groundtruth::write_uv_csv(&mut uv_csv, &uv).expect("writing to memory");
    let day = SceneDay {
        date: window.date,
        nmea,
        uv_csv: String::from_utf8(uv_csv).expect("csv output is utf-8"),
        observations,
    };
    (day, truth)
}

pub fn simulate(cfg: &SceneConfig) -> Result<SceneOutput, ConfigError> {
    cfg.validate()?;
    let mut days = Vec::with_capacity(cfg.days.len());
    let mut truth = SceneTruth::default();
    for (i, w) in cfg.days.iter().enumerate() {
        let (day, minutes) = simulate_day(cfg, i, w);
        days.push(day);
        truth.minutes.extend(minutes);
    }
    truth.minutes.sort_by_key(|m| m.minute);
    Ok(SceneOutput {
        config: cfg.clone(),
        days,
        truth,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneFiles {
    pub nmea: Vec<PathBuf>,
    pub uv: Vec<PathBuf>,
    pub truth: PathBuf,
}

impl SceneOutput {
    pub fn write_to_dir(&self, dir: &Path) -> io::Result<SceneFiles> {
        fs::create_dir_all(dir)?;
        let mut files = SceneFiles::default();
        for (i, day) in self.days.iter().enumerate() {
            let stem = format!("{}_day{}_{}", self.config.name, i + 1, day.date);
            let nmea = dir.join(format!("{stem}.nmea"));
            fs::write(&nmea, &day.nmea)?;
            let uv = dir.join(format!("{stem}_uv.csv"));
            fs::write(&uv, &day.uv_csv)?;
            files.nmea.push(nmea);
            files.uv.push(uv);
        }
        files.truth = dir.join(format!("{}_truth.csv", self.config.name));
        fs::write(&files.truth, self.truth.to_csv())?;
        Ok(files)
    }
}
