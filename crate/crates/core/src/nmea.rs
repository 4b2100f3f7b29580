//! NMEA 0183 ingestion: checksum validation, sentence splitting, and the two
//! sentence types the pipeline consumes (`GSV` satellites in view and `RMC`
//! recommended minimum fix).
//!
//! GSV sentences carry no time of their own, so [`parse_log`] stamps them with
//! the most recent valid RMC fix. Corrupt lines are counted and skipped, never
//! fatal.

use std::fmt;
use std::io::{self, BufRead, Write};

use chrono::{DateTime, NaiveDate, NaiveTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minute::format_utc;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NmeaError {
    #[error("checksum mismatch")]
    Checksum,
    #[error("malformed sentence: {0}")]
    Malformed(String),
    #[error("field out of range: {0}")]
    FieldRange(String),
}

/// Two-letter talker identifier (`GP`, `GL`, `GA`, `GN`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Talker([u8; 2]);

impl Talker {
    pub fn new(code: &str) -> Option<Self> {
        match code.as_bytes() {
            [a, b] if a.is_ascii_alphanumeric() && b.is_ascii_alphanumeric() => {
                Some(Talker([*a, *b]))
            }
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("talker is ascii")
    }
}

impl fmt::Display for Talker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Talker {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Talker {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Talker::new(&s).ok_or_else(|| serde::de::Error::custom(format!("bad talker {s:?}")))
    }
}

/// Satellites from different constellations may share an SVID, so the talker
/// is part of the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatKey {
    pub talker: Talker,
    pub svid: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceKind {
    Gsv,
    Rmc,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSentence {
    pub talker: Talker,
    /// Full address field, e.g. `GPGSV`.
    pub address: String,
    pub kind: SentenceKind,
    /// Fields after the address, empty fields preserved.
    pub payload_fields: Vec<String>,
    pub checksum_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatObservation {
    pub talker: Talker,
    pub svid: u16,
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
    pub cn0_dbhz: Option<f64>,
    pub timestamp_utc: DateTime<Utc>,
}

impl SatObservation {
    pub fn key(&self) -> SatKey {
        SatKey {
            talker: self.talker,
            svid: self.svid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionFix {
    pub timestamp_utc: DateTime<Utc>,
    /// Present whenever `valid`; receivers without a fix often leave it blank.
    pub latitude_deg: Option<f64>,
    pub longitude_deg: Option<f64>,
    pub valid: bool,
}

/// XOR of all bytes, as used by the NMEA checksum.
pub fn checksum(body: &[u8]) -> u8 {
    body.iter().fold(0u8, |acc, b| acc ^ b)
}

/// Wraps a sentence body (without `$`) into a full line with its checksum.
pub fn frame(body: &str) -> String {
    format!("${}*{:02X}", body, checksum(body.as_bytes()))
}

fn hex_value(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'A'..=b'F' => Some(b - b'A' + 10),
        b'a'..=b'f' => Some(b - b'a' + 10),
        _ => None,
    }
}

/// Splits `$body*HH` into the body bytes and the declared checksum.
fn split_checksum(line: &[u8]) -> Option<(&[u8], u8)> {
    let rest = line.strip_prefix(b"$")?;
    let star = rest.iter().position(|&b| b == b'*')?;
    let (body, suffix) = (&rest[..star], &rest[star + 1..]);
    match suffix {
        [hi, lo] => Some((body, hex_value(*hi)? << 4 | hex_value(*lo)?)),
        _ => None,
    }
}

fn trim_line(line: &str) -> &str {
    line.trim_matches(|c: char| c.is_ascii_whitespace())
}

/// True iff the line is `$...*HH` and `HH` equals the XOR of the bytes between
/// `$` and `*`. Lines without `*` are rejected.
pub fn validate_checksum(line: &str) -> bool {
    match split_checksum(trim_line(line).as_bytes()) {
        Some((body, declared)) => checksum(body) == declared,
        None => false,
    }
}

pub fn parse_sentence(line: &str) -> Result<RawSentence, NmeaError> {
    let line = trim_line(line);
    if !line.starts_with('$') {
        return Err(NmeaError::Malformed("missing '$' prefix".into()));
    }
    if !validate_checksum(line) {
        return Err(NmeaError::Checksum);
    }
    let star = line.find('*').expect("validated line has '*'");
    let body = &line[1..star];
    let mut fields = body.split(',');
    let address = fields.next().unwrap_or_default();
    let talker = address
        .get(..2)
        .and_then(Talker::new)
        .ok_or_else(|| NmeaError::Malformed(format!("bad address field {address:?}")))?;
    let kind = if address.len() < 3 {
        SentenceKind::Other
    } else if address.ends_with("GSV") {
        SentenceKind::Gsv
    } else if address.ends_with("RMC") {
        SentenceKind::Rmc
    } else {
        SentenceKind::Other
    };
    Ok(RawSentence {
        talker,
        address: address.to_string(),
        kind,
        payload_fields: fields.map(str::to_string).collect(),
        checksum_ok: true,
    })
}

/// Satellites decoded from one GSV sentence, plus the blocks that were rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct GsvBlocks {
    pub observations: Vec<SatObservation>,
    pub rejected: Vec<NmeaError>,
}

fn parse_number(field: &str, name: &str) -> Result<f64, NmeaError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| NmeaError::Malformed(format!("{name} {field:?} is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NmeaError::Malformed(format!("{name} {field:?} is not finite")))
    }
}

fn parse_block(
    talker: Talker,
    block: &[String],
    time: DateTime<Utc>,
) -> Result<Option<SatObservation>, NmeaError> {
    if block.iter().all(|f| f.trim().is_empty()) {
        // padding block
        return Ok(None);
    }
    let svid: u16 = block[0]
        .trim()
        .parse()
        .map_err(|_| NmeaError::Malformed(format!("svid {:?}", block[0])))?;
    let elevation_deg = parse_number(&block[1], "elevation")?;
    let azimuth_deg = parse_number(&block[2], "azimuth")?;
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(NmeaError::FieldRange(format!("elevation {elevation_deg}")));
    }
    if !(0.0..360.0).contains(&azimuth_deg) {
        return Err(NmeaError::FieldRange(format!("azimuth {azimuth_deg}")));
    }
    let cn0_dbhz = match block[3].trim() {
        "" => None,
        s => {
            let v = parse_number(s, "C/N0")?;
            if !(0.0..=64.0).contains(&v) {
                return Err(NmeaError::FieldRange(format!("C/N0 {v}")));
            }
            Some(v)
        }
    };
    Ok(Some(SatObservation {
        talker,
        svid,
        elevation_deg,
        azimuth_deg,
        cn0_dbhz,
        timestamp_utc: time,
    }))
}

/// Decodes the 4-field satellite blocks of a GSV sentence. A trailing
/// signal-ID field (NMEA 4.10+) is ignored.
pub fn parse_gsv(sentence: &RawSentence, current_time: DateTime<Utc>) -> Result<GsvBlocks, NmeaError> {
    if sentence.kind != SentenceKind::Gsv {
        return Err(NmeaError::Malformed(format!("{} is not GSV", sentence.address)));
    }
    let fields = &sentence.payload_fields;
    if fields.len() < 3 {
        return Err(NmeaError::Malformed("GSV header truncated".into()));
    }
    let mut blocks = &fields[3..];
    if blocks.len() % 4 == 1 {
        blocks = &blocks[..blocks.len() - 1];
    }
    let mut out = GsvBlocks {
        observations: Vec::with_capacity(blocks.len() / 4),
        rejected: Vec::new(),
    };
    for block in blocks.chunks(4) {
        if block.len() < 4 {
            out.rejected
                .push(NmeaError::Malformed("incomplete satellite block".into()));
            continue;
        }
        match parse_block(sentence.talker, block, current_time) {
            Ok(Some(obs)) => out.observations.push(obs),
            Ok(None) => {}
            Err(e) => out.rejected.push(e),
        }
    }
    Ok(out)
}

/// `ddmm.mmmm` / `dddmm.mmmm` with hemisphere letter to signed degrees.
fn parse_coordinate(value: &str, hemisphere: &str, max_deg: f64) -> Result<f64, NmeaError> {
    let v = parse_number(value, "coordinate")?;
    if v < 0.0 {
        return Err(NmeaError::Malformed(format!("negative coordinate {value:?}")));
    }
    let degrees = (v / 100.0).floor();
    let minutes = v - degrees * 100.0;
    if minutes >= 60.0 {
        return Err(NmeaError::Malformed(format!("minutes out of range in {value:?}")));
    }
    let magnitude = degrees + minutes / 60.0;
    if magnitude > max_deg {
        return Err(NmeaError::Malformed(format!("coordinate {value:?} out of range")));
    }
    match hemisphere.trim() {
        "N" | "E" => Ok(magnitude),
        "S" | "W" => Ok(-magnitude),
        h => Err(NmeaError::Malformed(format!("hemisphere {h:?}"))),
    }
}

fn parse_time(field: &str) -> Result<NaiveTime, NmeaError> {
    let bad = || NmeaError::Malformed(format!("time {field:?}"));
    let digits = field.trim().split('.').next().unwrap_or_default();
    if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let num = |r: std::ops::Range<usize>| digits[r].parse::<u32>().map_err(|_| bad());
    NaiveTime::from_hms_opt(num(0..2)?, num(2..4)?, num(4..6)?).ok_or_else(bad)
}

fn parse_date(field: &str) -> Result<NaiveDate, NmeaError> {
    let bad = || NmeaError::Malformed(format!("date {field:?}"));
    let field = field.trim();
    if field.len() != 6 || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let num = |r: std::ops::Range<usize>| field[r].parse::<u32>().map_err(|_| bad());
    let yy = num(4..6)? as i32;
    let year = if yy < 80 { 2000 + yy } else { 1900 + yy };
    NaiveDate::from_ymd_opt(year, num(2..4)?, num(0..2)?).ok_or_else(bad)
}

pub fn parse_rmc(sentence: &RawSentence) -> Result<PositionFix, NmeaError> {
    if sentence.kind != SentenceKind::Rmc {
        return Err(NmeaError::Malformed(format!("{} is not RMC", sentence.address)));
    }
    let f = &sentence.payload_fields;
    if f.len() < 9 {
        return Err(NmeaError::Malformed("RMC truncated".into()));
    }
    let time = parse_time(&f[0])?;
    let date = parse_date(&f[8])?;
    let valid = match f[1].trim() {
        "A" => true,
        "V" => false,
        s => return Err(NmeaError::Malformed(format!("status {s:?}"))),
    };
    let blank = f[2].trim().is_empty() && f[4].trim().is_empty();
    let (latitude_deg, longitude_deg) = if blank && !valid {
        (None, None)
    } else {
        (
            Some(parse_coordinate(&f[2], &f[3], 90.0)?),
            Some(parse_coordinate(&f[4], &f[5], 180.0)?),
        )
    };
    Ok(PositionFix {
        timestamp_utc: date.and_time(time).and_utc(),
        latitude_deg,
        longitude_deg,
        valid,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    pub lines: usize,
    pub blank_lines: usize,
    pub sentences: usize,
    pub gsv_sentences: usize,
    pub rmc_sentences: usize,
    pub other_sentences: usize,
    pub checksum_failures: usize,
    pub malformed: usize,
    /// GSV sentences seen before any valid RMC time.
    pub gsv_before_fix: usize,
    pub rejected_blocks: usize,
    pub invalid_fixes: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub observations: Vec<SatObservation>,
    pub fixes: Vec<PositionFix>,
    pub stats: ParseStats,
}

/// Streams a log line by line. Only I/O errors abort.
pub fn parse_log<R: BufRead>(mut reader: R) -> io::Result<ParsedLog> {
    let mut log = ParsedLog::default();
    let mut current_time: Option<DateTime<Utc>> = None;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        log.stats.lines += 1;
        let line = String::from_utf8_lossy(&buf);
        if trim_line(&line).is_empty() {
            log.stats.blank_lines += 1;
            continue;
        }
        let sentence = match parse_sentence(&line) {
            Ok(s) => s,
            Err(NmeaError::Checksum) => {
                log.stats.checksum_failures += 1;
                continue;
            }
            Err(_) => {
                log.stats.malformed += 1;
                continue;
            }
        };
        log.stats.sentences += 1;
        match sentence.kind {
            SentenceKind::Rmc => {
                log.stats.rmc_sentences += 1;
                match parse_rmc(&sentence) {
                    Ok(fix) => {
                        if fix.valid {
                            current_time = Some(fix.timestamp_utc);
                        } else {
                            log.stats.invalid_fixes += 1;
                        }
                        log.fixes.push(fix);
                    }
                    Err(_) => log.stats.malformed += 1,
                }
            }
            SentenceKind::Gsv => {
                log.stats.gsv_sentences += 1;
                let Some(t) = current_time else {
                    log.stats.gsv_before_fix += 1;
                    continue;
                };
                match parse_gsv(&sentence, t) {
                    Ok(blocks) => {
                        log.stats.rejected_blocks += blocks.rejected.len();
                        log.observations.extend(blocks.observations);
                    }
                    Err(_) => log.stats.malformed += 1,
                }
            }
            SentenceKind::Other => log.stats.other_sentences += 1,
        }
    }
    Ok(log)
}

pub const OBSERVATION_CSV_HEADER: [&str; 6] = [
    "timestamp_utc",
    "talker",
    "svid",
    "elevation_deg",
    "azimuth_deg",
    "cn0_dbhz",
];

pub fn write_observations_csv<W: Write>(out: W, observations: &[SatObservation]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OBSERVATION_CSV_HEADER)?;
    for o in observations {
        w.write_record([
            format_utc(o.timestamp_utc),
            o.talker.to_string(),
            o.svid.to_string(),
            o.elevation_deg.to_string(),
            o.azimuth_deg.to_string(),
            o.cn0_dbhz.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
