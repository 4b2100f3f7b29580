//! Minute-resolution UTC keys used to align satellite, sun and UV streams.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A UTC minute, stored as whole minutes since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Minute(pub i64);

impl Minute {
    /// Truncates an instant to the start of its minute.
    pub fn containing(t: DateTime<Utc>) -> Self {
        Minute(t.timestamp().div_euclid(60))
    }

    pub fn start(self) -> DateTime<Utc> {
        Utc.timestamp_opt(self.0 * 60, 0)
            .single()
            .expect("minute index within chrono range")
    }

    pub fn next(self) -> Self {
        Minute(self.0 + 1)
    }

    pub fn prev(self) -> Self {
        Minute(self.0 - 1)
    }

    /// UTC calendar date of the minute; used as the day identifier for folds.
    pub fn date(self) -> NaiveDate {
        self.start().date_naive()
    }
}

impl fmt::Display for Minute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.start().to_rfc3339_opts(SecondsFormat::Secs, true))
    }
}

impl FromStr for Minute {
    type Err = chrono::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = DateTime::parse_from_rfc3339(s.trim())?;
        Ok(Minute::containing(t.with_timezone(&Utc)))
    }
}

impl Serialize for Minute {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Minute {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses an ISO-8601 UTC timestamp. Accepts RFC 3339 with an offset, or a
/// bare `YYYY-MM-DDTHH:MM:SS[.fff]` which is taken as UTC.
pub fn parse_utc(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
            return Some(naive.and_utc());
        }
    }
    None
}

pub fn format_utc(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncates_to_minute_and_round_trips_text() {
        let t = parse_utc("2021-09-21T06:15:42Z").unwrap();
        let m = Minute::containing(t);
        assert_eq!(m.to_string(), "2021-09-21T06:15:00Z");
        assert_eq!(m.to_string().parse::<Minute>().unwrap(), m);
        assert_eq!(m.next().prev(), m);
    }

    #[test]
    fn negative_epoch_minutes_floor() {
        let t = parse_utc("1969-12-31T23:59:30Z").unwrap();
        assert_eq!(Minute::containing(t), Minute(-1));
    }

    #[test]
    fn bare_timestamps_are_utc() {
        let a = parse_utc("2021-09-21T06:00:00").unwrap();
        let b = parse_utc("2021-09-21T06:00:00Z").unwrap();
        assert_eq!(a, b);
        assert!(parse_utc("yesterday").is_none());
    }
}
