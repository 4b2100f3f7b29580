//! Low-accuracy solar ephemeris (Meeus, chapter 25) good to roughly 0.01°
//! between 1950 and 2050. Elevation is geometric: no refraction correction.

use chrono::{DateTime, Datelike, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EphemerisError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    Longitude(f64),
    #[error("time {0} outside supported years 1950-2050")]
    Time(DateTime<Utc>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarPosition {
    /// Clockwise from true north, [0, 360).
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

const UNIX_EPOCH_JD: f64 = 2_440_587.5;
const J2000_UNIX_SECONDS: i64 = 946_728_000;
const SECONDS_PER_DAY: f64 = 86_400.0;

/// Astronomical Julian day, fractional.
pub fn julian_day(utc: DateTime<Utc>) -> f64 {
    let secs = utc.timestamp();
    let whole_days = secs.div_euclid(86_400) as f64;
    let frac = (secs.rem_euclid(86_400) as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9)
        / SECONDS_PER_DAY;
    UNIX_EPOCH_JD + whole_days + frac
}

/// Days since J2000.0, computed without going through the large JD value.
fn days_since_j2000(utc: DateTime<Utc>) -> f64 {
    let secs = utc.timestamp() - J2000_UNIX_SECONDS;
    (secs as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9) / SECONDS_PER_DAY
}

fn normalize_deg(x: f64) -> f64 {
    let r = x.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

struct Equatorial {
    right_ascension_deg: f64,
    declination_deg: f64,
    /// Apparent Greenwich sidereal time.
    sidereal_deg: f64,
}

fn equatorial(d: f64) -> Equatorial {
    let t = d / 36_525.0;
    let mean_longitude = 280.46646 + 36_000.76983 * t + 0.000_303_2 * t * t;
    let mean_anomaly = (357.52911 + 35_999.05029 * t - 0.000_153_7 * t * t).to_radians();
    let center = (1.914_602 - 0.004_817 * t - 0.000_014 * t * t) * mean_anomaly.sin()
        + (0.019_993 - 0.000_101 * t) * (2.0 * mean_anomaly).sin()
        + 0.000_289 * (3.0 * mean_anomaly).sin();
    let true_longitude = mean_longitude + center;
    let node = (125.04 - 1_934.136 * t).to_radians();
    let apparent_longitude = (true_longitude - 0.005_69 - 0.004_78 * node.sin()).to_radians();

    let mean_obliquity = 23.0 + 26.0 / 60.0 + 21.448 / 3600.0
        - (46.815 * t + 0.000_59 * t * t - 0.001_813 * t * t * t) / 3600.0;
    let obliquity = (mean_obliquity + 0.002_56 * node.cos()).to_radians();

    let right_ascension = (obliquity.cos() * apparent_longitude.sin()).atan2(apparent_longitude.cos());
    let declination = (obliquity.sin() * apparent_longitude.sin()).asin();

    let mean_sidereal = 280.460_618_37 + 360.985_647_366_29 * d + 0.000_387_933 * t * t
        - t * t * t / 38_710_000.0;
    let nutation_longitude = -0.004_78 * node.sin();
    Equatorial {
        right_ascension_deg: right_ascension.to_degrees(),
        declination_deg: declination.to_degrees(),
        sidereal_deg: mean_sidereal + nutation_longitude * obliquity.cos(),
    }
}

fn check_inputs(latitude_deg: f64, longitude_deg: f64, utc: DateTime<Utc>) -> Result<(), EphemerisError> {
    if !(-90.0..=90.0).contains(&latitude_deg) {
        return Err(EphemerisError::Latitude(latitude_deg));
    }
    if !(-180.0..=180.0).contains(&longitude_deg) {
        return Err(EphemerisError::Longitude(longitude_deg));
    }
    if !(1950..=2050).contains(&utc.year()) {
        return Err(EphemerisError::Time(utc));
    }
    Ok(())
}

/// Local hour angle of the sun in degrees, wrapped to (-180, 180].
fn hour_angle_deg(eq: &Equatorial, longitude_deg: f64) -> f64 {
    let h = normalize_deg(eq.sidereal_deg + longitude_deg - eq.right_ascension_deg);
    if h > 180.0 {
        h - 360.0
    } else {
        h
    }
}

pub fn solar_position(
    latitude_deg: f64,
    longitude_deg: f64,
    utc: DateTime<Utc>,
) -> Result<SolarPosition, EphemerisError> {
    check_inputs(latitude_deg, longitude_deg, utc)?;
    let eq = equatorial(days_since_j2000(utc));
    let h = hour_angle_deg(&eq, longitude_deg).to_radians();
    let (lat, dec) = (latitude_deg.to_radians(), eq.declination_deg.to_radians());

    let sin_el = lat.sin() * dec.sin() + lat.cos() * dec.cos() * h.cos();
    let elevation_deg = sin_el.clamp(-1.0, 1.0).asin().to_degrees();
    let azimuth = (-dec.cos() * h.sin()).atan2(dec.sin() * lat.cos() - dec.cos() * h.cos() * lat.sin());
    Ok(SolarPosition {
        azimuth_deg: normalize_deg(azimuth.to_degrees()),
        elevation_deg,
    })
}

/// Instant of local apparent noon (hour angle zero) on the given UTC date.
pub fn solar_noon(date: NaiveDate, longitude_deg: f64) -> Result<DateTime<Utc>, EphemerisError> {
    let mut t = date.and_hms_opt(12, 0, 0).expect("valid noon").and_utc()
        - Duration::milliseconds((longitude_deg / 15.0 * 3_600_000.0) as i64);
    check_inputs(0.0, longitude_deg, t)?;
    for _ in 0..4 {
        let h = hour_angle_deg(&equatorial(days_since_j2000(t)), longitude_deg);
        // the hour angle advances ~360.9856 degrees per day
        t -= Duration::milliseconds((h / 360.985_647 * 86_400_000.0).round() as i64);
    }
    Ok(t)
}

/// Smallest absolute difference between two azimuths, in degrees.
pub fn angular_difference_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn utc(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    #[test]
    fn j2000_epoch() {
        assert_eq!(julian_day(utc("2000-01-01T12:00:00Z")), 2_451_545.0);
    }

    #[test]
    fn julian_day_is_linear_in_time() {
        let t = utc("2021-09-21T06:13:27Z");
        assert_eq!(julian_day(t + Duration::hours(24)), julian_day(t) + 1.0);
        let hour = julian_day(t + Duration::hours(1)) - julian_day(t);
        assert!((hour - 1.0 / 24.0).abs() < 1e-9);
    }

    #[test]
    fn equinox_noon_on_the_equator_is_near_zenith() {
        let p = solar_position(0.0, 0.0, utc("2021-03-20T12:07:00Z")).unwrap();
        assert!(p.elevation_deg > 88.0);
        // independent SPA reference: 89.890 degrees
        assert!((p.elevation_deg - 89.890).abs() < 0.2, "{p:?}");
    }

    #[test]
    fn tokyo_local_midnight_is_dark() {
        // 00:00 JST
        let p = solar_position(35.66, 139.68, utc("2021-09-21T15:00:00Z")).unwrap();
        assert!(p.elevation_deg < 0.0);
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        let t = utc("2021-09-21T06:00:00Z");
        assert_eq!(solar_position(91.0, 0.0, t), Err(EphemerisError::Latitude(91.0)));
        assert_eq!(solar_position(0.0, -181.0, t), Err(EphemerisError::Longitude(-181.0)));
        assert!(matches!(
            solar_position(0.0, 0.0, utc("1949-12-31T23:59:59Z")),
            Err(EphemerisError::Time(_))
        ));
        assert!(solar_position(0.0, 0.0, utc("2050-12-31T23:59:59Z")).is_ok());
    }

    #[test]
    fn solar_noon_is_the_daily_maximum() {
        for (lat, lon, date) in [
            (35.66, 139.68, "2021-09-21"),
            (-33.9, 18.4, "2020-06-21"),
            (0.0, -75.0, "1999-12-31"),
            (59.0, 10.0, "2030-01-15"),
        ] {
            let date: NaiveDate = date.parse().unwrap();
            let noon = solar_noon(date, lon).unwrap();
            let top = solar_position(lat, lon, noon).unwrap().elevation_deg;
            for minutes in (-720..=720).step_by(7) {
                let t = noon + Duration::minutes(minutes);
                let el = solar_position(lat, lon, t).unwrap().elevation_deg;
                assert!(top >= el - 1e-9, "{lat} {lon} {date} {minutes}: {top} < {el}");
            }
        }
    }

    #[test]
    fn angular_difference_wraps() {
        assert_eq!(angular_difference_deg(359.0, 1.0), 2.0);
        assert_eq!(angular_difference_deg(10.0, 350.0), 20.0);
        assert_eq!(angular_difference_deg(90.0, 90.0), 0.0);
    }

    proptest! {
        #[test]
        fn azimuth_is_normalized(lat in -90.0f64..=90.0, lon in -180.0f64..=180.0, secs in -631_152_000i64..2_556_143_999) {
            let t = DateTime::from_timestamp(secs, 0).unwrap();
            let p = solar_position(lat, lon, t).unwrap();
            prop_assert!((0.0..360.0).contains(&p.azimuth_deg));
            prop_assert!((-90.0..=90.0).contains(&p.elevation_deg));
        }

        #[test]
        fn one_minute_moves_less_than_a_degree(lat in -60.0f64..=60.0, lon in -180.0f64..=180.0, secs in -631_152_000i64..2_556_000_000) {
            let t = DateTime::from_timestamp(secs, 0).unwrap();
            let a = solar_position(lat, lon, t).unwrap();
            let b = solar_position(lat, lon, t + Duration::minutes(1)).unwrap();
            prop_assert!((a.elevation_deg - b.elevation_deg).abs() < 1.0);
            // azimuth sweeps fast only near the zenith and nadir
            if a.elevation_deg.abs() < 70.0 {
                prop_assert!(angular_difference_deg(a.azimuth_deg, b.azimuth_deg) < 1.0);
            }
        }
    }
}
