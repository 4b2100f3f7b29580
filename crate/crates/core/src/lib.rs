//! Sun/shade classification from GNSS signal strength.
//!
//! The pipeline runs NMEA logs and UV-sensor logs through per-minute feature
//! extraction, then trains and evaluates twelve binary classifiers with
//! leave-one-day-out cross-validation. [`scenesim`] generates synthetic
//! scenes with known ground truth so the whole chain can be checked
//! end to end.

pub mod classifiers;
pub mod ephemeris;
pub mod evaluation;
pub mod features;
pub mod groundtruth;
pub mod matrix;
pub mod minute;
pub mod nmea;
pub mod pipeline;
pub mod scenesim;
