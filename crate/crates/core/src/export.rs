//! Text and JSON renderings of patterns, profiles and schedules.
//!
//! Output contains no timestamps, so identical inputs give byte-identical
//! files.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use crate::array::{dominance_direction, HarmonicPattern, Normalization, NULL_FLOOR};
use crate::error::Result;
use crate::schedule::SwitchSchedule;
use crate::steering::{PhaseProfile, CONVENTION_TAG};

/// Provenance written ahead of a pattern export.
#[derive(Debug, Clone, Serialize)]
pub struct PatternHeader {
    pub geometry: String,
    pub element: String,
    pub profile_deg: Vec<f64>,
    pub config_hash: String,
}

/// `20·log10(magnitude)`, or `None` for samples at the null floor.
pub fn magnitude_db(magnitude: f64) -> Option<f64> {
    (magnitude > NULL_FLOOR).then(|| 20.0 * magnitude.log10())
}

fn normalization_name(n: Normalization) -> &'static str {
    match n {
        Normalization::Raw => "raw",
        Normalization::PeakNormalized => "peak_normalized",
    }
}

fn join(values: &[f64], sep: &str) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

pub fn null_count(pattern: &HarmonicPattern) -> usize {
    pattern
        .samples
        .iter()
        .filter(|s| s.magnitude <= NULL_FLOOR)
        .count()
}

pub fn pattern_csv(pattern: &HarmonicPattern, header: &PatternHeader) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# harmonic={}", pattern.m);
    let _ = writeln!(
        out,
        "# normalization={}",
        normalization_name(pattern.normalization)
    );
    let _ = writeln!(out, "# geometry={}", header.geometry);
    let _ = writeln!(out, "# element={}", header.element);
    let _ = writeln!(out, "# profile_deg={}", join(&header.profile_deg, ";"));
    let _ = writeln!(out, "# convention={CONVENTION_TAG}");
    let _ = writeln!(out, "# config_hash={}", header.config_hash);
    let nulls = null_count(pattern);
    if nulls > 0 {
        let _ = writeln!(out, "# null_samples={nulls}");
    }
    if let Ok(dom) = dominance_direction(pattern) {
        let _ = writeln!(out, "# dominance_deg={}", join(&dom, ";"));
    }
    out.push_str("azimuth_deg,magnitude_linear,magnitude_db\n");
    for s in &pattern.samples {
        let db = magnitude_db(s.magnitude).map_or_else(|| "-inf".to_string(), |d| d.to_string());
        let _ = writeln!(out, "{},{},{}", s.azimuth_deg, s.magnitude, db);
    }
    out
}

pub fn pattern_doc(pattern: &HarmonicPattern, header: &PatternHeader) -> String {
    let samples: Vec<_> = pattern
        .samples
        .iter()
        .map(|s| {
            json!({
                "azimuth_deg": s.azimuth_deg,
                "magnitude_linear": s.magnitude,
                "magnitude_db": magnitude_db(s.magnitude),
            })
        })
        .collect();
    let doc = json!({
        "harmonic": pattern.m,
        "normalization": normalization_name(pattern.normalization),
        "geometry": header.geometry,
        "element": header.element,
        "profile_deg": header.profile_deg,
        "convention_tag": CONVENTION_TAG,
        "config_hash": header.config_hash,
        "null_samples": null_count(pattern),
        "dominance_deg": dominance_direction(pattern).ok(),
        "samples": samples,
    });
    to_pretty(&doc)
}

/// Structured profile document.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileDoc {
    pub elements: usize,
    pub resolution_deg: f64,
    pub phases_deg: Vec<f64>,
    pub harmonic: i32,
    pub desired_azimuth_deg: f64,
    pub convention_tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_magnitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ProfileDoc {
    pub fn new(profile: &PhaseProfile, harmonic: i32, desired_azimuth_deg: f64) -> Self {
        Self {
            elements: profile.len(),
            resolution_deg: profile.resolution_deg(),
            phases_deg: profile.phases_deg().to_vec(),
            harmonic,
            desired_azimuth_deg,
            convention_tag: CONVENTION_TAG.to_string(),
            solver: None,
            achieved_magnitude: None,
            warning: None,
        }
    }

    pub fn to_json(&self) -> String {
        to_pretty(self)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("element,phase_deg\n");
        for (i, p) in self.phases_deg.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, p);
        }
        out
    }
}

pub fn schedule_doc(s: &SwitchSchedule) -> Result<String> {
    let channels: Vec<_> = s
        .timings()?
        .iter()
        .map(|t| json!({ "rise_tick": t.rise_tick, "fall_tick": t.fall_tick }))
        .collect();
    Ok(to_pretty(&json!({
        "f0_hz": s.f0,
        "ticks_per_period": s.ticks_per_period,
        "amplitude_v": s.amplitude_v,
        "channels": channels,
    })))
}

pub(crate) fn to_pretty<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
