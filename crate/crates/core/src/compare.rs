//! Prediction-versus-measurement agreement for angle sweeps.
//!
//! A measured sweep is delimited text with `#key=value` metadata lines and the
//! header `azimuth_deg,p_plus1_dbm,p_minus1_dbm`. Powers are treated as
//! relative: both sides are peak-normalized before comparison.
//!
//! Recognized metadata: `profile` (phases separated by `;`), `table2_row`
//! (1-based catalog row), `label`, plus free-form keys such as `f_c`, `f0`,
//! `distance_m` and `tx_power_dbm`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::angle::{circular_distance_deg, wrap_deg};
use crate::array::{
    dominance_direction, HarmonicPattern, Normalization, PatternSample, ScatteringModel,
};
use crate::error::{Error, Result};
use crate::steering::{table2_catalog, PhaseProfile, DEFAULT_RESOLUTION_DEG};

/// Measurement distance of the reference chamber setup, metres.
pub const REFERENCE_DISTANCE_M: f64 = 1.75;
/// Transmit power of the reference chamber setup, dBm.
pub const REFERENCE_TX_POWER_DBM: f64 = 10.0;
/// Angular sampling of the reference chamber sweep, degrees.
pub const REFERENCE_SWEEP_STEP_DEG: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredRecord {
    pub azimuth_deg: f64,
    pub p_plus1_dbm: f64,
    pub p_minus1_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSweep {
    pub metadata: BTreeMap<String, String>,
    /// Sorted by azimuth.
    pub records: Vec<MeasuredRecord>,
}

impl MeasuredSweep {
    pub fn new(
        metadata: BTreeMap<String, String>,
        mut records: Vec<MeasuredRecord>,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Format("measured sweep has no records".into()));
        }
        for r in &records {
            if !(r.azimuth_deg >= 0.0 && r.azimuth_deg < 360.0) {
                return Err(Error::Format(format!(
                    "azimuth {} outside [0, 360)",
                    r.azimuth_deg
                )));
            }
            if !(r.p_plus1_dbm.is_finite() && r.p_minus1_dbm.is_finite()) {
                return Err(Error::Format(format!(
                    "non-finite power at {}°",
                    r.azimuth_deg
                )));
            }
        }
        records.sort_by(|a, b| a.azimuth_deg.total_cmp(&b.azimuth_deg));
        for w in records.windows(2) {
            if w[0].azimuth_deg == w[1].azimuth_deg {
                return Err(Error::Format(format!(
                    "duplicate azimuth {}",
                    w[0].azimuth_deg
                )));
            }
        }
        let sweep = Self { metadata, records };
        sweep.grid_step()?;
        Ok(sweep)
    }

    pub fn from_reader<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let mut metadata = BTreeMap::new();
        let mut body = String::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(meta) = trimmed.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once('=') {
                    metadata.insert(k.trim().to_string(), v.trim().to_string());
                }
            } else if !trimmed.is_empty() {
                body.push_str(trimmed);
                body.push('\n');
            }
        }
        if body.is_empty() {
            return Err(Error::Format("measured sweep is empty".into()));
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers = rdr.headers()?.clone();
        for col in ["azimuth_deg", "p_plus1_dbm", "p_minus1_dbm"] {
            if !headers.iter().any(|h| h == col) {
                return Err(Error::Format(format!("missing column `{col}`")));
            }
        }
        let records = rdr
            .deserialize::<MeasuredRecord>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(metadata, records)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut sweep = Self::from_reader(std::fs::File::open(path)?)?;
        if !sweep.metadata.contains_key("label") {
            if let Some(stem) = path.file_stem() {
                sweep
                    .metadata
                    .insert("label".into(), stem.to_string_lossy().into_owned());
            }
        }
        Ok(sweep)
    }

    /// Uniform angular spacing of the records.
    pub fn grid_step(&self) -> Result<f64> {
        if self.records.len() < 2 {
            return Ok(360.0);
        }
        let step = self.records[1].azimuth_deg - self.records[0].azimuth_deg;
        for w in self.records.windows(2) {
            if ((w[1].azimuth_deg - w[0].azimuth_deg) - step).abs() > 1e-9 {
                return Err(Error::Format("measured azimuth grid is not uniform".into()));
            }
        }
        Ok(step)
    }

    pub fn label(&self) -> String {
        self.metadata
            .get("label")
            .cloned()
            .unwrap_or_else(|| "sweep".into())
    }

    /// The profile the sweep was recorded with, from `profile` or `table2_row`.
    pub fn profile(&self) -> Result<PhaseProfile> {
        if let Some(p) = self.metadata.get("profile") {
            let phases = p
                .split([';', ' ', ','])
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad profile entry `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let res = self
                .metadata
                .get("resolution_deg")
                .map(|r| {
                    r.parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad resolution `{r}`")))
                })
                .transpose()?
                .unwrap_or(DEFAULT_RESOLUTION_DEG);
            return PhaseProfile::new(phases, res);
        }
        if let Some(r) = self.metadata.get("table2_row") {
            let idx: usize = r
                .parse()
                .map_err(|_| Error::Format(format!("bad table2_row `{r}`")))?;
            return catalog_profile(idx);
        }
        Err(Error::Format(
            "sweep metadata names neither `profile` nor `table2_row`".into(),
        ))
    }

    fn pattern(&self, m: i32) -> HarmonicPattern {
        HarmonicPattern {
            m,
            samples: self
                .records
                .iter()
                .map(|r| PatternSample {
                    azimuth_deg: r.azimuth_deg,
                    magnitude: 10f64
                        .powf(if m > 0 { r.p_plus1_dbm } else { r.p_minus1_dbm } / 20.0),
                })
                .collect(),
            normalization: Normalization::Raw,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "#{k}={v}");
        }
        out.push_str("azimuth_deg,p_plus1_dbm,p_minus1_dbm\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{}",
                r.azimuth_deg, r.p_plus1_dbm, r.p_minus1_dbm
            );
        }
        out
    }
}

/// 1-based catalog row lookup.
pub fn catalog_profile(row: usize) -> Result<PhaseProfile> {
    table2_catalog()
        .get(row.wrapping_sub(1))
        .map(|r| r.profile())
        .ok_or_else(|| Error::InvalidInput(format!("catalog row {row} outside 1..=9")))
}

/// Received power (dBm) of a noiseless synthetic sweep.
pub const SYNTHETIC_PEAK_DBM: f64 = -40.0;
const SYNTHETIC_FLOOR_DBM: f64 = -300.0;

/// Sweep generated from the model itself, peak set to [`SYNTHETIC_PEAK_DBM`].
pub fn synthesize_sweep(
    model: &ScatteringModel,
    phases_deg: &[f64],
    step_deg: f64,
    metadata: BTreeMap<String, String>,
) -> Result<MeasuredSweep> {
    let plus = model.pattern_sweep(phases_deg, 1, step_deg, true)?;
    let minus = model.pattern_sweep(phases_deg, -1, step_deg, true)?;
    let to_dbm = |m: f64| {
        if m > 0.0 {
            (SYNTHETIC_PEAK_DBM + 20.0 * m.log10()).max(SYNTHETIC_FLOOR_DBM)
        } else {
            SYNTHETIC_FLOOR_DBM
        }
    };
    let records = plus
        .samples
        .iter()
        .zip(&minus.samples)
        .map(|(p, n)| MeasuredRecord {
            azimuth_deg: p.azimuth_deg,
            p_plus1_dbm: to_dbm(p.magnitude),
            p_minus1_dbm: to_dbm(n.magnitude),
        })
        .collect();
    MeasuredSweep::new(metadata, records)
}

/// Dominance sets match when some pair of angles is closer than one grid step.
pub fn dominance_matches(predicted: &[f64], measured: &[f64], grid_step_deg: f64) -> bool {
    predicted.iter().any(|p| {
        measured
            .iter()
            .any(|m| circular_distance_deg(*p, *m) < grid_step_deg - 1e-9)
    })
}

fn min_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| circular_distance_deg(*x, *y)))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicComparison {
    pub harmonic: i32,
    pub measured_dominance: Vec<f64>,
    pub predicted_dominance: Vec<f64>,
    pub matched: bool,
    /// Smallest angular gap between the two dominance sets.
    pub offset_deg: f64,
    /// RMS gap between peak-normalized magnitudes over the front sector.
    pub front_nrmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileComparison {
    pub label: String,
    pub phases_deg: Vec<f64>,
    pub harmonics: Vec<HarmonicComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub profiles: Vec<ProfileComparison>,
}

pub fn compare_sweep(model: &ScatteringModel, sweep: &MeasuredSweep) -> Result<ProfileComparison> {
    let profile = sweep.profile()?;
    let step = sweep.grid_step()?;
    let mut harmonics = Vec::new();
    for m in [1, -1] {
        let measured = sweep.pattern(m);
        let predicted = HarmonicPattern {
            m,
            samples: sweep
                .records
                .iter()
                .map(|r| {
                    model
                        .harmonic_field(profile.phases_deg(), m, r.azimuth_deg)
                        .map(|f| PatternSample {
                            azimuth_deg: r.azimuth_deg,
                            magnitude: f.norm(),
                        })
                })
                .collect::<Result<Vec<_>>>()?,
            normalization: Normalization::Raw,
        };
        let measured_dominance = dominance_direction(&measured)?;
        let predicted_dominance = dominance_direction(&predicted)?;
        let (mp, pp) = (measured.peak(), predicted.peak());
        let front: Vec<f64> = measured
            .samples
            .iter()
            .zip(&predicted.samples)
            .filter(|(s, _)| s.azimuth_deg <= 180.0)
            .map(|(a, b)| (a.magnitude / mp - b.magnitude / pp).powi(2))
            .collect();
        let front_nrmse = if front.is_empty() {
            0.0
        } else {
            (front.iter().sum::<f64>() / front.len() as f64).sqrt()
        };
        harmonics.push(HarmonicComparison {
            harmonic: m,
            matched: dominance_matches(&predicted_dominance, &measured_dominance, step),
            offset_deg: min_distance(&predicted_dominance, &measured_dominance),
            measured_dominance,
            predicted_dominance,
            front_nrmse,
        });
    }
    Ok(ProfileComparison {
        label: sweep.label(),
        phases_deg: profile.phases_deg().to_vec(),
        harmonics,
    })
}

pub fn compare_sweeps(
    model: &ScatteringModel,
    sweeps: &[MeasuredSweep],
) -> Result<ComparisonReport> {
    Ok(ComparisonReport {
        profiles: sweeps
            .iter()
            .map(|s| compare_sweep(model, s))
            .collect::<Result<Vec<_>>>()?,
    })
}

fn fmt_angles(a: &[f64]) -> String {
    a.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("/")
}

impl ComparisonReport {
    pub fn matches(&self, harmonic: i32) -> (usize, usize) {
        let hits = self
            .profiles
            .iter()
            .flat_map(|p| p.harmonics.iter())
            .filter(|h| h.harmonic == harmonic);
        let (mut ok, mut total) = (0, 0);
        for h in hits {
            total += 1;
            ok += h.matched as usize;
        }
        (ok, total)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(
            "label,harmonic,measured_dominance,predicted_dominance,match,offset_deg,front_nrmse\n",
        );
        for p in &self.profiles {
            for h in &p.harmonics {
                let _ = writeln!(
                    out,
                    "{},{:+},{},{},{},{},{:.6}",
                    p.label,
                    h.harmonic,
                    fmt_angles(&h.measured_dominance),
                    fmt_angles(&h.predicted_dominance),
                    if h.matched { "yes" } else { "NO" },
                    h.offset_deg,
                    h.front_nrmse
                );
            }
        }
        for m in [1, -1] {
            let (ok, total) = self.matches(m);
            let _ = writeln!(out, "# {m:+} harmonic dominance matches: {ok}/{total}");
        }
        for p in &self.profiles {
            for h in p.harmonics.iter().filter(|h| !h.matched) {
                let _ = writeln!(
                    out,
                    "# deviation: {} {:+} measured {} predicted {} ({}°)",
                    p.label,
                    h.harmonic,
                    fmt_angles(&h.measured_dominance),
                    fmt_angles(&h.predicted_dominance),
                    h.offset_deg
                );
            }
        }
        out
    }
}

/// Agreement of a catalog row's predicted +1st dominance with its measured
/// column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogAgreement {
    pub row: usize,
    pub desired: (f64, f64),
    pub phases_deg: [f64; 4],
    pub predicted_plus: Vec<f64>,
    pub measured_plus: Vec<f64>,
    pub predicted_minus: Vec<f64>,
    pub measured_minus: Vec<f64>,
    pub matched_plus: bool,
    pub matched_minus: bool,
    pub discrepancy_plus_deg: f64,
}

/// Predict every catalog row on a uniform grid and compare with the measured
/// dominance columns. The model must describe a 4-element array.
pub fn catalog_agreement(
    model: &ScatteringModel,
    grid_step_deg: f64,
) -> Result<Vec<CatalogAgreement>> {
    let flatten = |pairs: &[(f64, f64)]| -> Vec<f64> {
        let mut v: Vec<f64> = pairs
            .iter()
            .flat_map(|&(a, b)| [wrap_deg(a), wrap_deg(b)])
            .collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    };
    table2_catalog()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let plus = dominance_direction(&model.pattern_sweep(
                &row.phases_deg,
                1,
                grid_step_deg,
                true,
            )?)?;
            let minus = dominance_direction(&model.pattern_sweep(
                &row.phases_deg,
                -1,
                grid_step_deg,
                true,
            )?)?;
            let measured_plus = flatten(row.measured_plus);
            let measured_minus = flatten(row.measured_minus);
            Ok(CatalogAgreement {
                row: i + 1,
                desired: row.desired,
                phases_deg: row.phases_deg,
                matched_plus: dominance_matches(&plus, &measured_plus, grid_step_deg),
                matched_minus: dominance_matches(&minus, &measured_minus, grid_step_deg),
                discrepancy_plus_deg: min_distance(&plus, &measured_plus),
                predicted_plus: plus,
                measured_plus,
                predicted_minus: minus,
                measured_minus,
            })
        })
        .collect()
}

pub fn catalog_agreement_text(rows: &[CatalogAgreement]) -> String {
    let mut out = String::from(
        "row,desired,phases_deg,predicted_plus,measured_plus,match_plus,predicted_minus,measured_minus,match_minus\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{}/{},{},{},{},{},{},{},{}",
            r.row,
            r.desired.0,
            r.desired.1,
            r.phases_deg
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(";"),
            fmt_angles(&r.predicted_plus),
            fmt_angles(&r.measured_plus),
            if r.matched_plus { "yes" } else { "NO" },
            fmt_angles(&r.predicted_minus),
            fmt_angles(&r.measured_minus),
            if r.matched_minus { "yes" } else { "NO" },
        );
    }
    let ok = rows.iter().filter(|r| r.matched_plus).count();
    let _ = writeln!(out, "# +1 harmonic dominance matches: {ok}/{}", rows.len());
    for r in rows.iter().filter(|r| !r.matched_plus) {
        let _ = writeln!(
            out,
            "# deviation: row {} desired {}/{} measured {} predicted {} ({}°)",
            r.row,
            r.desired.0,
            r.desired.1,
            fmt_angles(&r.measured_plus),
            fmt_angles(&r.predicted_plus),
            r.discrepancy_plus_deg
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{ArrayGeometry, ElementPatternModel, Excitation};
    use crate::circuit::ReflectionPair;
    use crate::modulation::ModulationWaveform;

    fn ideal() -> ScatteringModel {
        let w = ModulationWaveform::with_duty(ReflectionPair::antipodal(), 313.0, 0.5).unwrap();
        ScatteringModel::new(
            ArrayGeometry::reference_1x4(),
            ElementPatternModel::Isotropic,
            Excitation::default(),
            w,
        )
        .unwrap()
    }

    #[test]
    fn parses_sweep_with_metadata() {
        let text = "#table2_row=2\n#distance_m=1.75\nazimuth_deg,p_plus1_dbm,p_minus1_dbm\n\
                    10,-50,-60\n0,-55,-61\n20,-52,-58\n";
        let s = MeasuredSweep::from_reader(text.as_bytes()).unwrap();
        assert_eq!(s.records[0].azimuth_deg, 0.0);
        assert_eq!(s.grid_step().unwrap(), 10.0);
        assert_eq!(s.metadata["distance_m"], "1.75");
        assert_eq!(
            s.profile().unwrap().phases_deg(),
            &[0.0, 270.0, 180.0, 90.0]
        );
    }

    #[test]
    fn format_errors() {
        assert!(matches!(
            MeasuredSweep::from_reader("".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            MeasuredSweep::from_reader("azimuth_deg,p_plus1_dbm,p_minus1_dbm\n".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            MeasuredSweep::from_reader("azimuth_deg,p_plus1_dbm\n0,-1\n".as_bytes()),
            Err(Error::Format(_))
        ));
        let dup = "azimuth_deg,p_plus1_dbm,p_minus1_dbm\n0,-1,-1\n0,-2,-2\n";
        assert!(matches!(
            MeasuredSweep::from_reader(dup.as_bytes()),
            Err(Error::Format(_))
        ));
        let uneven = "azimuth_deg,p_plus1_dbm,p_minus1_dbm\n0,-1,-1\n10,-2,-2\n30,-2,-2\n";
        assert!(matches!(
            MeasuredSweep::from_reader(uneven.as_bytes()),
            Err(Error::Format(_))
        ));
        let range = "azimuth_deg,p_plus1_dbm,p_minus1_dbm\n360,-1,-1\n";
        assert!(matches!(
            MeasuredSweep::from_reader(range.as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn synthetic_self_consistency() {
        let model = ideal();
        let sweeps: Vec<_> = (1..=9)
            .map(|row| {
                let mut meta = BTreeMap::new();
                meta.insert("table2_row".to_string(), row.to_string());
                synthesize_sweep(
                    &model,
                    catalog_profile(row).unwrap().phases_deg(),
                    10.0,
                    meta,
                )
                .unwrap()
            })
            .collect();
        let report = compare_sweeps(&model, &sweeps).unwrap();
        assert_eq!(report.matches(1), (9, 9));
        assert_eq!(report.matches(-1), (9, 9));
        for p in &report.profiles {
            for h in &p.harmonics {
                assert!(h.front_nrmse < 1e-9, "{} {}", p.label, h.front_nrmse);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let mut meta = BTreeMap::new();
        meta.insert("profile".to_string(), "0;270;180;90".to_string());
        let s = synthesize_sweep(&ideal(), &[0.0, 270.0, 180.0, 90.0], 10.0, meta).unwrap();
        let back = MeasuredSweep::from_reader(s.to_text().as_bytes()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn strict_match_tolerance() {
        assert!(dominance_matches(&[120.0, 240.0], &[120.0, 240.0], 10.0));
        assert!(!dominance_matches(&[120.0, 240.0], &[130.0, 230.0], 10.0));
        assert!(dominance_matches(&[355.0], &[1.0], 10.0));
    }

    #[test]
    fn catalog_rows_out_of_range() {
        assert!(catalog_profile(0).is_err());
        assert!(catalog_profile(10).is_err());
    }
}
