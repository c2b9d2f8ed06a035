//! Run configuration read from a TOML document.
//!
//! ```toml
//! grid_step_deg = 1.0
//!
//! [geometry]
//! rows = 1
//! cols = 4
//! dx_over_lambda = 0.5
//! carrier_hz = 2.45e9
//!
//! [waveform]
//! f0_hz = 313.0
//! duty = 0.5
//! gamma_on = [1.0, 0.0]
//! gamma_off = [-1.0, 0.0]
//! # or: impedance_table = "loads.csv" and table_frequency_hz = 2.45e9
//!
//! [element]
//! model = "cosine_power"
//! exponent = 1.7252
//! peak_gain_dbi = 1.75
//! ```
//!
//! When the waveform names neither a Γ pair nor a table, the 2.45 GHz
//! reference impedances are used.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::{
    ArrayGeometry, ElementPatternModel, Excitation, ScatteringModel, REFERENCE_CARRIER_HZ,
    SPEED_OF_LIGHT,
};
use crate::circuit::{ComplexValue, ImpedancePoint, ImpedanceTable, ReflectionPair};
use crate::error::{Error, Result};
use crate::modulation::{ModulationWaveform, REFERENCE_F0_HZ};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    pub dx_over_lambda: f64,
    pub dy_over_lambda: f64,
    pub carrier_hz: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rows: 1,
            cols: 4,
            dx_over_lambda: 0.5,
            dy_over_lambda: 0.5,
            carrier_hz: REFERENCE_CARRIER_HZ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveformConfig {
    pub f0_hz: f64,
    pub duty: f64,
    pub gamma_on: Option<[f64; 2]>,
    pub gamma_off: Option<[f64; 2]>,
    pub impedance_table: Option<PathBuf>,
    pub table_frequency_hz: Option<f64>,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            f0_hz: REFERENCE_F0_HZ,
            duty: 0.5,
            gamma_on: None,
            gamma_off: None,
            impedance_table: None,
            table_frequency_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub waveform: WaveformConfig,
    pub element: ElementPatternModel,
    pub amplitude: f64,
    pub grid_step_deg: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            waveform: WaveformConfig::default(),
            element: ElementPatternModel::default(),
            amplitude: 1.0,
            grid_step_deg: 1.0,
            out: None,
        }
    }
}

/// Where the reflection pair came from.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadSource {
    Explicit,
    Table {
        path: PathBuf,
        frequency_hz: f64,
        point: ImpedancePoint,
    },
    Reference(ImpedancePoint),
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    /// Relative table paths resolve against the config file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(table), Some(dir)) = (&cfg.waveform.impedance_table, path.parent()) {
            if table.is_relative() {
                cfg.waveform.impedance_table = Some(dir.join(table));
            }
        }
        Ok(cfg)
    }

    /// Short content hash recorded in export headers.
    /// The output destination is excluded.
    pub fn hash(&self) -> String {
        let model_inputs = Self {
            out: None,
            ..self.clone()
        };
        let json = serde_json::to_string(&model_inputs).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        let g = &self.geometry;
        if !(g.carrier_hz.is_finite() && g.carrier_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "carrier must be positive, got {}",
                g.carrier_hz
            )));
        }
        let lambda = SPEED_OF_LIGHT / g.carrier_hz;
        ArrayGeometry::new(
            g.rows,
            g.cols,
            g.dx_over_lambda * lambda,
            g.dy_over_lambda * lambda,
            lambda,
        )
    }

    pub fn reflection_pair(&self) -> Result<(ReflectionPair, LoadSource)> {
        let w = &self.waveform;
        let explicit = w.gamma_on.is_some() || w.gamma_off.is_some();
        let tabled = w.impedance_table.is_some() || w.table_frequency_hz.is_some();
        match (explicit, tabled) {
            (true, true) => Err(Error::InvalidInput(
                "give either gamma_on/gamma_off or impedance_table/table_frequency_hz, not both"
                    .into(),
            )),
            (true, false) => {
                let (Some(on), Some(off)) = (w.gamma_on, w.gamma_off) else {
                    return Err(Error::InvalidInput(
                        "gamma_on and gamma_off must be given together".into(),
                    ));
                };
                let pair = ReflectionPair::new(
                    ComplexValue::new(on[0], on[1]),
                    ComplexValue::new(off[0], off[1]),
                )?;
                Ok((pair, LoadSource::Explicit))
            }
            (false, true) => {
                let (Some(path), Some(f)) = (&w.impedance_table, w.table_frequency_hz) else {
                    return Err(Error::InvalidInput(
                        "impedance_table and table_frequency_hz must be given together".into(),
                    ));
                };
                let point = ImpedanceTable::from_path(path)?.lookup(f)?;
                Ok((
                    point.reflection_pair()?,
                    LoadSource::Table {
                        path: path.clone(),
                        frequency_hz: f,
                        point,
                    },
                ))
            }
            (false, false) => {
                let point = ImpedancePoint::reference_2g45();
                Ok((point.reflection_pair()?, LoadSource::Reference(point)))
            }
        }
    }

    pub fn waveform(&self) -> Result<ModulationWaveform> {
        let (pair, _) = self.reflection_pair()?;
        ModulationWaveform::with_duty(pair, self.waveform.f0_hz, self.waveform.duty)
    }

    pub fn model(&self) -> Result<ScatteringModel> {
        ScatteringModel::new(
            self.geometry()?,
            self.element,
            Excitation {
                carrier_hz: self.geometry.carrier_hz,
                amplitude: self.amplitude,
            },
            self.waveform()?,
        )
    }
}
