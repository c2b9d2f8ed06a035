//! Far-field harmonic scattering of a time-modulated element grid.
//!
//! The field at harmonic `m` is the element pattern times the array factor
//! weighted by each element's Fourier coefficient:
//!
//! ```text
//! F_m(θ, φ) = A_c Σ_p Σ_q E(θ, φ) · e^{j k [x_p sinθ cosφ + y_q sinθ sinφ]} · c_m(τ_pq)
//! ```
//!
//! Azimuth convention: 90° is front broadside, 270° back broadside and
//! 0°/180° lie in the surface plane.
//!
//! Phase convention: a profile phase `ψ` delays the element's control
//! waveform by `τ = ψ/(360° f₀)`, and profile element `p` (1-based, x index)
//! sits at `x_p = -(p-1)·d_x`, i.e. the first channel is at the `+x` end of
//! the row. With this ordering `ψ = [0°, 270°, 180°, 90°]` steers the +1st
//! harmonic to 60°/300° and the -1st to 120°/240°.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::{cos_deg, sin_deg, wrap_deg};
use crate::circuit::ComplexValue;
use crate::error::{Error, Result};
use crate::modulation::{delay_from_phase, fourier_coefficient, ModulationWaveform};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier used by the reference device, Hz.
pub const REFERENCE_CARRIER_HZ: f64 = 2.45e9;

/// Magnitudes at or below this are treated as nulls.
pub const NULL_FLOOR: f64 = 1e-12;

/// Relative tolerance for declaring two pattern samples tied at the peak.
pub const DOMINANCE_TIE_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Element count along y (`N`).
    pub rows: usize,
    /// Element count along x (`M`).
    pub cols: usize,
    pub dx: f64,
    pub dy: f64,
    pub lambda_c: f64,
}

impl ArrayGeometry {
    pub fn new(rows: usize, cols: usize, dx: f64, dy: f64, lambda_c: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(
                "element counts must be at least 1".into(),
            ));
        }
        for (v, name) in [(dx, "dx"), (dy, "dy"), (lambda_c, "lambda_c")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            dx,
            dy,
            lambda_c,
        })
    }

    /// A single row of `elements` along x with spacing `dx_over_lambda · λ_c`.
    pub fn linear(elements: usize, dx_over_lambda: f64, carrier_hz: f64) -> Result<Self> {
        if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "carrier must be positive, got {carrier_hz}"
            )));
        }
        let lambda = SPEED_OF_LIGHT / carrier_hz;
        Self::new(
            1,
            elements,
            dx_over_lambda * lambda,
            dx_over_lambda * lambda,
            lambda,
        )
    }

    /// The 1×4 half-wavelength row at 2.45 GHz.
    pub fn reference_1x4() -> Self {
        Self::linear(4, 0.5, REFERENCE_CARRIER_HZ).expect("valid constants")
    }

    pub fn element_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_linear(&self) -> bool {
        self.rows == 1
    }

    pub fn dx_over_lambda(&self) -> f64 {
        self.dx / self.lambda_c
    }
}

/// Per-element far-field amplitude model, identical for every element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ElementPatternModel {
    Isotropic,
    /// `|cos Δ|^q` where `Δ` is the offset from the nearer broadside (front or
    /// back). Normalized to 1 at broadside; `peak_gain_dbi` is carried for
    /// reporting only.
    CosinePower {
        exponent: f64,
        peak_gain_dbi: f64,
    },
}

impl Default for ElementPatternModel {
    fn default() -> Self {
        Self::fitted(96.0, 1.75)
    }
}

impl ElementPatternModel {
    /// Cosine-power model whose value falls to 0.5 at half the given beamwidth.
    pub fn fitted(beamwidth_deg: f64, peak_gain_dbi: f64) -> Self {
        let exponent = 0.5f64.ln() / cos_deg(beamwidth_deg / 2.0).ln();
        Self::CosinePower {
            exponent,
            peak_gain_dbi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Isotropic => Ok(()),
            Self::CosinePower { exponent, .. } if exponent.is_finite() && exponent > 0.0 => Ok(()),
            Self::CosinePower { exponent, .. } => Err(Error::InvalidInput(format!(
                "cosine-power exponent must be positive, got {exponent}"
            ))),
        }
    }

    /// Value in the azimuth cut (`θ = 90°`).
    pub fn eval(&self, azimuth_deg: f64) -> f64 {
        self.eval_at(90.0, azimuth_deg)
    }

    /// Value at elevation `θ` and azimuth `φ`. The broadside axis is `±y`, so
    /// `cos Δ = sinθ sinφ`.
    pub fn eval_at(&self, elevation_deg: f64, azimuth_deg: f64) -> f64 {
        match *self {
            Self::Isotropic => 1.0,
            Self::CosinePower { exponent, .. } => (sin_deg(elevation_deg) * sin_deg(azimuth_deg))
                .abs()
                .powf(exponent),
        }
    }
}

/// Plane-wave illumination at normal incidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    pub carrier_hz: f64,
    pub amplitude: f64,
}

impl Default for Excitation {
    fn default() -> Self {
        Self {
            carrier_hz: REFERENCE_CARRIER_HZ,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    PeakNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternSample {
    pub azimuth_deg: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicPattern {
    pub m: i32,
    pub samples: Vec<PatternSample>,
    pub normalization: Normalization,
}

impl HarmonicPattern {
    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.magnitude).fold(0.0, f64::max)
    }

    /// True when every sample is at or below [`NULL_FLOOR`].
    pub fn is_null(&self) -> bool {
        self.peak() <= NULL_FLOOR
    }

    pub fn magnitude_at(&self, azimuth_deg: f64) -> Option<f64> {
        let a = wrap_deg(azimuth_deg);
        self.samples
            .iter()
            .find(|s| (s.azimuth_deg - a).abs() < 1e-9)
            .map(|s| s.magnitude)
    }
}

/// Everything needed to evaluate a harmonic field for a given profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringModel {
    pub geometry: ArrayGeometry,
    pub element: ElementPatternModel,
    pub excitation: Excitation,
    /// Template waveform; its delay is replaced per element.
    pub waveform: ModulationWaveform,
}

impl ScatteringModel {
    pub fn new(
        geometry: ArrayGeometry,
        element: ElementPatternModel,
        excitation: Excitation,
        waveform: ModulationWaveform,
    ) -> Result<Self> {
        element.validate()?;
        if !(excitation.amplitude.is_finite() && excitation.amplitude > 0.0) {
            return Err(Error::InvalidInput(
                "excitation amplitude must be positive".into(),
            ));
        }
        if !(excitation.carrier_hz.is_finite() && excitation.carrier_hz > 0.0) {
            return Err(Error::InvalidInput(
                "carrier frequency must be positive".into(),
            ));
        }
        Ok(Self {
            geometry,
            element,
            excitation,
            waveform,
        })
    }

    fn check_len(&self, phases_deg: &[f64]) -> Result<()> {
        let expected = self.geometry.element_count();
        if phases_deg.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: phases_deg.len(),
            });
        }
        if let Some(bad) = phases_deg.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite phase {bad}")));
        }
        Ok(())
    }

    /// Fourier coefficient of element waveform delayed by phase `psi_deg`.
    pub fn element_coefficient(&self, psi_deg: f64, m: i32) -> Result<ComplexValue> {
        let tau = delay_from_phase(psi_deg, self.waveform.f0())?;
        Ok(fourier_coefficient(&self.waveform.with_delay(tau)?, m))
    }

    /// Spatial phase factor times element pattern for grid position `(p, q)`
    /// (0-based), excluding the modulation coefficient.
    pub fn steering_term(
        &self,
        p: usize,
        q: usize,
        elevation_deg: f64,
        azimuth_deg: f64,
    ) -> ComplexValue {
        let g = &self.geometry;
        let k = 2.0 * PI / g.lambda_c;
        let st = sin_deg(elevation_deg);
        let x = -(p as f64) * g.dx;
        let y = q as f64 * g.dy;
        let phase = k * (x * st * cos_deg(azimuth_deg) + y * st * sin_deg(azimuth_deg));
        Complex64::from_polar(self.element.eval_at(elevation_deg, azimuth_deg), phase)
    }

    /// `F_m(θ, φ)`. Profile phases are ordered x-major: index `p·N + q`.
    pub fn harmonic_field_at(
        &self,
        phases_deg: &[f64],
        m: i32,
        elevation_deg: f64,
        azimuth_deg: f64,
    ) -> Result<ComplexValue> {
        self.check_len(phases_deg)?;
        let rows = self.geometry.rows;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..self.geometry.cols {
            for q in 0..rows {
                let c = self.element_coefficient(phases_deg[p * rows + q], m)?;
                acc += self.steering_term(p, q, elevation_deg, azimuth_deg) * c;
            }
        }
        Ok(acc * self.excitation.amplitude)
    }

    /// `F_m` in the azimuth cut `θ = 90°`.
    pub fn harmonic_field(
        &self,
        phases_deg: &[f64],
        m: i32,
        azimuth_deg: f64,
    ) -> Result<ComplexValue> {
        self.harmonic_field_at(phases_deg, m, 90.0, azimuth_deg)
    }

    /// `|F_m|` on the uniform azimuth grid `0, step, 2·step, ... < 360`.
    ///
    /// With `normalize` the samples are divided by their peak, unless the whole
    /// pattern is null, in which case it is returned raw.
    pub fn pattern_sweep(
        &self,
        phases_deg: &[f64],
        m: i32,
        grid_step_deg: f64,
        normalize: bool,
    ) -> Result<HarmonicPattern> {
        self.check_len(phases_deg)?;
        let grid = azimuth_grid(grid_step_deg)?;
        let samples = grid
            .par_iter()
            .map(|&a| {
                self.harmonic_field(phases_deg, m, a)
                    .map(|f| PatternSample {
                        azimuth_deg: a,
                        magnitude: f.norm(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut pattern = HarmonicPattern {
            m,
            samples,
            normalization: Normalization::Raw,
        };
        if normalize && !pattern.is_null() {
            let peak = pattern.peak();
            for s in &mut pattern.samples {
                s.magnitude /= peak;
            }
            pattern.normalization = Normalization::PeakNormalized;
        }
        Ok(pattern)
    }
}

/// Uniform azimuth grid over `[0, 360)`; `step` must divide 360.
pub fn azimuth_grid(step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg.is_finite() && step_deg > 0.0 && step_deg <= 360.0) {
        return Err(Error::Parameter(format!(
            "grid step must be in (0, 360], got {step_deg}"
        )));
    }
    let n = (360.0 / step_deg).round();
    if (n * step_deg - 360.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "grid step {step_deg}° does not divide 360°"
        )));
    }
    Ok((0..n as usize).map(|i| i as f64 * step_deg).collect())
}

/// Grid azimuths attaining the pattern maximum (relative tie tolerance 1e-6).
pub fn dominance_direction(pattern: &HarmonicPattern) -> Result<Vec<f64>> {
    if pattern.samples.is_empty() {
        return Err(Error::InvalidInput("empty pattern".into()));
    }
    if pattern.is_null() {
        return Err(Error::UndefinedDominance);
    }
    let peak = pattern.peak();
    Ok(pattern
        .samples
        .iter()
        .filter(|s| s.magnitude >= peak * (1.0 - DOMINANCE_TIE_REL))
        .map(|s| s.azimuth_deg)
        .collect())
}
