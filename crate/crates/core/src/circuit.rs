//! Load-modulated reflection coefficients.
//!
//! An element's antenna is terminated by one of two loads; each load gives a
//! complex reflection coefficient `(Z_L - Z_a*) / (Z_L + Z_a)`. The pair of
//! coefficients and the contrast between them drive everything downstream.

use std::io::Read;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::wrap_signed_deg;
use crate::error::{Error, Result};

/// Rectangular-form complex value used for impedances, coefficients and fields.
pub type ComplexValue = Complex64;

/// Slack on `|Γ| <= 1` that absorbs rounding without admitting active loads.
pub const PASSIVITY_EPS: f64 = 1e-9;

/// Denominators below this magnitude (ohms) are treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

/// Phase-separation band around 180° within which the two states count as
/// antipodal for backscatter purposes.
pub const ANTIPODAL_BAND_DEG: f64 = 12.0;

pub(crate) fn ensure_finite(z: ComplexValue, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} is not finite: {z}")))
    }
}

/// Impedances measured or simulated at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedancePoint {
    pub frequency_hz: f64,
    pub z_antenna: ComplexValue,
    pub z_load_on: ComplexValue,
    pub z_load_off: ComplexValue,
}

impl ImpedancePoint {
    pub fn new(
        frequency_hz: f64,
        z_antenna: ComplexValue,
        z_load_on: ComplexValue,
        z_load_off: ComplexValue,
    ) -> Result<Self> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "frequency must be positive, got {frequency_hz}"
            )));
        }
        ensure_finite(z_antenna, "antenna impedance")?;
        ensure_finite(z_load_on, "ON-state load impedance")?;
        ensure_finite(z_load_off, "OFF-state load impedance")?;
        if z_antenna.re <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "antenna resistance must be positive, got {}",
                z_antenna.re
            )));
        }
        Ok(Self {
            frequency_hz,
            z_antenna,
            z_load_on,
            z_load_off,
        })
    }

    /// Operating point of the printed element at 2.45 GHz: antenna
    /// `46.85 - j0.8 Ω`, diode ON `2.99 + j4.02 Ω`, diode OFF `96.27 - j508.72 Ω`.
    pub fn reference_2g45() -> Self {
        Self {
            frequency_hz: 2.45e9,
            z_antenna: ComplexValue::new(46.85, -0.8),
            z_load_on: ComplexValue::new(2.99, 4.02),
            z_load_off: ComplexValue::new(96.27, -508.72),
        }
    }

    pub fn reflection_pair(&self) -> Result<ReflectionPair> {
        ReflectionPair::new(
            reflection_coefficient(self.z_load_on, self.z_antenna)?,
            reflection_coefficient(self.z_load_off, self.z_antenna)?,
        )
    }
}

/// Reflection coefficient of an antenna `z_antenna` terminated by `z_load`.
pub fn reflection_coefficient(
    z_load: ComplexValue,
    z_antenna: ComplexValue,
) -> Result<ComplexValue> {
    ensure_finite(z_load, "load impedance")?;
    ensure_finite(z_antenna, "antenna impedance")?;
    if z_antenna.re <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "antenna resistance must be positive, got {}",
            z_antenna.re
        )));
    }
    let den = z_load + z_antenna;
    if den.norm() < SINGULAR_EPS {
        return Err(Error::SingularInput(format!(
            "z_load + z_antenna vanishes ({den})"
        )));
    }
    Ok((z_load - z_antenna.conj()) / den)
}

/// The two reflection states an element toggles between.
///
/// `gamma_on` is state 1 (Γ⁽¹⁾) and `gamma_off` is state 2 (Γ⁽²⁾).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPair {
    gamma_on: ComplexValue,
    gamma_off: ComplexValue,
}

impl ReflectionPair {
    pub fn new(gamma_on: ComplexValue, gamma_off: ComplexValue) -> Result<Self> {
        for (g, name) in [(gamma_on, "gamma_on"), (gamma_off, "gamma_off")] {
            ensure_finite(g, name)?;
            if g.norm() > 1.0 + PASSIVITY_EPS {
                return Err(Error::InvalidInput(format!(
                    "{name} = {g} has |Γ| = {} > 1 (active load)",
                    g.norm()
                )));
            }
        }
        Ok(Self {
            gamma_on,
            gamma_off,
        })
    }

    /// Ideal binary modulation: `+1` and `-1`.
    pub fn antipodal() -> Self {
        Self {
            gamma_on: ComplexValue::new(1.0, 0.0),
            gamma_off: ComplexValue::new(-1.0, 0.0),
        }
    }

    pub fn gamma_on(&self) -> ComplexValue {
        self.gamma_on
    }

    pub fn gamma_off(&self) -> ComplexValue {
        self.gamma_off
    }

    /// `Γ⁽¹⁾ - Γ⁽²⁾`.
    pub fn contrast(&self) -> ComplexValue {
        self.gamma_on - self.gamma_off
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulationMetrics {
    /// `∠Γ_on - ∠Γ_off` wrapped into `(-180, 180]`.
    pub phase_difference_signed_deg: f64,
    /// The same difference unwrapped into `[0, 360)`.
    pub phase_difference_raw_deg: f64,
    /// Unsigned separation in `[0, 180]`.
    pub phase_separation_deg: f64,
    pub loss_on_db: f64,
    pub loss_off_db: f64,
    pub differential_magnitude: f64,
}

impl ModulationMetrics {
    /// Whether the separation lies within `180° ± band_deg`.
    pub fn within_antipodal_band(&self, band_deg: f64) -> bool {
        (180.0 - self.phase_separation_deg) <= band_deg
    }
}

pub fn modulation_metrics(pair: &ReflectionPair) -> Result<ModulationMetrics> {
    let (on, off) = (pair.gamma_on(), pair.gamma_off());
    if on.norm() == 0.0 || off.norm() == 0.0 {
        return Err(Error::UndefinedLoss);
    }
    let diff = on.arg().to_degrees() - off.arg().to_degrees();
    let signed = wrap_signed_deg(diff);
    Ok(ModulationMetrics {
        phase_difference_signed_deg: signed,
        phase_difference_raw_deg: crate::angle::wrap_deg(diff),
        phase_separation_deg: signed.abs(),
        loss_on_db: -20.0 * on.norm().log10(),
        loss_off_db: -20.0 * off.norm().log10(),
        differential_magnitude: (on - off).norm(),
    })
}

/// Frequency-sorted impedance sweep with per-component linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceTable {
    points: Vec<ImpedancePoint>,
}

#[derive(Debug, Deserialize)]
struct ImpedanceRow {
    freq_hz: f64,
    za_re: f64,
    za_im: f64,
    zl1_re: f64,
    zl1_im: f64,
    zl2_re: f64,
    zl2_im: f64,
}

impl ImpedanceTable {
    pub fn new(points: Vec<ImpedancePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Format("impedance table has no rows".into()));
        }
        for w in points.windows(2) {
            if w[1].frequency_hz <= w[0].frequency_hz {
                return Err(Error::Format(format!(
                    "frequencies must be strictly increasing ({} then {})",
                    w[0].frequency_hz, w[1].frequency_hz
                )));
            }
        }
        Ok(Self { points })
    }

    /// Parse delimited text with the header
    /// `freq_hz,za_re,za_im,zl1_re,zl1_im,zl2_re,zl2_im`.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        const EXPECTED: [&str; 7] = [
            "freq_hz", "za_re", "za_im", "zl1_re", "zl1_im", "zl2_re", "zl2_im",
        ];
        if headers.iter().ne(EXPECTED.iter().copied()) {
            return Err(Error::Format(format!(
                "expected header `{}`, got `{}`",
                EXPECTED.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for row in rdr.deserialize::<ImpedanceRow>() {
            let r = row?;
            let point = ImpedancePoint::new(
                r.freq_hz,
                ComplexValue::new(r.za_re, r.za_im),
                ComplexValue::new(r.zl1_re, r.zl1_im),
                ComplexValue::new(r.zl2_re, r.zl2_im),
            )
            .map_err(|e| Error::Format(format!("row at {} Hz: {e}", r.freq_hz)))?;
            points.push(point);
        }
        Self::new(points)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn points(&self) -> &[ImpedancePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lookup(&self, frequency_hz: f64) -> Result<ImpedancePoint> {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if !(frequency_hz >= first.frequency_hz && frequency_hz <= last.frequency_hz) {
            return Err(Error::OutOfRange {
                value: frequency_hz,
                min: first.frequency_hz,
                max: last.frequency_hz,
            });
        }
        if let Some(p) = self.points.iter().find(|p| p.frequency_hz == frequency_hz) {
            return Ok(*p);
        }
        let hi = self
            .points
            .iter()
            .position(|p| p.frequency_hz > frequency_hz)
            .expect("frequency bracketed by range check");
        let (a, b) = (self.points[hi - 1], self.points[hi]);
        let t = (frequency_hz - a.frequency_hz) / (b.frequency_hz - a.frequency_hz);
        let lerp = |x: ComplexValue, y: ComplexValue| {
            ComplexValue::new(x.re + t * (y.re - x.re), x.im + t * (y.im - x.im))
        };
        ImpedancePoint::new(
            frequency_hz,
            lerp(a.z_antenna, b.z_antenna),
            lerp(a.z_load_on, b.z_load_on),
            lerp(a.z_load_off, b.z_load_off),
        )
    }
}
