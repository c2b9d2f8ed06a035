//! Baseband phase-profile synthesis.
//!
//! Two solvers maximize `|F_m|` toward a target azimuth: a closed-form
//! progressive-phase rule for uniform rows, and cyclic coordinate ascent over
//! the quantized phase lattice that works for any grid.

use serde::{Deserialize, Serialize};

use crate::angle::{cos_deg, wrap_deg};
use crate::array::{ArrayGeometry, ScatteringModel};
use crate::error::{Error, Result};

/// Identifies how profile phases map onto the array (see [`crate::array`]).
pub const CONVENTION_TAG: &str = "delay-phase/first-channel-at-+x";

/// Controller phase resolution, degrees.
pub const DEFAULT_RESOLUTION_DEG: f64 = 1.0;

/// Front azimuth sector the reference element illuminates usefully.
pub const STEERABLE_SECTOR_DEG: (f64, f64) = (50.0, 130.0);

/// Pass cap for coordinate ascent.
pub const MAX_SEARCH_PASSES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile {
    phases_deg: Vec<f64>,
    resolution_deg: f64,
}

impl PhaseProfile {
    /// Phases are reduced into `[0, 360)` and must already sit on the
    /// resolution lattice.
    pub fn new(phases_deg: Vec<f64>, resolution_deg: f64) -> Result<Self> {
        check_resolution(resolution_deg)?;
        let mut out = Vec::with_capacity(phases_deg.len());
        for p in phases_deg {
            if !p.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite phase {p}")));
            }
            let w = wrap_deg(p);
            let k = w / resolution_deg;
            if (k - k.round()).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "phase {p}° is not a multiple of {resolution_deg}°"
                )));
            }
            out.push(wrap_deg(k.round() * resolution_deg));
        }
        if out.is_empty() {
            return Err(Error::InvalidInput("profile has no elements".into()));
        }
        Ok(Self {
            phases_deg: out,
            resolution_deg,
        })
    }

    pub fn phases_deg(&self) -> &[f64] {
        &self.phases_deg
    }

    pub fn resolution_deg(&self) -> f64 {
        self.resolution_deg
    }

    pub fn len(&self) -> usize {
        self.phases_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases_deg.is_empty()
    }
}

fn check_resolution(resolution_deg: f64) -> Result<()> {
    if !(resolution_deg.is_finite() && resolution_deg > 0.0) {
        return Err(Error::Parameter(format!(
            "resolution must be positive, got {resolution_deg}"
        )));
    }
    let n = 360.0 / resolution_deg;
    if (n - n.round()).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "resolution {resolution_deg}° does not divide 360°"
        )));
    }
    Ok(())
}

/// Reduce each phase mod 360° and round to the nearest multiple of the
/// resolution; exact halves go up.
pub fn quantize_profile(raw_deg: &[f64], resolution_deg: f64) -> Result<PhaseProfile> {
    check_resolution(resolution_deg)?;
    let q = raw_deg
        .iter()
        .map(|&p| {
            if !p.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite phase {p}")));
            }
            Ok(wrap_deg(
                (wrap_deg(p) / resolution_deg + 0.5).floor() * resolution_deg,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    PhaseProfile::new(q, resolution_deg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteeringRequest {
    pub desired_azimuth_deg: f64,
    pub harmonic: i32,
    pub geometry: ArrayGeometry,
}

impl SteeringRequest {
    pub fn new(desired_azimuth_deg: f64, harmonic: i32, geometry: ArrayGeometry) -> Result<Self> {
        if !desired_azimuth_deg.is_finite() {
            return Err(Error::InvalidInput("target azimuth must be finite".into()));
        }
        if harmonic == 0 {
            return Err(Error::Unsupported(
                "the carrier (m = 0) cannot be steered by control delays".into(),
            ));
        }
        Ok(Self {
            desired_azimuth_deg: wrap_deg(desired_azimuth_deg),
            harmonic,
            geometry,
        })
    }

    /// A warning when the target lies outside the front sector and its mirror
    /// on the back side.
    pub fn sector_warning(&self) -> Option<String> {
        let a = self.desired_azimuth_deg;
        let front = if a > 180.0 { 360.0 - a } else { a };
        let (lo, hi) = STEERABLE_SECTOR_DEG;
        if front < lo || front > hi {
            Some(format!(
                "target {a}° lies outside the {lo}°-{hi}° sector (and its back-side mirror); \
                 element gain there is low"
            ))
        } else {
            None
        }
    }
}

/// Unquantized progressive phases `ψ_p = -(360°·d_x/λ)(p-1)cos φ / m`.
pub fn progressive_phases_raw(req: &SteeringRequest) -> Result<Vec<f64>> {
    if req.harmonic == 0 {
        return Err(Error::Unsupported("m = 0 is not steerable".into()));
    }
    if !req.geometry.is_linear() {
        return Err(Error::Unsupported(
            "closed-form profiles need a single-row geometry".into(),
        ));
    }
    let step = -360.0 * req.geometry.dx_over_lambda() * cos_deg(req.desired_azimuth_deg)
        / req.harmonic as f64;
    Ok((0..req.geometry.cols)
        .map(|p| wrap_deg(step * p as f64))
        .collect())
}

pub fn progressive_phase_profile(
    req: &SteeringRequest,
    resolution_deg: f64,
) -> Result<PhaseProfile> {
    quantize_profile(&progressive_phases_raw(req)?, resolution_deg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub profile: PhaseProfile,
    /// Achieved `|F_m|` at the target.
    pub objective: f64,
    pub passes: usize,
    /// False when the pass cap was hit before a pass without improvement.
    pub converged: bool,
}

/// Cyclic coordinate ascent on the quantized phase lattice.
///
/// The element at `pinned` stays at 0° to remove the global-phase gauge.
/// Linear geometries start from the closed-form profile (shifted onto the
/// gauge), others from all zeros, so the result is never worse than the
/// closed form at the same resolution.
pub fn optimize_profile_search(
    req: &SteeringRequest,
    model: &ScatteringModel,
    resolution_deg: f64,
    pinned: usize,
) -> Result<SearchOutcome> {
    check_resolution(resolution_deg)?;
    if req.harmonic == 0 {
        return Err(Error::Unsupported("m = 0 is not steerable".into()));
    }
    if model.geometry != req.geometry {
        return Err(Error::InvalidInput(
            "request and model geometries differ".into(),
        ));
    }
    let n = model.geometry.element_count();
    if pinned >= n {
        return Err(Error::Parameter(format!(
            "pinned element {pinned} out of range 0..{n}"
        )));
    }
    let levels = (360.0 / resolution_deg).round() as usize;
    let target = req.desired_azimuth_deg;
    let m = req.harmonic;

    // Per-element contribution at each lattice phase.
    let rows = model.geometry.rows;
    let mut table = Vec::with_capacity(n);
    for p in 0..model.geometry.cols {
        for q in 0..rows {
            let steer = model.steering_term(p, q, 90.0, target);
            let mut row = Vec::with_capacity(levels);
            for k in 0..levels {
                row.push(steer * model.element_coefficient(k as f64 * resolution_deg, m)?);
            }
            table.push(row);
        }
    }

    let mut state: Vec<usize> = if model.geometry.is_linear() {
        let start = progressive_phase_profile(req, resolution_deg)?;
        let idx: Vec<usize> = start
            .phases_deg()
            .iter()
            .map(|p| (p / resolution_deg).round() as usize % levels)
            .collect();
        let shift = idx[pinned];
        idx.iter().map(|k| (k + levels - shift) % levels).collect()
    } else {
        vec![0; n]
    };

    let mut sum: num_complex::Complex64 = (0..n).map(|e| table[e][state[e]]).sum();
    let mut best = sum.norm();
    let mut passes = 0;
    let mut converged = false;
    while passes < MAX_SEARCH_PASSES {
        passes += 1;
        let mut improved = false;
        for e in (0..n).filter(|&e| e != pinned) {
            let others = sum - table[e][state[e]];
            let mut choice = state[e];
            let mut value = best;
            for (k, c) in table[e].iter().enumerate() {
                let v = (others + c).norm();
                if v > value * (1.0 + 1e-14) {
                    value = v;
                    choice = k;
                }
            }
            if choice != state[e] {
                state[e] = choice;
                sum = others + table[e][choice];
                best = sum.norm();
                improved = true;
            }
        }
        if !improved {
            converged = true;
            break;
        }
    }

    let phases: Vec<f64> = state.iter().map(|&k| k as f64 * resolution_deg).collect();
    let profile = PhaseProfile::new(phases, resolution_deg)?;
    let objective = model
        .harmonic_field(profile.phases_deg(), m, target)?
        .norm();
    Ok(SearchOutcome {
        profile,
        objective,
        passes,
        converged,
    })
}

/// One row of the measured steering catalog of the reference 1×4 device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatalogRow {
    /// Desired front/back direction pair for the +1st harmonic.
    pub desired: (f64, f64),
    pub phases_deg: [f64; 4],
    /// Measured dominance pairs of the +1st harmonic (some rows list two).
    pub measured_plus: &'static [(f64, f64)],
    /// Measured dominance pairs of the -1st harmonic.
    pub measured_minus: &'static [(f64, f64)],
}

impl CatalogRow {
    pub fn profile(&self) -> PhaseProfile {
        PhaseProfile::new(self.phases_deg.to_vec(), DEFAULT_RESOLUTION_DEG)
            .expect("catalog phases are integral")
    }
}

const CATALOG: [CatalogRow; 9] = [
    CatalogRow {
        desired: (50.0, 310.0),
        phases_deg: [0.0, 244.0, 129.0, 13.0],
        measured_plus: &[(50.0, 310.0)],
        measured_minus: &[(140.0, 220.0)],
    },
    CatalogRow {
        desired: (60.0, 300.0),
        phases_deg: [0.0, 270.0, 180.0, 90.0],
        measured_plus: &[(60.0, 300.0)],
        measured_minus: &[(130.0, 230.0)],
    },
    CatalogRow {
        desired: (70.0, 290.0),
        phases_deg: [0.0, 298.0, 237.0, 175.0],
        measured_plus: &[(70.0, 290.0)],
        measured_minus: &[(110.0, 250.0), (120.0, 240.0)],
    },
    CatalogRow {
        desired: (80.0, 280.0),
        phases_deg: [0.0, 329.0, 297.0, 266.0],
        measured_plus: &[(80.0, 280.0)],
        measured_minus: &[(100.0, 260.0)],
    },
    CatalogRow {
        desired: (90.0, 270.0),
        phases_deg: [0.0, 0.0, 0.0, 0.0],
        measured_plus: &[(90.0, 270.0)],
        measured_minus: &[(90.0, 270.0)],
    },
    CatalogRow {
        desired: (100.0, 260.0),
        phases_deg: [0.0, 31.0, 63.0, 94.0],
        measured_plus: &[(100.0, 260.0)],
        measured_minus: &[(80.0, 280.0)],
    },
    CatalogRow {
        desired: (110.0, 250.0),
        phases_deg: [0.0, 62.0, 123.0, 185.0],
        measured_plus: &[(110.0, 250.0), (120.0, 240.0)],
        measured_minus: &[(70.0, 290.0)],
    },
    CatalogRow {
        desired: (120.0, 240.0),
        phases_deg: [0.0, 90.0, 180.0, 270.0],
        measured_plus: &[(130.0, 230.0)],
        measured_minus: &[(60.0, 300.0)],
    },
    CatalogRow {
        desired: (130.0, 230.0),
        phases_deg: [0.0, 116.0, 231.0, 347.0],
        measured_plus: &[(140.0, 220.0)],
        measured_minus: &[(50.0, 310.0)],
    },
];

/// The nine measured steering cases of the reference device, in order.
pub fn table2_catalog() -> &'static [CatalogRow] {
    &CATALOG
}
