//! C ABI over `ris-harmonics`.
//!
//! Models are opaque heap handles created by `ris_model_new*` and released
//! with `ris_model_free`. Every fallible call returns a [`RisStatus`]; on
//! failure `ris_last_error` gives a thread-local message that stays valid
//! until the next failing call on the same thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ris_harmonics::array::{
    ArrayGeometry, ElementPatternModel, Excitation, ScatteringModel, SPEED_OF_LIGHT,
};
use ris_harmonics::circuit::{
    reflection_coefficient, ComplexValue, ImpedancePoint, ReflectionPair,
};
use ris_harmonics::modulation::{fourier_coefficient, ModulationWaveform, REFERENCE_F0_HZ};
use ris_harmonics::schedule::build_switch_schedule;
use ris_harmonics::steering::{
    optimize_profile_search, progressive_phase_profile, SteeringRequest,
};
use ris_harmonics::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Singular = 3,
    Dimension = 4,
    Unsupported = 5,
    BufferTooSmall = 6,
    Undefined = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisComplex {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexValue> for RisComplex {
    fn from(z: ComplexValue) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<RisComplex> for ComplexValue {
    fn from(z: RisComplex) -> Self {
        ComplexValue::new(z.re, z.im)
    }
}

/// Opaque scattering model handle.
pub struct RisModel {
    inner: ScatteringModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RisStatus {
    match e {
        Error::SingularInput(_) => RisStatus::Singular,
        Error::Dimension { .. } => RisStatus::Dimension,
        Error::Unsupported(_) => RisStatus::Unsupported,
        Error::UndefinedDominance | Error::UndefinedLoss => RisStatus::Undefined,
        _ => RisStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (RisStatus, String)>) -> RisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RisStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RisStatus::Panic
        }
    }
}

fn lift(e: Error) -> (RisStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RisStatus, String) {
    (RisStatus::NullPointer, format!("{what} is null"))
}

unsafe fn phases<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], (RisStatus, String)> {
    if ptr.is_null() {
        return Err(null("phases"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// Message for the most recent failure on this thread, or NULL.
#[no_mangle]
pub extern "C" fn ris_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn ris_reflection_coefficient(
    z_load: RisComplex,
    z_antenna: RisComplex,
    out: *mut RisComplex,
) -> RisStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = reflection_coefficient(z_load.into(), z_antenna.into()).map_err(lift)?;
        *out = g.into();
        Ok(())
    })
}

/// Fourier coefficient `c_m` of a two-state square wave.
#[no_mangle]
pub unsafe extern "C" fn ris_fourier_coefficient(
    gamma_on: RisComplex,
    gamma_off: RisComplex,
    f0_hz: f64,
    tau_s: f64,
    pulse_width_s: f64,
    m: i32,
    out: *mut RisComplex,
) -> RisStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pair = ReflectionPair::new(gamma_on.into(), gamma_off.into()).map_err(lift)?;
        let w = ModulationWaveform::new(pair, f0_hz, tau_s, pulse_width_s).map_err(lift)?;
        *out = fourier_coefficient(&w, m).into();
        Ok(())
    })
}

/// Create a model. `element_exponent <= 0` selects isotropic elements.
#[no_mangle]
pub unsafe extern "C" fn ris_model_new(
    rows: usize,
    cols: usize,
    dx_over_lambda: f64,
    dy_over_lambda: f64,
    carrier_hz: f64,
    gamma_on: RisComplex,
    gamma_off: RisComplex,
    f0_hz: f64,
    duty: f64,
    element_exponent: f64,
    out: *mut *mut RisModel,
) -> RisStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
            return Err((
                RisStatus::InvalidInput,
                format!("carrier must be positive, got {carrier_hz}"),
            ));
        }
        let lambda = SPEED_OF_LIGHT / carrier_hz;
        let geometry = ArrayGeometry::new(
            rows,
            cols,
            dx_over_lambda * lambda,
            dy_over_lambda * lambda,
            lambda,
        )
        .map_err(lift)?;
        let element = if element_exponent > 0.0 {
            ElementPatternModel::CosinePower {
                exponent: element_exponent,
                peak_gain_dbi: 0.0,
            }
        } else {
            ElementPatternModel::Isotropic
        };
        let pair = ReflectionPair::new(gamma_on.into(), gamma_off.into()).map_err(lift)?;
        let waveform = ModulationWaveform::with_duty(pair, f0_hz, duty).map_err(lift)?;
        let inner = ScatteringModel::new(
            geometry,
            element,
            Excitation {
                carrier_hz,
                amplitude: 1.0,
            },
            waveform,
        )
        .map_err(lift)?;
        *out = Box::into_raw(Box::new(RisModel { inner }));
        Ok(())
    })
}

/// The 1×4 half-wavelength reference device at 2.45 GHz with its tabulated
/// loads, 313 Hz control and the fitted cosine-power element.
#[no_mangle]
pub extern "C" fn ris_model_new_reference() -> *mut RisModel {
    let build = || -> ris_harmonics::Result<ScatteringModel> {
        let pair = ImpedancePoint::reference_2g45().reflection_pair()?;
        ScatteringModel::new(
            ArrayGeometry::reference_1x4(),
            ElementPatternModel::default(),
            Excitation::default(),
            ModulationWaveform::with_duty(pair, REFERENCE_F0_HZ, 0.5)?,
        )
    };
    match build() {
        Ok(inner) => Box::into_raw(Box::new(RisModel { inner })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn ris_model_free(model: *mut RisModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of elements, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ris_model_element_count(model: *const RisModel) -> usize {
    model
        .as_ref()
        .map_or(0, |m| m.inner.geometry.element_count())
}

/// `F_m` at azimuth `azimuth_deg` in the `θ = 90°` cut.
#[no_mangle]
pub unsafe extern "C" fn ris_harmonic_field(
    model: *const RisModel,
    phases_deg: *const f64,
    len: usize,
    m: i32,
    azimuth_deg: f64,
    out: *mut RisComplex,
) -> RisStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ph = phases(phases_deg, len)?;
        *out = model
            .inner
            .harmonic_field(ph, m, azimuth_deg)
            .map_err(lift)?
            .into();
        Ok(())
    })
}

/// `|F_m|` on the uniform azimuth grid. Writes `360/step` magnitudes; on
/// `RIS_STATUS_BUFFER_TOO_SMALL` `*out_len` holds the required length.
#[no_mangle]
pub unsafe extern "C" fn ris_pattern_sweep(
    model: *const RisModel,
    phases_deg: *const f64,
    len: usize,
    m: i32,
    grid_step_deg: f64,
    normalize: bool,
    out_magnitudes: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> RisStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let ph = phases(phases_deg, len)?;
        let pattern = model
            .inner
            .pattern_sweep(ph, m, grid_step_deg, normalize)
            .map_err(lift)?;
        let n = pattern.samples.len();
        *out_len = n;
        if out_magnitudes.is_null() || capacity < n {
            return Err((
                RisStatus::BufferTooSmall,
                format!("need {n} slots, have {capacity}"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out_magnitudes, n);
        for (d, s) in dst.iter_mut().zip(&pattern.samples) {
            *d = s.magnitude;
        }
        Ok(())
    })
}

fn write_profile(
    phases: &[f64],
    out: *mut f64,
    capacity: usize,
) -> Result<(), (RisStatus, String)> {
    if out.is_null() {
        return Err(null("out_phases"));
    }
    if capacity < phases.len() {
        return Err((
            RisStatus::BufferTooSmall,
            format!("need {} slots, have {capacity}", phases.len()),
        ));
    }
    unsafe { std::slice::from_raw_parts_mut(out, phases.len()) }.copy_from_slice(phases);
    Ok(())
}

/// Closed-form progressive-phase profile for a single-row model.
#[no_mangle]
pub unsafe extern "C" fn ris_progressive_profile(
    model: *const RisModel,
    target_azimuth_deg: f64,
    m: i32,
    resolution_deg: f64,
    out_phases: *mut f64,
    capacity: usize,
) -> RisStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let req =
            SteeringRequest::new(target_azimuth_deg, m, model.inner.geometry).map_err(lift)?;
        let p = progressive_phase_profile(&req, resolution_deg).map_err(lift)?;
        write_profile(p.phases_deg(), out_phases, capacity)
    })
}

/// Coordinate-ascent profile; `*out_magnitude` receives the achieved `|F_m|`.
#[no_mangle]
pub unsafe extern "C" fn ris_search_profile(
    model: *const RisModel,
    target_azimuth_deg: f64,
    m: i32,
    resolution_deg: f64,
    pinned_element: usize,
    out_phases: *mut f64,
    capacity: usize,
    out_magnitude: *mut f64,
) -> RisStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let req =
            SteeringRequest::new(target_azimuth_deg, m, model.inner.geometry).map_err(lift)?;
        let out = optimize_profile_search(&req, &model.inner, resolution_deg, pinned_element)
            .map_err(lift)?;
        write_profile(out.profile.phases_deg(), out_phases, capacity)?;
        if !out_magnitude.is_null() {
            *out_magnitude = out.objective;
        }
        Ok(())
    })
}

/// Rise and fall ticks of each channel's 50% duty schedule. Both output
/// arrays must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn ris_schedule_ticks(
    phases_deg: *const f64,
    len: usize,
    f0_hz: f64,
    ticks_per_period: u32,
    out_rise: *mut u32,
    out_fall: *mut u32,
) -> RisStatus {
    guard(|| {
        let ph = phases(phases_deg, len)?;
        if out_rise.is_null() || out_fall.is_null() {
            return Err(null("tick output"));
        }
        let s = build_switch_schedule(ph, f0_hz, ticks_per_period).map_err(lift)?;
        let timings = s.timings().map_err(lift)?;
        let rise = std::slice::from_raw_parts_mut(out_rise, len);
        let fall = std::slice::from_raw_parts_mut(out_fall, len);
        for (i, t) in timings.iter().enumerate() {
            rise[i] = t.rise_tick;
            fall[i] = t.fall_tick;
        }
        Ok(())
    })
}
