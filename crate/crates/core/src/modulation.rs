//! Square-wave reflection trajectory and its Fourier series.
//!
//! Over one period `T₀ = 1/f₀` the element sits in state 2 during
//! `[τ, τ + t_pw)` (taken modulo `T₀`) and in state 1 elsewhere.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::angle::wrap_deg;
use crate::circuit::{ComplexValue, ReflectionPair};
use crate::error::{Error, Result};

/// Control frequency used by the reference controller, Hz.
pub const REFERENCE_F0_HZ: f64 = 313.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulationWaveform {
    pair: ReflectionPair,
    f0: f64,
    tau: f64,
    t_pw: f64,
}

impl ModulationWaveform {
    pub fn new(pair: ReflectionPair, f0: f64, tau: f64, t_pw: f64) -> Result<Self> {
        if !(f0.is_finite() && f0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "f0 must be positive, got {f0}"
            )));
        }
        let period = 1.0 / f0;
        if !(tau.is_finite() && tau >= 0.0 && tau < period) {
            return Err(Error::InvalidInput(format!(
                "delay {tau} s outside [0, {period})"
            )));
        }
        if !(t_pw.is_finite() && t_pw > 0.0 && t_pw < period) {
            return Err(Error::InvalidInput(format!(
                "pulse width {t_pw} s outside (0, {period})"
            )));
        }
        Ok(Self {
            pair,
            f0,
            tau,
            t_pw,
        })
    }

    /// Zero-delay waveform with the given duty cycle `t_pw / T₀`.
    pub fn with_duty(pair: ReflectionPair, f0: f64, duty: f64) -> Result<Self> {
        if !(duty > 0.0 && duty < 1.0) {
            return Err(Error::InvalidInput(format!(
                "duty must be in (0, 1), got {duty}"
            )));
        }
        if !(f0.is_finite() && f0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "f0 must be positive, got {f0}"
            )));
        }
        Self::new(pair, f0, 0.0, duty / f0)
    }

    /// The same waveform shifted to start its pulse at `tau` (reduced mod `T₀`).
    pub fn with_delay(&self, tau: f64) -> Result<Self> {
        let period = self.period();
        let mut t = tau.rem_euclid(period);
        if t >= period {
            t = 0.0;
        }
        Self::new(self.pair, self.f0, t, self.t_pw)
    }

    pub fn pair(&self) -> &ReflectionPair {
        &self.pair
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn pulse_width(&self) -> f64 {
        self.t_pw
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f0
    }

    pub fn duty(&self) -> f64 {
        self.t_pw * self.f0
    }

    /// True when `t` falls inside the state-2 pulse.
    pub fn in_pulse(&self, t: f64) -> bool {
        (t - self.tau).rem_euclid(self.period()) < self.t_pw
    }

    /// `Γ(t)`.
    pub fn state(&self, t: f64) -> ComplexValue {
        if self.in_pulse(t) {
            self.pair.gamma_off()
        } else {
            self.pair.gamma_on()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicCoefficient {
    pub m: i32,
    pub value: ComplexValue,
}

/// Closed-form Fourier coefficient `c_m` of the waveform.
///
/// For `m != 0`:
/// `c_m = j/(2πm) · (Γ⁽¹⁾ - Γ⁽²⁾) · e^{-j2πm f₀ τ} · (1 - e^{-j2πm f₀ t_pw})`.
/// The `m = 0` term is the duty-weighted average, the limit of the defining
/// integral where the closed form is 0/0.
pub fn fourier_coefficient(w: &ModulationWaveform, m: i32) -> ComplexValue {
    let pair = w.pair();
    if m == 0 {
        return pair.gamma_on() + (pair.gamma_off() - pair.gamma_on()) * w.duty();
    }
    let mf = m as f64;
    let j = Complex64::i();
    let delay = Complex64::from_polar(1.0, -2.0 * PI * mf * w.f0() * w.tau());
    let gate = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -2.0 * PI * mf * w.duty());
    j / (2.0 * PI * mf) * pair.contrast() * delay * gate
}

pub fn harmonic_coefficients(
    w: &ModulationWaveform,
    max_harmonic: u32,
) -> Vec<HarmonicCoefficient> {
    let k = max_harmonic as i32;
    (-k..=k)
        .map(|m| HarmonicCoefficient {
            m,
            value: fourier_coefficient(w, m),
        })
        .collect()
}

/// Midpoint-rule evaluation of `(1/T₀)∫₀^{T₀} Γ(t) e^{-j2πm f₀ t} dt`.
///
/// The period is cut at both switch instants so no sub-interval straddles an
/// edge; `steps` is distributed across the pieces in proportion to length.
pub fn fourier_coefficient_numeric(
    w: &ModulationWaveform,
    m: i32,
    steps: usize,
) -> Result<ComplexValue> {
    if steps < 1000 {
        return Err(Error::Parameter(format!(
            "quadrature needs at least 1000 steps, got {steps}"
        )));
    }
    // Work in normalized time u = t/T₀ ∈ [0, 1).
    let start = w.tau() * w.f0();
    let end = start + w.duty();
    let mut cuts = vec![0.0, 1.0];
    for c in [start, end] {
        let c = c.rem_euclid(1.0);
        if c > 0.0 && c < 1.0 {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();

    let omega = -2.0 * PI * m as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let level = if (mid - start).rem_euclid(1.0) < w.duty() {
            w.pair().gamma_off()
        } else {
            w.pair().gamma_on()
        };
        let n = ((steps as f64 * len).round() as usize).max(1);
        let h = len / n as f64;
        // Phasor recurrence, re-anchored every block to bound drift.
        let rot = Complex64::from_polar(1.0, omega * h);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut i = 0;
        while i < n {
            let mut z = Complex64::from_polar(1.0, omega * (a + (i as f64 + 0.5) * h));
            for _ in i..(i + 1024).min(n) {
                sum += z;
                z *= rot;
            }
            i += 1024;
        }
        acc += level * sum * h;
    }
    Ok(acc)
}

/// Partial Fourier sum `Σ_{|m|≤K} c_m e^{j2πm f₀ t}`.
pub fn reconstruct_gamma(
    w: &ModulationWaveform,
    t: f64,
    max_harmonic: u32,
) -> Result<ComplexValue> {
    if max_harmonic < 1 {
        return Err(Error::Parameter("max_harmonic must be at least 1".into()));
    }
    let k = max_harmonic as i32;
    let mut acc = fourier_coefficient(w, 0);
    for m in 1..=k {
        let arg = 2.0 * PI * m as f64 * w.f0() * t;
        acc += fourier_coefficient(w, m) * Complex64::from_polar(1.0, arg)
            + fourier_coefficient(w, -m) * Complex64::from_polar(1.0, -arg);
    }
    Ok(acc)
}

/// Baseband phase `360°·f₀·τ` reduced into `[0, 360)`.
pub fn phase_from_delay(tau: f64, f0: f64) -> Result<f64> {
    if !(f0.is_finite() && f0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "f0 must be positive, got {f0}"
        )));
    }
    Ok(wrap_deg(360.0 * f0 * tau))
}

/// Inverse of [`phase_from_delay`]: a delay in `[0, T₀)`.
pub fn delay_from_phase(psi_deg: f64, f0: f64) -> Result<f64> {
    if !(f0.is_finite() && f0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "f0 must be positive, got {f0}"
        )));
    }
    let tau = wrap_deg(psi_deg) / 360.0 / f0;
    Ok(if tau >= 1.0 / f0 { 0.0 } else { tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ideal(tau_fraction: f64) -> ModulationWaveform {
        let w = ModulationWaveform::with_duty(ReflectionPair::antipodal(), REFERENCE_F0_HZ, 0.5)
            .unwrap();
        w.with_delay(tau_fraction * w.period()).unwrap()
    }

    fn random_waveform(rng: &mut ChaCha8Rng) -> ModulationWaveform {
        let mut g = || ComplexValue::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(-PI..PI));
        let pair = ReflectionPair::new(g(), g()).unwrap();
        let f0 = rng.gen_range(10.0..1e4);
        let duty = rng.gen_range(0.05..0.95);
        let w = ModulationWaveform::with_duty(pair, f0, duty).unwrap();
        w.with_delay(rng.gen_range(0.0..1.0) * w.period()).unwrap()
    }

    #[test]
    fn ideal_fundamental() {
        let c = fourier_coefficient(&ideal(0.0), 1);
        assert!((c - Complex64::new(0.0, 2.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn even_harmonics_vanish_at_half_duty() {
        let w = ideal(0.13);
        for m in [-8, -6, -4, -2, 2, 4, 6, 8, 100] {
            assert!(fourier_coefficient(&w, m).norm() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn quarter_period_delay_rotates_fundamental() {
        let c = fourier_coefficient(&ideal(0.25), 1);
        let q = fourier_coefficient_numeric(&ideal(0.25), 1, 1_000_000).unwrap();
        assert!((q - Complex64::new(2.0 / PI, 0.0)).norm() < 1e-6);
        assert!((c - q).norm() < 1e-6);
        assert!((c - Complex64::new(std::f64::consts::FRAC_2_PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn numeric_fundamental_and_dc() {
        let q = fourier_coefficient_numeric(&ideal(0.0), 1, 1_000_000).unwrap();
        assert!((q - Complex64::new(0.0, 2.0 / PI)).norm() < 1e-6);

        let pair =
            ReflectionPair::new(ComplexValue::new(0.3, 0.4), ComplexValue::new(-0.5, 0.1)).unwrap();
        let w = ModulationWaveform::new(pair, 100.0, 0.0037, 0.003).unwrap();
        // 30% in state 2, 70% in state 1
        let avg = ComplexValue::new(0.7 * 0.3 + 0.3 * -0.5, 0.7 * 0.4 + 0.3 * 0.1);
        let q = fourier_coefficient_numeric(&w, 0, 1_000_000).unwrap();
        assert!((q - avg).norm() < 1e-6);
        assert!((fourier_coefficient(&w, 0) - avg).norm() < 1e-12);
    }

    #[test]
    fn constant_waveform_has_no_harmonics() {
        let g = ComplexValue::new(0.2, -0.6);
        let w = ModulationWaveform::new(ReflectionPair::new(g, g).unwrap(), 313.0, 0.001, 0.0005)
            .unwrap();
        for m in [-3, -1, 1, 2, 7] {
            assert!(fourier_coefficient_numeric(&w, m, 10_000).unwrap().norm() < 1e-9);
            assert_eq!(fourier_coefficient(&w, m).norm(), 0.0);
        }
        for t in [0.0, 0.0007, 0.002] {
            assert_eq!(reconstruct_gamma(&w, t, 5).unwrap(), g);
        }
    }

    #[test]
    fn quadrature_step_floor() {
        assert!(matches!(
            fourier_coefficient_numeric(&ideal(0.0), 1, 999),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let w = random_waveform(&mut rng);
            for m in -9..=9 {
                let d = (fourier_coefficient(&w, m)
                    - fourier_coefficient_numeric(&w, m, 200_000).unwrap())
                .norm();
                assert!(d < 1e-6, "m = {m}: {d}");
            }
        }
    }

    #[test]
    fn reconstruction_interior_and_edge() {
        let w = ideal(0.0);
        let mid = reconstruct_gamma(&w, w.period() / 4.0, 99).unwrap();
        assert!((mid - Complex64::new(-1.0, 0.0)).norm() < 0.02, "{mid}");
        let edge = reconstruct_gamma(&w, 0.0, 999).unwrap();
        assert!(edge.norm() < 0.05, "{edge}");
        assert!(reconstruct_gamma(&w, 0.0, 0).is_err());
    }

    #[test]
    fn parseval_deficit() {
        let w = ideal(0.0);
        let energy: f64 = harmonic_coefficients(&w, 999)
            .iter()
            .map(|c| c.value.norm_sqr())
            .sum();
        // |Γ(t)|² = 1 everywhere
        assert!(energy <= 1.0 + 1e-12);
        assert!(1.0 - energy < 1e-3, "{energy}");
    }

    #[test]
    fn phase_delay_examples() {
        let f0 = REFERENCE_F0_HZ;
        assert!((phase_from_delay(0.25 / f0, f0).unwrap() - 90.0).abs() < 1e-9);
        assert_eq!(phase_from_delay(0.0, f0).unwrap(), 0.0);
        let tau = delay_from_phase(270.0, f0).unwrap();
        assert!((tau - 0.75 / 313.0).abs() < 1e-15);
        assert!((tau * 1e3 - 2.3962).abs() < 1e-4);
        assert!(delay_from_phase(10.0, 0.0).is_err());
    }

    #[test]
    fn waveform_validation() {
        let p = ReflectionPair::antipodal();
        assert!(ModulationWaveform::new(p, 0.0, 0.0, 0.1).is_err());
        assert!(ModulationWaveform::new(p, 1.0, 1.0, 0.5).is_err());
        assert!(ModulationWaveform::new(p, 1.0, -0.1, 0.5).is_err());
        assert!(ModulationWaveform::new(p, 1.0, 0.0, 1.0).is_err());
        assert!(ModulationWaveform::new(p, 1.0, 0.0, 0.0).is_err());
        let w = ModulationWaveform::new(p, 1.0, 0.9, 0.5).unwrap();
        // pulse wraps through the period boundary
        assert!(w.in_pulse(0.95) && w.in_pulse(0.1) && !w.in_pulse(0.5));
    }

    proptest! {
        #[test]
        fn magnitude_independent_of_delay(seed in any::<u64>(), m in -9i32..=9, frac in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_waveform(&mut rng);
            let shifted = w.with_delay(frac * w.period()).unwrap();
            let a = fourier_coefficient(&w, m);
            let b = fourier_coefficient(&shifted, m);
            prop_assert!((a.norm() - b.norm()).abs() < 1e-12);
            if m != 0 {
                prop_assert!(a.norm() <= w.pair().contrast().norm() / (PI * m.abs() as f64) + 1e-12);
            }
        }

        #[test]
        fn delay_rotates_phase(m in prop::sample::select(vec![-7, -3, -1, 1, 3, 5]), frac in 0.0f64..1.0) {
            let w0 = ideal(0.0);
            let w = w0.with_delay(frac * w0.period()).unwrap();
            let measured = (fourier_coefficient(&w, m).arg() - fourier_coefficient(&w0, m).arg()).to_degrees();
            let expected = -360.0 * m as f64 * w.f0() * w.tau();
            let d = crate::angle::wrap_signed_deg(measured - expected).abs();
            prop_assert!(d < 1e-9, "{measured} vs {expected}");
        }

        #[test]
        fn phase_delay_round_trip(psi in 0.0f64..360.0, f0 in 1.0f64..1e5) {
            let tau = delay_from_phase(psi, f0).unwrap();
            prop_assert!(tau >= 0.0 && tau < 1.0 / f0);
            let back = phase_from_delay(tau, f0).unwrap();
            prop_assert!(crate::angle::circular_distance_deg(back, psi) < 1e-9);
        }
    }
}
