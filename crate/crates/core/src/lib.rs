//! Harmonic beam steering for time-modulated reconfigurable intelligent
//! surfaces.
//!
//! Each element toggles its antenna load between two states with a delayed
//! square wave. The resulting periodic reflection coefficient scatters the
//! carrier into harmonics `f_c ± m·f₀`, and per-element delays steer those
//! harmonics. The crate covers the chain end to end:
//!
//! * [`circuit`]: reflection coefficients from impedances and their contrast.
//! * [`modulation`]: the square-wave trajectory and its Fourier coefficients.
//! * [`array`]: far-field harmonic patterns of an element grid.
//! * [`steering`]: phase-profile synthesis toward a target azimuth.
//! * [`schedule`]: tick-level switch schedules for a controller.
//! * [`compare`]: agreement between predictions and measured angle sweeps.
//! * [`cli`]: the `ris-harmonics` command-line front end.

pub mod angle;
pub mod array;
pub mod circuit;
pub mod cli;
pub mod compare;
pub mod config;
pub mod error;
pub mod export;
pub mod modulation;
pub mod schedule;
pub mod steering;

pub use array::{
    dominance_direction, ArrayGeometry, ElementPatternModel, Excitation, HarmonicPattern,
    Normalization, ScatteringModel,
};
pub use circuit::{
    modulation_metrics, reflection_coefficient, ComplexValue, ImpedancePoint, ImpedanceTable,
    ReflectionPair,
};
pub use error::{Error, Result};
pub use modulation::{
    delay_from_phase, fourier_coefficient, fourier_coefficient_numeric, phase_from_delay,
    reconstruct_gamma, ModulationWaveform,
};
pub use schedule::{build_switch_schedule, schedule_roundtrip_phases, SwitchSchedule};
pub use steering::{
    optimize_profile_search, progressive_phase_profile, quantize_profile, table2_catalog,
    PhaseProfile, SteeringRequest,
};
