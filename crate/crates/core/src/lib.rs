//! Deterministic simulator of a comb-injected semiconductor laser acting as a
//! photonic neural population.
//!
//! The laser's rate equations are integrated under RF pump modulation while an
//! optical frequency comb is injected; comb-line powers read out of the field
//! spectrum behave like neuron activities. On top of that primitive the crate
//! provides tuning-curve sweeps, the dual-comb heterodyne beat readout,
//! multi-band pattern classification, and detuning pre-calibration.
//!
//! Everything is deterministic: integration is fixed-step, parallel sweeps
//! aggregate by index rather than completion order, and pattern jitter comes
//! from an integer seed stream.

pub mod calibration;
pub mod combgen;
pub mod error;
pub mod integrator;
pub mod model;
pub mod population;
pub mod probe;
pub mod spectrum;
pub mod sweep;

pub use combgen::{pm_comb, shift_comb, uniform_comb, CombLine, CombSpec};
pub use error::{Error, Result};
pub use integrator::{default_grid, integrate, FieldRecord, SimGrid};
pub use model::{
    default_initial_state, derivative, pump_rate, relaxation_frequency, steady_state,
    DriveConfig, LaserParams, LaserState, Tone,
};
pub use spectrum::{beat_readout, comb_powers, power_spectrum, BeatReadout, SpectrumResult, WindowKind};
