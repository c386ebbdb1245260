//! One-shot measurement runs shared by the sweep, population, and calibration
//! layers: integrate a configuration from the steady-state initial condition
//! and read comb-line powers out of the spectrum.

use crate::combgen::CombSpec;
use crate::error::Result;
use crate::integrator::{integrate, FieldRecord, SimGrid};
use crate::model::{default_initial_state, DriveConfig, LaserParams, Tone};
use crate::spectrum::{comb_powers, power_spectrum, WindowKind};

/// Everything needed to run one configuration and read tracked line powers.
#[derive(Debug, Clone)]
pub struct ProbeSetup {
    pub params: LaserParams,
    pub comb: CombSpec,
    pub bias_ratio: f64,
    pub grid: SimGrid,
    pub tracked_offsets: Vec<f64>,
    pub search_halfwidth: f64,
    pub window: WindowKind,
}

impl ProbeSetup {
    /// Integrate with the given tones and return the recorded field.
    pub fn record(&self, tones: &[Tone]) -> Result<FieldRecord> {
        let drive = DriveConfig::new(self.bias_ratio, tones.to_vec())?;
        let initial = default_initial_state(&self.params, self.bias_ratio);
        integrate(&self.params, &self.comb, &drive, &self.grid, &initial)
    }

    /// Integrate with the given tones and return tracked comb powers, dB.
    pub fn powers(&self, tones: &[Tone]) -> Result<Vec<f64>> {
        let record = self.record(tones)?;
        let spec = power_spectrum(&record, self.window)?;
        comb_powers(&spec, &self.tracked_offsets, self.search_halfwidth)
    }

    /// Tracked comb powers of the no-input run.
    pub fn baseline_powers(&self) -> Result<Vec<f64>> {
        self.powers(&[])
    }
}

/// A quarter of the smallest adjacent spacing: the default peak-search window.
pub fn default_search_halfwidth(offsets: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = offsets.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(f64::INFINITY, f64::min)
        .min(f64::INFINITY)
        / 4.0
}
