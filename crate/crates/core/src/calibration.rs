//! Detuning pre-calibration: sweep f_detu, monitor the state-comb power, and
//! pick the operating point nearest a target power.
//!
//! In the hardware procedure the knob is the laser bias current; in the
//! simulation's rotating frame the equivalent knob is the detuning itself.

use rayon::prelude::*;

use crate::combgen::uniform_comb;
use crate::error::{Error, Result};
use crate::integrator::SimGrid;
use crate::model::LaserParams;
use crate::probe::ProbeSetup;
use crate::spectrum::WindowKind;

/// Uniform-comb recipe whose detuning is overridden per sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombTemplate {
    pub spacing: f64,
    pub count: usize,
    pub amplitude: f64,
}

/// State-comb power versus detuning, ascending in detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSweep {
    pub detunings: Vec<f64>,
    pub state_comb_powers: Vec<f64>,
    /// Index of the state comb (nearest line) within the generated comb.
    pub state_comb_index: usize,
}

impl CalibrationSweep {
    /// Count of points where the power *increases* with detuning, i.e.
    /// violations of the expected non-increasing trend.
    pub fn monotonicity_violations(&self, tolerance_db: f64) -> usize {
        self.state_comb_powers
            .windows(2)
            .filter(|p| p[1] > p[0] + tolerance_db)
            .count()
    }
}

/// One unmodulated injected run per detuning; detunings are canonicalized to
/// ascending order regardless of the input range direction.
pub fn calibration_sweep(
    params: &LaserParams,
    template: CombTemplate,
    bias_ratio: f64,
    detuning_start: f64,
    detuning_stop: f64,
    detuning_step: f64,
    grid: &SimGrid,
) -> Result<CalibrationSweep> {
    if !(detuning_step > 0.0) {
        return Err(Error::InvalidRange(format!(
            "detuning_step must be > 0, got {detuning_step:e}"
        )));
    }
    let (lo, hi) = if detuning_start <= detuning_stop {
        (detuning_start, detuning_stop)
    } else {
        (detuning_stop, detuning_start)
    };
    let n = ((hi - lo) / detuning_step * (1.0 + 1e-12)).floor() as usize + 1;
    let detunings: Vec<f64> = (0..n).map(|i| lo + i as f64 * detuning_step).collect();

    let state_comb_powers: Vec<f64> = detunings
        .par_iter()
        .map(|&d| {
            let comb = uniform_comb(d, template.spacing, template.count, template.amplitude)
                .map_err(|e| e.at_frequency(d))?;
            let state_idx = comb.state_comb_index().expect("non-empty comb");
            let offset = comb.lines()[state_idx].offset_hz;
            let probe = ProbeSetup {
                params: *params,
                comb,
                bias_ratio,
                grid: *grid,
                tracked_offsets: vec![offset],
                search_halfwidth: template.spacing / 4.0,
                window: WindowKind::Hann,
            };
            probe
                .baseline_powers()
                .map(|p| p[0])
                .map_err(|e| e.at_frequency(d))
        })
        .collect::<Result<_>>()?;

    // The state comb is the nearest line; with the centered placement rule it
    // is the central line for every detuning below spacing/2, and line index
    // is constant across the sweep by construction.
    let reference = uniform_comb(detunings[0], template.spacing, template.count, template.amplitude)?;
    let state_comb_index = reference.state_comb_index().expect("non-empty comb");

    Ok(CalibrationSweep { detunings, state_comb_powers, state_comb_index })
}

/// Detuning whose state-comb power is nearest `target_power_db`, with linear
/// interpolation across the bracketing pair where the sweep is locally
/// monotone. Ties resolve toward the smaller detuning. Targets more than
/// 3 dB outside the sweep's power range are an error.
pub fn select_operating_point(sweep: &CalibrationSweep, target_power_db: f64) -> Result<f64> {
    let n = sweep.detunings.len();
    if n == 0 {
        return Err(Error::InvalidRange("empty calibration sweep".into()));
    }
    let min = sweep.state_comb_powers.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = sweep.state_comb_powers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if target_power_db < min - 3.0 || target_power_db > max + 3.0 {
        return Err(Error::TargetOutOfRange { target_db: target_power_db, min_db: min, max_db: max });
    }

    // Exact hit wins outright (smallest detuning among exact hits).
    for i in 0..n {
        if sweep.state_comb_powers[i] == target_power_db {
            return Ok(sweep.detunings[i]);
        }
    }

    // Interpolate inside every bracketing segment, else fall back to the
    // nearest sample point.
    let mut best: Option<(f64, f64)> = None; // (|power error|, detuning)
    let mut consider = |err: f64, d: f64| match best {
        Some((e, bd)) if err > e + 1e-12 || (err >= e - 1e-12 && d >= bd) => {}
        _ => best = Some((err, d)),
    };
    for i in 0..n - 1 {
        let (p0, p1) = (sweep.state_comb_powers[i], sweep.state_comb_powers[i + 1]);
        let (d0, d1) = (sweep.detunings[i], sweep.detunings[i + 1]);
        let inside = (target_power_db - p0) * (target_power_db - p1) <= 0.0 && p0 != p1;
        if inside {
            let frac = (target_power_db - p0) / (p1 - p0);
            consider(0.0, d0 + frac * (d1 - d0));
        }
    }
    for i in 0..n {
        consider((sweep.state_comb_powers[i] - target_power_db).abs(), sweep.detunings[i]);
    }
    Ok(best.expect("nonempty sweep").1)
}
