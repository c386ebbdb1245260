//! Fixed-step RK4 integration of the rate equations.
//!
//! Deterministic by construction: a fixed step, stage-exact evaluation of the
//! time-dependent injection and pump terms, and no adaptive control, so
//! identical inputs give bit-identical records regardless of scheduling.

use num_complex::Complex64;

use crate::combgen::CombSpec;
use crate::error::{Error, Result};
use crate::model::{self, DriveConfig, LaserParams, LaserState};

/// Time discretization of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid {
    /// Integrator step, s.
    pub dt: f64,
    /// Warm-up discarded before recording, s.
    pub t_transient: f64,
    /// Recorded duration, s.
    pub t_record: f64,
    /// Store every `record_stride`-th step.
    pub record_stride: usize,
}

impl SimGrid {
    pub fn new(dt: f64, t_transient: f64, t_record: f64, record_stride: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {dt:e}")));
        }
        if !(t_transient >= 0.0) || !t_transient.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "t_transient must be >= 0, got {t_transient:e}"
            )));
        }
        if !(t_record > 0.0) || !t_record.is_finite() {
            return Err(Error::InvalidGrid(format!("t_record must be > 0, got {t_record:e}")));
        }
        let steps = t_record / dt;
        if (steps - steps.round()).abs() > (1e-9 * steps).max(1e-6) {
            return Err(Error::InvalidGrid(format!(
                "t_record/dt = {steps} is not an integer number of steps"
            )));
        }
        if record_stride < 1 {
            return Err(Error::InvalidGrid("record_stride must be >= 1".into()));
        }
        Ok(SimGrid { dt, t_transient, t_record, record_stride })
    }

    /// Interval between stored samples, s.
    pub fn sample_interval(&self) -> f64 {
        self.dt * self.record_stride as f64
    }

    fn record_steps(&self) -> usize {
        (self.t_record / self.dt).round() as usize
    }

    fn transient_steps(&self) -> usize {
        let r = self.t_transient / self.dt;
        // Never record before t_transient; snap near-integers, otherwise round up.
        if (r - r.round()).abs() < 1e-9 * r.max(1.0) {
            r.round() as usize
        } else {
            r.ceil() as usize
        }
    }
}

/// Largest frequency the grid must resolve: comb offsets and drive tones.
pub fn max_input_frequency(comb: &CombSpec, drive: &DriveConfig) -> f64 {
    let comb_max = comb.max_abs_offset();
    let tone_max = drive.tones.iter().map(|t| t.frequency_hz).fold(0.0, f64::max);
    comb_max.max(tone_max)
}

/// Grid rules for a run that must resolve `freq_resolution` in the spectrum:
/// `dt = 1/(40*f_max)` rounded down to a power-of-two fraction of 1 ns,
/// `t_record = 1/freq_resolution` rounded up to whole samples,
/// `t_transient = max(200 ns, 100*tau_s)`, and a stride keeping the stored
/// sample rate at or above `4*f_max`.
///
/// `f_max` is the largest comb offset or tone frequency, floored by the
/// relaxation oscillation frequency so the intrinsic resonance stays resolved
/// even for sparse inputs.
pub fn default_grid(
    params: &LaserParams,
    comb: &CombSpec,
    drive: &DriveConfig,
    freq_resolution: f64,
) -> Result<SimGrid> {
    if !(freq_resolution > 0.0) || !freq_resolution.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "freq_resolution must be > 0, got {freq_resolution:e}"
        )));
    }
    let f_ro = model::relaxation_frequency(params, drive.bias_ratio).unwrap_or(0.0);
    let f_max = max_input_frequency(comb, drive).max(f_ro).max(1e9);

    // Smallest power of two with 1 ns / 2^k <= 1 / (40 f_max).
    let k = (40.0 * f_max * 1e-9).log2().ceil().max(0.0) as u32;
    let dt = 1e-9 / (1u64 << k.min(62)) as f64;

    let stride = (1.0 / (4.0 * f_max * dt)).floor().max(1.0) as usize;
    let sample_interval = dt * stride as f64;
    let n_samples = (1.0 / freq_resolution / sample_interval).ceil().max(1.0);
    let t_record = n_samples * sample_interval;

    let t_transient = (100.0 * params.tau_s).max(200e-9);
    SimGrid::new(dt, t_transient, t_record, stride)
}

/// Uniformly sampled complex-field trajectory, the raw simulation product.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    pub samples: Vec<Complex64>,
    /// Seconds between consecutive samples.
    pub sample_interval: f64,
    /// Absolute time of the first sample, s.
    pub start_time: f64,
    /// Carrier density at the same instants, when recorded.
    pub carrier_trace: Option<Vec<f64>>,
}

impl FieldRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Recorded span, s.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.sample_interval
    }

    /// Mean photon density over the record.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Absolute time of sample `i`.
    pub fn sample_time(&self, i: usize) -> f64 {
        self.start_time + i as f64 * self.sample_interval
    }
}

/// One classical RK4 step of size `dt` starting at time `t`.
fn rk4_step(
    state: &LaserState,
    params: &LaserParams,
    comb: &CombSpec,
    drive: &DriveConfig,
    t: f64,
    dt: f64,
) -> LaserState {
    let half = 0.5 * dt;
    let k1 = model::derivative(state, params, comb, drive, t);
    let s2 = LaserState::new(state.field + half * k1.field, state.carrier + half * k1.carrier);
    let k2 = model::derivative(&s2, params, comb, drive, t + half);
    let s3 = LaserState::new(state.field + half * k2.field, state.carrier + half * k2.carrier);
    let k3 = model::derivative(&s3, params, comb, drive, t + half);
    let s4 = LaserState::new(state.field + dt * k3.field, state.carrier + dt * k3.carrier);
    let k4 = model::derivative(&s4, params, comb, drive, t + dt);
    let sixth = dt / 6.0;
    LaserState::new(
        state.field + sixth * (k1.field + 2.0 * (k2.field + k3.field) + k4.field),
        state.carrier + sixth * (k1.carrier + 2.0 * (k2.carrier + k3.carrier) + k4.carrier),
    )
}

/// Integrate the model over transient + record and return the sampled field.
///
/// Fails with [`Error::NyquistViolation`] if the grid is too coarse for the
/// inputs and with [`Error::NumericalBlowup`] if the state leaves 10^6 times
/// its steady-state scale or stops being finite.
pub fn integrate(
    params: &LaserParams,
    comb: &CombSpec,
    drive: &DriveConfig,
    grid: &SimGrid,
    initial: &LaserState,
) -> Result<FieldRecord> {
    params.validate()?;
    drive.validate()?;
    if !initial.is_finite() {
        return Err(Error::InvalidParameter("initial state must be finite".into()));
    }
    let f_max = max_input_frequency(comb, drive);
    if grid.dt * f_max > 0.05 * (1.0 + 1e-12) {
        return Err(Error::NyquistViolation { dt: grid.dt, f_max });
    }

    let r_b = drive.bias_rate(params);
    let photon_scale = (params.tau_p * (r_b - params.lasing_threshold_rate()))
        .max(params.tau_p * r_b);
    let photon_limit = 1e6 * photon_scale;
    let carrier_limit = 1e6 * params.n_th;

    let n_transient = grid.transient_steps();
    let n_record = grid.record_steps();
    let n_samples = n_record / grid.record_stride;

    let mut state = *initial;
    let mut samples = Vec::with_capacity(n_samples);
    let mut carrier = Vec::with_capacity(n_samples);

    let total_steps = n_transient + n_record;
    for step in 0..total_steps {
        if step >= n_transient
            && (step - n_transient) % grid.record_stride == 0
            && samples.len() < n_samples
        {
            samples.push(state.field);
            carrier.push(state.carrier);
        }
        let t = step as f64 * grid.dt;
        state = rk4_step(&state, params, comb, drive, t, grid.dt);

        if !state.is_finite()
            || state.photon_density() > photon_limit
            || state.carrier.abs() > carrier_limit
        {
            return Err(Error::NumericalBlowup {
                t: (step + 1) as f64 * grid.dt,
                detail: format!(
                    "|E|^2 = {:e}, N = {:e} (limits {:e}, {:e})",
                    state.photon_density(),
                    state.carrier,
                    photon_limit,
                    carrier_limit
                ),
            });
        }
    }

    Ok(FieldRecord {
        samples,
        sample_interval: grid.sample_interval(),
        start_time: n_transient as f64 * grid.dt,
        carrier_trace: Some(carrier),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combgen::uniform_comb;
    use crate::model::{default_initial_state, steady_state};

    #[test]
    fn grid_validation() {
        assert!(SimGrid::new(1e-12, 0.0, 1e-7, 1).is_ok());
        assert!(SimGrid::new(0.0, 0.0, 1e-7, 1).is_err());
        assert!(SimGrid::new(1e-12, -1.0, 1e-7, 1).is_err());
        assert!(SimGrid::new(1e-12, 0.0, 1.00000049e-7, 1).is_err()); // not whole steps
        assert!(SimGrid::new(1e-12, 0.0, 1e-7, 0).is_err());
    }

    #[test]
    fn default_grid_matches_rule_arithmetic() {
        let params = LaserParams::default();
        let drive = DriveConfig::single_tone(1.2, 12.5e9, 0.01).unwrap();
        let grid = default_grid(&params, &CombSpec::empty(), &drive, 1e6).unwrap();
        // 1/(40 * 12.5 GHz) = 2 ps -> next power-of-two fraction below: 1 ns / 512.
        assert_eq!(grid.dt, 1e-9 / 512.0);
        assert!((grid.t_record - 1e-6).abs() < grid.sample_interval());
        assert!(grid.t_transient >= 200e-9);
        // Stored rate >= 4 * f_max.
        assert!(1.0 / grid.sample_interval() >= 4.0 * 12.5e9);
    }

    #[test]
    fn default_grid_record_length_from_resolution() {
        let params = LaserParams::default();
        let drive = DriveConfig::single_tone(1.2, 2e9, 0.05).unwrap();
        let grid = default_grid(&params, &CombSpec::empty(), &drive, 10e6).unwrap();
        assert!((grid.t_record - 100e-9).abs() < grid.sample_interval());
        assert!(grid.t_transient >= 200e-9);
    }

    #[test]
    fn fixed_point_is_preserved() {
        let params = LaserParams::default();
        let drive = DriveConfig::unmodulated(1.2).unwrap();
        let comb = CombSpec::empty();
        let grid = SimGrid::new(1e-12, 10e-9, 50e-9, 10).unwrap();
        let init = default_initial_state(&params, 1.2);
        let rec = integrate(&params, &comb, &drive, &grid, &init).unwrap();
        let (_, s0) = steady_state(&params, 1.2).unwrap();
        for s in &rec.samples {
            assert!((s.norm_sqr() - s0).abs() < 1e-6 * s0);
        }
    }

    #[test]
    fn perturbed_start_converges_to_steady_state() {
        let params = LaserParams::default();
        let drive = DriveConfig::unmodulated(1.2).unwrap();
        let comb = CombSpec::empty();
        let (n_th, s0) = steady_state(&params, 1.2).unwrap();
        let init = LaserState::new(Complex64::new((0.3 * s0).sqrt(), 0.0), 1.02 * n_th);
        let grid = SimGrid::new(2e-12, 200e-9, 20e-9, 10).unwrap();
        let rec = integrate(&params, &comb, &drive, &grid, &init).unwrap();
        let last = rec.samples.last().unwrap().norm_sqr();
        assert!(
            (last - s0).abs() < 0.005 * s0,
            "|E|^2 = {last:e} vs S0 = {s0:e}"
        );
        let n_last = rec.carrier_trace.as_ref().unwrap().last().copied().unwrap();
        assert!((n_last - n_th).abs() < 0.005 * n_th);
    }

    #[test]
    fn integration_is_bit_identical() {
        let params = LaserParams::default();
        let drive = DriveConfig::single_tone(1.2, 2e9, 0.05).unwrap();
        let comb = uniform_comb(100e6, 2e9, 3, 0.3).unwrap();
        let grid = SimGrid::new(4e-12, 40e-9, 40e-9, 4).unwrap();
        let init = default_initial_state(&params, 1.2);
        let a = integrate(&params, &comb, &drive, &grid, &init).unwrap();
        let b = integrate(&params, &comb, &drive, &grid, &init).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn record_shape_and_timing() {
        let params = LaserParams::default();
        let drive = DriveConfig::unmodulated(1.2).unwrap();
        let grid = SimGrid::new(1e-12, 7.3e-9, 20e-9, 8).unwrap();
        let init = default_initial_state(&params, 1.2);
        let rec = integrate(&params, &CombSpec::empty(), &drive, &grid, &init).unwrap();
        assert_eq!(rec.len(), (20e-9 / (8.0 * 1e-12)) as usize);
        assert_eq!(rec.sample_interval, 8e-12);
        // No recorded sample precedes t_transient.
        assert!(rec.start_time >= grid.t_transient - 1e-15);
    }

    #[test]
    fn nyquist_violation_is_reported() {
        let params = LaserParams::default();
        let drive = DriveConfig::single_tone(1.2, 20e9, 0.05).unwrap();
        let grid = SimGrid::new(4e-12, 0.0, 10e-9, 1).unwrap(); // dt*f = 0.08 > 1/20
        let init = default_initial_state(&params, 1.2);
        let err = integrate(&params, &CombSpec::empty(), &drive, &grid, &init).unwrap_err();
        assert!(matches!(err, Error::NyquistViolation { .. }));
    }

    #[test]
    fn blowup_is_detected() {
        let params = LaserParams::default();
        let drive = DriveConfig::unmodulated(1.2).unwrap();
        let (_, s0) = steady_state(&params, 1.2).unwrap();
        // Start absurdly far outside the physical range.
        let init = LaserState::new(Complex64::new(2e4 * s0.sqrt(), 0.0), params.n_th);
        let grid = SimGrid::new(1e-12, 10e-9, 10e-9, 1).unwrap();
        let err = integrate(&params, &CombSpec::empty(), &drive, &grid, &init).unwrap_err();
        assert!(err.is_numerical(), "got {err}");
    }

    #[test]
    fn convergence_is_fourth_order() {
        // Injected, unmodulated run; compare |E|^2 at a fixed horizon across
        // dt, dt/2, dt/4 against a dt/8 reference.
        let params = LaserParams::default();
        let drive = DriveConfig::unmodulated(1.2).unwrap();
        let comb = uniform_comb(100e6, 2e9, 3, 0.3).unwrap();
        let init = default_initial_state(&params, 1.2);
        let horizon = 20e-9;
        // Compare |E|^2 at an instant shared by every step size.
        let t_star = horizon - 4e-12;
        let run = |dt: f64| {
            let grid = SimGrid::new(dt, 0.0, horizon, 1).unwrap();
            let rec = integrate(&params, &comb, &drive, &grid, &init).unwrap();
            rec.samples[(t_star / dt).round() as usize].norm_sqr()
        };
        let reference = run(0.5e-12);
        let e1 = (run(4e-12) - reference).abs();
        let e2 = (run(2e-12) - reference).abs();
        let e4 = (run(1e-12) - reference).abs();
        // Successive halvings should shrink the error by about 2^4.
        assert!(e1 / e2 > 8.0, "e1/e2 = {}", e1 / e2);
        assert!(e2 / e4 > 8.0, "e2/e4 = {}", e2 / e4);
    }

    #[test]
    fn carrier_balance_at_steady_state() {
        // Time-averaged dN/dt over the record is ~0 relative to R_b.
        let params = LaserParams::default();
        let drive = DriveConfig::unmodulated(1.2).unwrap();
        let grid = SimGrid::new(1e-12, 100e-9, 100e-9, 1).unwrap();
        let init = default_initial_state(&params, 1.2);
        let rec = integrate(&params, &CombSpec::empty(), &drive, &grid, &init).unwrap();
        let n = rec.carrier_trace.as_ref().unwrap();
        let mean_dn = (n[n.len() - 1] - n[0]) / rec.duration();
        assert!(mean_dn.abs() < 1e-6 * drive.bias_rate(&params));
    }
}
