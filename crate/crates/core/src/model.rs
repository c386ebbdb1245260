//! Single-mode semiconductor laser rate equations with optical comb injection
//! and a sinusoidally modulated pump.
//!
//! The model lives in a rotating frame at the free-running laser frequency, so
//! only frequency *offsets* appear. State is the complex field `E` (normalized
//! so `|E|^2` is photon density in m^-3) and the carrier density `N`:
//!
//! ```text
//! dE/dt = (1 + i*alpha)/2 * G_N * (N - N_th) * E
//!         + kappa * sum_k a_k * E0 * exp(i * (2*pi*delta_k*t + phi_k))
//! dN/dt = R_p(t) - N/tau_s - [1/tau_p + G_N * (N - N_th)] * |E|^2
//! ```
//!
//! `E0 = sqrt(S0)` is the free-running steady field amplitude at the
//! configured bias, so comb amplitudes `a_k` are dimensionless injection
//! ratios. The pump term generalizes the single-tone modulation to a sum:
//! `R_p(t) = R_b + sum_i m_i * (R_b - R_th) * sin(2*pi*f_i*t + phi_i)`.
//!
//! Note on thresholds: `R_th` is only the pump-scale constant inside `R_p(t)`
//! and the bias ratio. The dynamical lasing threshold of these equations is
//! `N_th / tau_s`, which is lower; both are exposed and kept distinct.

use num_complex::Complex64;

use crate::combgen::CombSpec;
use crate::error::{Error, Result};

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Physical constants of the injected laser.
///
/// `kappa` (the injection coupling rate) has no published value for this
/// device class; the default is chosen so injection ratios of 0.1-0.3 give
/// interaction ranges on the order of a 2-GHz comb spacing. Treat it as a
/// tunable device parameter, not a measured one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Carrier lifetime tau_s, s.
    pub tau_s: f64,
    /// Differential gain G_N, m^3 s^-1.
    pub g_n: f64,
    /// Threshold carrier density N_th, m^-3.
    pub n_th: f64,
    /// Photon lifetime tau_p, s.
    pub tau_p: f64,
    /// Linewidth enhancement factor alpha, dimensionless.
    pub alpha: f64,
    /// Pump-rate threshold scale R_th, m^-3 s^-1.
    pub r_th: f64,
    /// Injection coupling rate kappa, s^-1.
    pub kappa: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        LaserParams {
            tau_s: 2e-9,
            g_n: 7.9e-13,
            n_th: 2.91924e24,
            tau_p: 2e-12,
            alpha: 5.0,
            r_th: 1.8e33,
            kappa: 2.5e10,
        }
    }
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.tau_s, "tau_s"),
            (self.g_n, "g_n"),
            (self.n_th, "n_th"),
            (self.tau_p, "tau_p"),
            (self.r_th, "r_th"),
            (self.kappa, "kappa"),
        ];
        for (v, name) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v:e}"
                )));
            }
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {:e}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// The pump rate at which these equations actually start lasing, `N_th / tau_s`.
    pub fn lasing_threshold_rate(&self) -> f64 {
        self.n_th / self.tau_s
    }
}

/// One sinusoidal pump-modulation tone (an input RF component).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub frequency_hz: f64,
    /// Modulation depth m, in [0, 1].
    pub depth: f64,
    pub phase_rad: f64,
}

impl Tone {
    pub fn new(frequency_hz: f64, depth: f64, phase_rad: f64) -> Self {
        Tone { frequency_hz, depth, phase_rad }
    }
}

/// Pump bias and the RF tones modulated onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveConfig {
    /// Pump bias R_b as a multiple of R_th.
    pub bias_ratio: f64,
    pub tones: Vec<Tone>,
}

impl DriveConfig {
    pub fn new(bias_ratio: f64, tones: Vec<Tone>) -> Result<Self> {
        let drive = DriveConfig { bias_ratio, tones };
        drive.validate()?;
        Ok(drive)
    }

    /// Above-threshold bias with no RF input.
    pub fn unmodulated(bias_ratio: f64) -> Result<Self> {
        Self::new(bias_ratio, Vec::new())
    }

    /// Single-tone drive with zero phase.
    pub fn single_tone(bias_ratio: f64, frequency_hz: f64, depth: f64) -> Result<Self> {
        Self::new(bias_ratio, vec![Tone::new(frequency_hz, depth, 0.0)])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bias_ratio > 1.0) || !self.bias_ratio.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bias_ratio must be > 1 (above-threshold operation), got {}",
                self.bias_ratio
            )));
        }
        for tone in &self.tones {
            if !(tone.frequency_hz > 0.0) || !tone.frequency_hz.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "tone frequency must be > 0 Hz, got {:e}",
                    tone.frequency_hz
                )));
            }
            if !(0.0..=1.0).contains(&tone.depth) {
                return Err(Error::InvalidParameter(format!(
                    "modulation depth must be in [0, 1], got {}",
                    tone.depth
                )));
            }
            if !tone.phase_rad.is_finite() {
                return Err(Error::InvalidParameter("tone phase must be finite".into()));
            }
        }
        Ok(())
    }

    /// Pump bias in absolute units, m^-3 s^-1.
    pub fn bias_rate(&self, params: &LaserParams) -> f64 {
        self.bias_ratio * params.r_th
    }
}

/// Instantaneous dynamical state: complex field and carrier density.
///
/// Also reused as the state-derivative vector by the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserState {
    /// Complex field, |field|^2 = photon density in m^-3.
    pub field: Complex64,
    /// Carrier density N, m^-3.
    pub carrier: f64,
}

impl LaserState {
    pub fn new(field: Complex64, carrier: f64) -> Self {
        LaserState { field, carrier }
    }

    pub fn is_finite(&self) -> bool {
        self.field.re.is_finite() && self.field.im.is_finite() && self.carrier.is_finite()
    }

    pub fn photon_density(&self) -> f64 {
        self.field.norm_sqr()
    }
}

/// Instantaneous pump rate `R_p(t)`, m^-3 s^-1.
///
/// With an empty tone list this is exactly `R_b` for all `t`.
pub fn pump_rate(drive: &DriveConfig, params: &LaserParams, t: f64) -> f64 {
    let r_b = drive.bias_ratio * params.r_th;
    let swing = r_b - params.r_th;
    let mut r = r_b;
    for tone in &drive.tones {
        r += tone.depth * swing * (TWO_PI * tone.frequency_hz * t + tone.phase_rad).sin();
    }
    r
}

/// Free-running steady-state field amplitude `E0 = sqrt(S0)` at the given bias,
/// or 0 below threshold.
pub fn free_running_amplitude(params: &LaserParams, bias_ratio: f64) -> f64 {
    let s0 = params.tau_p * (bias_ratio * params.r_th - params.lasing_threshold_rate());
    s0.max(0.0).sqrt()
}

/// Right-hand side of the rate equations at time `t`.
pub fn derivative(
    state: &LaserState,
    params: &LaserParams,
    comb: &CombSpec,
    drive: &DriveConfig,
    t: f64,
) -> LaserState {
    let net_gain = params.g_n * (state.carrier - params.n_th);

    let mut d_field = Complex64::new(1.0, params.alpha) * (0.5 * net_gain) * state.field;
    if !comb.is_empty() {
        let e0 = free_running_amplitude(params, drive.bias_ratio);
        let scale = params.kappa * e0;
        for line in comb.lines() {
            let (sin, cos) = (TWO_PI * line.offset_hz * t + line.phase_rad).sin_cos();
            d_field += scale * line.amplitude * Complex64::new(cos, sin);
        }
    }

    let photon = state.field.norm_sqr();
    let d_carrier = pump_rate(drive, params, t)
        - state.carrier / params.tau_s
        - (1.0 / params.tau_p + net_gain) * photon;

    LaserState { field: d_field, carrier: d_carrier }
}

/// Closed-form lasing fixed point of the unmodulated, uninjected laser:
/// carrier clamps to `N_th` and photon density is `S0 = tau_p * (R_b - N_th/tau_s)`.
pub fn steady_state(params: &LaserParams, bias_ratio: f64) -> Result<(f64, f64)> {
    let r_b = bias_ratio * params.r_th;
    let threshold = params.lasing_threshold_rate();
    if r_b <= threshold {
        return Err(Error::BelowThreshold { pump_rate: r_b, lasing_threshold: threshold });
    }
    Ok((params.n_th, params.tau_p * (r_b - threshold)))
}

/// Small-signal relaxation oscillation frequency
/// `f_RO = sqrt(G_N * S0 / tau_p) / (2*pi)`, Hz.
pub fn relaxation_frequency(params: &LaserParams, bias_ratio: f64) -> Result<f64> {
    let (_, s0) = steady_state(params, bias_ratio)?;
    Ok((params.g_n * s0 / params.tau_p).sqrt() / TWO_PI)
}

/// Steady state of the free-running laser as an integrator initial condition.
/// Below threshold this degenerates to the off state `(0, R_b * tau_s)`.
pub fn default_initial_state(params: &LaserParams, bias_ratio: f64) -> LaserState {
    match steady_state(params, bias_ratio) {
        Ok((n, s0)) => LaserState::new(Complex64::new(s0.sqrt(), 0.0), n),
        Err(_) => LaserState::new(Complex64::new(0.0, 0.0), bias_ratio * params.r_th * params.tau_s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combgen::uniform_comb;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn defaults_match_reference_table() {
        let p = LaserParams::default();
        assert_eq!(p.tau_s, 2e-9);
        assert_eq!(p.g_n, 7.9e-13);
        assert_eq!(p.n_th, 2.91924e24);
        assert_eq!(p.tau_p, 2e-12);
        assert_eq!(p.alpha, 5.0);
        assert_eq!(p.r_th, 1.8e33);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn pump_rate_unmodulated_is_bias() {
        let p = LaserParams::default();
        let d = DriveConfig::unmodulated(1.2).unwrap();
        for t in [0.0, 1e-10, 3.7e-9, 1e-6] {
            assert_eq!(pump_rate(&d, &p, t), 2.16e33);
        }
    }

    #[test]
    fn pump_rate_zero_phase_at_t0() {
        let p = LaserParams::default();
        let d = DriveConfig::single_tone(1.2, 2e9, 0.05).unwrap();
        assert_eq!(pump_rate(&d, &p, 0.0), 2.16e33);
    }

    #[test]
    fn pump_rate_quarter_period_peak() {
        // sin(2*pi * 2 GHz * 0.125 ns) = sin(pi/2) = 1
        let p = LaserParams::default();
        let d = DriveConfig::single_tone(1.2, 2e9, 0.05).unwrap();
        let r = pump_rate(&d, &p, 0.125e-9);
        assert!(rel_err(r, 2.178e33) < 1e-12, "r = {r:e}");
    }

    #[test]
    fn pump_rate_averages_to_bias_over_integer_periods() {
        let p = LaserParams::default();
        let d = DriveConfig::new(
            1.2,
            vec![Tone::new(2e9, 0.3, 0.4), Tone::new(0.5e9, 0.7, 1.1)],
        )
        .unwrap();
        // Common period of 2 GHz and 0.5 GHz tones is 2 ns.
        let n = 40_000usize;
        let period = 2e-9;
        let mean = (0..n)
            .map(|i| pump_rate(&d, &p, (i as f64 / n as f64) * period))
            .sum::<f64>()
            / n as f64;
        assert!(rel_err(mean, 2.16e33) < 1e-9, "mean = {mean:e}");
    }

    #[test]
    fn steady_state_closed_form() {
        let p = LaserParams::default();
        let (n, s0) = steady_state(&p, 1.2).unwrap();
        assert_eq!(n, p.n_th);
        assert!(rel_err(s0, 1.40076e21) < 1e-10, "s0 = {s0:e}");

        let (_, s0) = steady_state(&p, 4.0).unwrap();
        assert!(rel_err(s0, 1.148076e22) < 1e-10, "s0 = {s0:e}");
    }

    #[test]
    fn steady_state_below_threshold_errors() {
        let p = LaserParams::default();
        // Bias chosen so R_b equals N_th/tau_s exactly.
        let boundary = p.lasing_threshold_rate() / p.r_th;
        assert!(matches!(
            steady_state(&p, boundary),
            Err(Error::BelowThreshold { .. })
        ));
        assert!(steady_state(&p, boundary * (1.0 + 1e-12)).is_ok());
    }

    #[test]
    fn relaxation_frequency_values() {
        let p = LaserParams::default();
        let f12 = relaxation_frequency(&p, 1.2).unwrap();
        assert!(rel_err(f12, 3.7437e9) < 1e-3, "f_RO(1.2) = {f12:e}");
        let f4 = relaxation_frequency(&p, 4.0).unwrap();
        assert!(rel_err(f4, 10.718e9) < 1e-3, "f_RO(4) = {f4:e}");
    }

    #[test]
    fn relaxation_frequency_sqrt_scaling() {
        // Quadrupling S0 (via the pump overhead above threshold) doubles f_RO.
        let p = LaserParams::default();
        let thr = p.lasing_threshold_rate();
        let bias1 = 1.2;
        let overhead = bias1 * p.r_th - thr;
        let bias2 = (thr + 4.0 * overhead) / p.r_th;
        let f1 = relaxation_frequency(&p, bias1).unwrap();
        let f2 = relaxation_frequency(&p, bias2).unwrap();
        assert!(rel_err(f2, 2.0 * f1) < 1e-12);
    }

    #[test]
    fn derivative_off_state_fixed_point() {
        let p = LaserParams::default();
        let d = DriveConfig::unmodulated(1.2).unwrap();
        let comb = CombSpec::empty();
        let n_b = d.bias_rate(&p) * p.tau_s;
        let state = LaserState::new(Complex64::new(0.0, 0.0), n_b);
        let dot = derivative(&state, &p, &comb, &d, 0.0);
        assert_eq!(dot.field, Complex64::new(0.0, 0.0));
        assert_eq!(dot.carrier, 0.0);
    }

    #[test]
    fn derivative_lasing_fixed_point() {
        let p = LaserParams::default();
        let d = DriveConfig::unmodulated(1.2).unwrap();
        let comb = CombSpec::empty();
        let (n, s0) = steady_state(&p, 1.2).unwrap();
        let state = LaserState::new(Complex64::new(s0.sqrt(), 0.0), n);
        let dot = derivative(&state, &p, &comb, &d, 0.0);
        // Gain clamping: the field gain term is exactly zero at N = N_th.
        assert_eq!(dot.field.norm(), 0.0);
        // Carrier balance closes to rounding of the pump-scale terms.
        assert!(dot.carrier.abs() < 1e-9 * d.bias_rate(&p), "dN/dt = {:e}", dot.carrier);
    }

    #[test]
    fn derivative_pure_injection_term() {
        let p = LaserParams::default();
        let d = DriveConfig::unmodulated(1.2).unwrap();
        let comb = uniform_comb(0.5e9, 2e9, 1, 0.3).unwrap();
        let state = LaserState::new(Complex64::new(0.0, 0.0), p.n_th);
        let dot = derivative(&state, &p, &comb, &d, 0.0);
        let e0 = free_running_amplitude(&p, 1.2);
        assert!(rel_err(dot.field.re, p.kappa * 0.3 * e0) < 1e-12);
        assert_eq!(dot.field.im, 0.0);
        let expected_dn = d.bias_rate(&p) - p.n_th / p.tau_s;
        assert!(rel_err(dot.carrier, expected_dn) < 1e-12);
    }

    #[test]
    fn derivative_linear_in_injection_amplitude() {
        let p = LaserParams::default();
        let d = DriveConfig::unmodulated(1.2).unwrap();
        let state = LaserState::new(Complex64::new(1e10, -3e9), 1.01 * p.n_th);
        let t = 0.77e-9;
        let base = derivative(&state, &p, &CombSpec::empty(), &d, t);
        let c1 = uniform_comb(0.1e9, 2e9, 3, 0.1).unwrap();
        let c2 = uniform_comb(0.1e9, 2e9, 3, 0.3).unwrap();
        let d1 = derivative(&state, &p, &c1, &d, t);
        let d2 = derivative(&state, &p, &c2, &d, t);
        // Injection enters additively and linearly in the amplitudes.
        let inj1 = d1.field - base.field;
        let inj2 = d2.field - base.field;
        assert!((inj2 - 3.0 * inj1).norm() < 1e-9 * inj2.norm().max(1.0));
        assert_eq!(d1.carrier, base.carrier);
    }

    #[test]
    fn drive_validation_rejects_bad_inputs() {
        assert!(DriveConfig::unmodulated(1.0).is_err());
        assert!(DriveConfig::single_tone(1.2, -1e9, 0.1).is_err());
        assert!(DriveConfig::single_tone(1.2, 1e9, 1.5).is_err());
        assert!(DriveConfig::single_tone(1.2, 1e9, 1.0).is_ok());
    }
}
