//! Tuning-curve engine: scan the input RF frequency, record per-comb power
//! responses against the no-input baseline, and classify curve shapes.
//!
//! Each scan point is an independent steady-state-initialized run, so points
//! may execute in parallel; results are keyed by frequency index and the
//! assembled curve is identical regardless of scheduling.

use rayon::prelude::*;

use crate::combgen::CombSpec;
use crate::error::{Error, Result};
use crate::integrator::SimGrid;
use crate::model::{LaserParams, Tone};
use crate::probe::ProbeSetup;
use crate::spectrum::WindowKind;

/// Response-curve shapes distinguished by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveShape {
    /// Purely inhibitory dip.
    InverseBell,
    /// A positive and a negative peak (a positive-only curve also lands here,
    /// with zero negative depth).
    DualPeak,
    Flat,
}

impl std::fmt::Display for CurveShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveShape::InverseBell => write!(f, "inverse-bell"),
            CurveShape::DualPeak => write!(f, "dual-peak"),
            CurveShape::Flat => write!(f, "flat"),
        }
    }
}

/// Scan parameters for one tuning-curve run.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub params: LaserParams,
    pub comb: CombSpec,
    pub bias_ratio: f64,
    /// Modulation depth m of the scanned tone.
    pub depth: f64,
    pub f_start: f64,
    pub f_stop: f64,
    /// Scan step, default 50 MHz.
    pub f_step: f64,
    pub tracked_offsets: Vec<f64>,
    pub grid: SimGrid,
    pub search_halfwidth: f64,
    pub window: WindowKind,
}

pub const DEFAULT_SCAN_STEP: f64 = 50e6;

/// Per-comb power deltas (dB, baseline-relative) across the scanned input
/// frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningCurve {
    pub input_frequencies: Vec<f64>,
    /// `responses[c][i]` = delta of tracked comb `c` at frequency `i`, dB.
    pub responses: Vec<Vec<f64>>,
    /// No-input powers per tracked comb, dB.
    pub baseline_powers: Vec<f64>,
}

impl TuningCurve {
    pub fn n_points(&self) -> usize {
        self.input_frequencies.len()
    }

    pub fn n_combs(&self) -> usize {
        self.responses.len()
    }
}

/// Shape, amplitude, width, and extremum location of one comb's response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveMetrics {
    /// Maximum |power deviation|, dB.
    pub amplitude: f64,
    /// FWHM of |deviation| around the dominant extremum, Hz.
    pub width: f64,
    pub shape: CurveShape,
    /// Scan frequency of the dominant extremum, Hz.
    pub extremum_frequency: f64,
}

/// Scan frequencies f_start, f_start + f_step, ... up to f_stop inclusive.
pub fn scan_frequencies(f_start: f64, f_stop: f64, f_step: f64) -> Vec<f64> {
    let n = ((f_stop - f_start) / f_step * (1.0 + 1e-12)).floor() as usize + 1;
    (0..n).map(|i| f_start + i as f64 * f_step).collect()
}

/// Run the scan: one integration per frequency plus one baseline run.
pub fn tuning_curve(cfg: &SweepConfig) -> Result<TuningCurve> {
    if !(cfg.f_step > 0.0) || !(cfg.f_start < cfg.f_stop) {
        return Err(Error::InvalidRange(format!(
            "need f_step > 0 and f_start < f_stop, got start {:e}, stop {:e}, step {:e}",
            cfg.f_start, cfg.f_stop, cfg.f_step
        )));
    }
    let probe = ProbeSetup {
        params: cfg.params,
        comb: cfg.comb.clone(),
        bias_ratio: cfg.bias_ratio,
        grid: cfg.grid,
        tracked_offsets: cfg.tracked_offsets.clone(),
        search_halfwidth: cfg.search_halfwidth,
        window: cfg.window,
    };
    let baseline = probe.baseline_powers()?;

    let freqs = scan_frequencies(cfg.f_start, cfg.f_stop, cfg.f_step);
    let per_point: Vec<Vec<f64>> = freqs
        .par_iter()
        .map(|&f| {
            let powers = probe
                .powers(&[Tone::new(f, cfg.depth, 0.0)])
                .map_err(|e| e.at_frequency(f))?;
            Ok(powers
                .iter()
                .zip(&baseline)
                .map(|(p, b)| p - b)
                .collect::<Vec<f64>>())
        })
        .collect::<Result<_>>()?;

    // Transpose to per-comb series.
    let n_combs = baseline.len();
    let responses = (0..n_combs)
        .map(|c| per_point.iter().map(|row| row[c]).collect())
        .collect();

    Ok(TuningCurve { input_frequencies: freqs, responses, baseline_powers: baseline })
}

pub const DEFAULT_SHAPE_THRESHOLD_DB: f64 = 1.0;

/// Classify a response sequence against a deviation threshold (dB).
pub fn classify_shape(responses: &[f64], threshold_db: f64) -> CurveShape {
    let max = responses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = responses.iter().cloned().fold(f64::INFINITY, f64::min);
    if responses.is_empty() || max.max(-min) < threshold_db {
        CurveShape::Flat
    } else if min < -threshold_db && max <= threshold_db {
        CurveShape::InverseBell
    } else {
        // Either both peaks exceed the threshold, or only the positive one
        // does (the zero-depth dual-peak convention).
        CurveShape::DualPeak
    }
}

/// Amplitude, FWHM width, extremum location, and shape for one tracked comb.
pub fn curve_metrics(curve: &TuningCurve, comb_index: usize) -> Result<CurveMetrics> {
    let r = curve
        .responses
        .get(comb_index)
        .ok_or(Error::DimensionMismatch { expected: curve.n_combs(), got: comb_index })?;
    if r.is_empty() {
        return Err(Error::InvalidRange("empty tuning curve".into()));
    }

    let mut peak_idx = 0usize;
    for (i, v) in r.iter().enumerate() {
        if v.abs() > r[peak_idx].abs() {
            peak_idx = i;
        }
    }
    let amplitude = r[peak_idx].abs();
    let extremum_frequency = curve.input_frequencies[peak_idx];
    let shape = classify_shape(r, DEFAULT_SHAPE_THRESHOLD_DB);
    if amplitude == 0.0 {
        return Ok(CurveMetrics { amplitude, width: 0.0, shape, extremum_frequency });
    }

    // Full width at half the dominant extremum's |deviation|, linearly
    // interpolated between scan points; clipped at the scan edges when the
    // curve never recrosses the half level.
    let half = amplitude / 2.0;
    let mag: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    let f = &curve.input_frequencies;

    let mut left = f[0];
    for i in (0..peak_idx).rev() {
        if mag[i] <= half {
            let frac = (half - mag[i]) / (mag[i + 1] - mag[i]);
            left = f[i] + frac * (f[i + 1] - f[i]);
            break;
        }
    }
    let mut right = f[f.len() - 1];
    for i in peak_idx + 1..f.len() {
        if mag[i] <= half {
            let frac = (mag[i - 1] - half) / (mag[i - 1] - mag[i]);
            right = f[i - 1] + frac * (f[i] - f[i - 1]);
            break;
        }
    }

    Ok(CurveMetrics { amplitude, width: right - left, shape, extremum_frequency })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_curve(responses: Vec<Vec<f64>>, f: Vec<f64>) -> TuningCurve {
        let baseline = vec![0.0; responses.len()];
        TuningCurve { input_frequencies: f, responses, baseline_powers: baseline }
    }

    #[test]
    fn classify_rules() {
        assert_eq!(classify_shape(&[0.2, -0.1, 0.15], 1.0), CurveShape::Flat);
        assert_eq!(classify_shape(&[0.3, -5.0, -1.2, 0.1], 1.0), CurveShape::InverseBell);
        assert_eq!(classify_shape(&[3.0, -2.0, 0.0], 1.0), CurveShape::DualPeak);
        // Positive-only maps to dual-peak by convention.
        assert_eq!(classify_shape(&[2.5, 0.4, 0.0], 1.0), CurveShape::DualPeak);
        assert_eq!(classify_shape(&[], 1.0), CurveShape::Flat);
    }

    #[test]
    fn metrics_all_zero_curve() {
        let f = scan_frequencies(1e9, 3e9, 50e6);
        let n = f.len();
        let curve = synthetic_curve(vec![vec![0.0; n]], f);
        let m = curve_metrics(&curve, 0).unwrap();
        assert_eq!(m.amplitude, 0.0);
        assert_eq!(m.width, 0.0);
        assert_eq!(m.shape, CurveShape::Flat);
    }

    #[test]
    fn metrics_gaussian_dip_fwhm() {
        // Depth 6 dB, sigma 200 MHz -> FWHM = 2*sigma*sqrt(2 ln 2).
        let f0 = 2e9;
        let sigma = 200e6;
        let step = 50e6;
        let f = scan_frequencies(1e9, 3e9, step);
        let r: Vec<f64> =
            f.iter().map(|&x| -6.0 * (-((x - f0) * (x - f0)) / (2.0 * sigma * sigma)).exp()).collect();
        let curve = synthetic_curve(vec![r], f);
        let m = curve_metrics(&curve, 0).unwrap();
        assert!((m.amplitude - 6.0).abs() < 1e-9);
        assert_eq!(m.shape, CurveShape::InverseBell);
        assert!((m.extremum_frequency - f0).abs() <= step / 2.0);
        let expected = 2.0 * sigma * (2.0f64.ln() * 2.0).sqrt();
        assert!((m.width - expected).abs() <= step, "width {} vs {}", m.width, expected);
    }

    #[test]
    fn metrics_bump_then_dip_is_dual_peak() {
        let f = scan_frequencies(1e9, 2e9, 100e6);
        let mut r = vec![0.0; f.len()];
        r[3] = 3.0;
        r[4] = 1.0;
        r[7] = -4.0;
        let curve = synthetic_curve(vec![r], f);
        let m = curve_metrics(&curve, 0).unwrap();
        assert!((m.amplitude - 4.0).abs() < 1e-12);
        assert_eq!(m.shape, CurveShape::DualPeak);
    }

    #[test]
    fn scan_frequencies_inclusive_endpoints() {
        let f = scan_frequencies(1e9, 3e9, 50e6);
        assert_eq!(f.len(), 41);
        assert_eq!(f[0], 1e9);
        assert!((f[40] - 3e9).abs() < 1.0);
    }

    #[test]
    fn bad_scan_range_rejected() {
        let cfg = SweepConfig {
            params: LaserParams::default(),
            comb: CombSpec::empty(),
            bias_ratio: 1.2,
            depth: 0.05,
            f_start: 3e9,
            f_stop: 1e9,
            f_step: 50e6,
            tracked_offsets: vec![0.0],
            grid: SimGrid::new(1e-12, 0.0, 1e-8, 1).unwrap(),
            search_halfwidth: 1e8,
            window: WindowKind::Hann,
        };
        assert!(tuning_curve(&cfg).is_err());
    }
}
