//! Spectral estimation: periodogram, comb-line power extraction, and the
//! dual-comb heterodyne beat-note readout.
//!
//! Power conventions: psd bins are linear in |E|^2 and normalized by the
//! window's coherent gain, so an isolated line's peak bin reads its squared
//! amplitude regardless of the window. Reported dB values are relative (no
//! absolute power calibration exists in the simulation).

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::combgen::CombSpec;
use crate::error::{Error, Result};
use crate::integrator::FieldRecord;
use crate::model::TWO_PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// For oracle tests with bin-aligned tones; satisfies Parseval exactly.
    Rectangular,
    /// Default for measurement runs, which are generally not period-aligned.
    Hann,
}

/// 10*log10 with a floor keeping empty bins finite.
pub fn db(power: f64) -> f64 {
    10.0 * power.max(1e-300).log10()
}

/// Two-sided periodogram of a complex field record, ascending frequencies
/// centered on zero offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub bin_frequencies: Vec<f64>,
    /// Power per bin, linear units of |E|^2.
    pub psd: Vec<f64>,
    pub window_kind: WindowKind,
    /// Window coherent gain the psd was corrected by (1 for rectangular).
    pub coherent_gain: f64,
}

impl SpectrumResult {
    pub fn bin_spacing(&self) -> f64 {
        if self.bin_frequencies.len() > 1 {
            self.bin_frequencies[1] - self.bin_frequencies[0]
        } else {
            0.0
        }
    }

    /// Indices of bins with |f - center| <= halfwidth.
    fn window_bins(&self, center: f64, halfwidth: f64) -> std::ops::Range<usize> {
        let lo = self.bin_frequencies.partition_point(|&f| f < center - halfwidth);
        let hi = self.bin_frequencies.partition_point(|&f| f <= center + halfwidth);
        lo..hi
    }

    /// Largest psd bin within +-halfwidth of `center`: (frequency, power).
    pub fn peak_near(&self, center: f64, halfwidth: f64) -> Option<(f64, f64)> {
        let range = self.window_bins(center, halfwidth);
        range
            .clone()
            .max_by(|&a, &b| self.psd[a].total_cmp(&self.psd[b]))
            .map(|i| (self.bin_frequencies[i], self.psd[i]))
    }

    /// Sum of psd bins within +-halfwidth of `center` (integrated-window power).
    pub fn integrated_near(&self, center: f64, halfwidth: f64) -> f64 {
        self.window_bins(center, halfwidth).map(|i| self.psd[i]).sum()
    }
}

fn window_values(kind: WindowKind, n: usize) -> Vec<f64> {
    match kind {
        WindowKind::Rectangular => vec![1.0; n],
        // Periodic Hann, the DFT-consistent variant.
        WindowKind::Hann => (0..n)
            .map(|i| 0.5 * (1.0 - (TWO_PI * i as f64 / n as f64).cos()))
            .collect(),
    }
}

/// Windowed two-sided periodogram of the record.
pub fn power_spectrum(record: &FieldRecord, window_kind: WindowKind) -> Result<SpectrumResult> {
    if record.is_empty() {
        return Err(Error::EmptyRecord);
    }
    let n = record.len();
    let w = window_values(window_kind, n);
    let w_sum: f64 = w.iter().sum();

    let mut buf: Vec<Complex64> =
        record.samples.iter().zip(&w).map(|(s, wi)| s * *wi).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // Normalize so a bin-aligned unit tone reads 1.0, then reorder two-sided.
    let norm = 1.0 / (w_sum * w_sum);
    let df = 1.0 / (n as f64 * record.sample_interval);
    let half = n / 2;
    let mut bin_frequencies = Vec::with_capacity(n);
    let mut psd = Vec::with_capacity(n);
    for j in 0..n {
        let k_signed = j as i64 - half as i64;
        let src = ((k_signed + n as i64) % n as i64) as usize;
        bin_frequencies.push(k_signed as f64 * df);
        psd.push(buf[src].norm_sqr() * norm);
    }

    Ok(SpectrumResult {
        bin_frequencies,
        psd,
        window_kind,
        coherent_gain: w_sum / n as f64,
    })
}

/// Peak power (dB) in a +-`search_halfwidth` window around each expected
/// offset. Windows must be pairwise disjoint and each must contain bins.
pub fn comb_powers(
    spec: &SpectrumResult,
    offsets: &[f64],
    search_halfwidth: f64,
) -> Result<Vec<f64>> {
    if !(search_halfwidth > 0.0) {
        return Err(Error::InvalidRange(format!(
            "search halfwidth must be > 0, got {search_halfwidth:e}"
        )));
    }
    let mut sorted: Vec<f64> = offsets.to_vec();
    sorted.sort_by(f64::total_cmp);
    for pair in sorted.windows(2) {
        if pair[1] - pair[0] <= 2.0 * search_halfwidth {
            return Err(Error::WindowOverlap { a_hz: pair[0], b_hz: pair[1] });
        }
    }
    offsets
        .iter()
        .map(|&offset| {
            spec.peak_near(offset, search_halfwidth)
                .map(|(_, p)| db(p))
                .ok_or(Error::EmptyWindow { offset_hz: offset })
        })
        .collect()
}

/// One beat-note line of the heterodyne readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatHarmonic {
    /// Harmonic index h >= 0.
    pub h: u32,
    /// Signed comb-line index this harmonic reads (+h or -h side).
    pub line: i32,
    /// Beat frequency f0 + line * delta_f, Hz.
    pub frequency_hz: f64,
    pub power_db: f64,
}

/// Dual-comb readout: beat-note powers at `f0 +- h*delta_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatReadout {
    pub harmonics: Vec<BeatHarmonic>,
    pub f0_hz: f64,
    pub delta_f_hz: f64,
}

impl BeatReadout {
    /// Power of the harmonic reading comb line `line`, if in band.
    pub fn power_for_line(&self, line: i32) -> Option<f64> {
        self.harmonics.iter().find(|b| b.line == line).map(|b| b.power_db)
    }
}

/// Square-law photodetection of the record against a synthesized local
/// oscillator comb, reporting beat powers at `f0 + k*delta_f` for
/// `|k| <= h_max`.
///
/// The LO field is a sum of complex exponentials at the `lo_comb` offsets,
/// scaled so its amplitudes are relative to the record's rms field (matching
/// the injection-ratio convention); the absolute LO level cancels out of any
/// power *delta* between two records. The detector is ideal square-law with
/// a brick-wall bandwidth: harmonics beyond `pd_bandwidth` are an error.
pub fn beat_readout(
    record: &FieldRecord,
    lo_comb: &CombSpec,
    f0: f64,
    delta_f: f64,
    h_max: u32,
    pd_bandwidth: f64,
) -> Result<BeatReadout> {
    if record.is_empty() {
        return Err(Error::EmptyRecord);
    }
    if !(f0 > 0.0) {
        return Err(Error::InvalidRange(format!("f0 must be > 0, got {f0:e}")));
    }
    if h_max > 0 && !(delta_f > 0.0) {
        return Err(Error::InvalidRange(format!(
            "delta_f must be > 0 when h_max >= 1, got {delta_f:e}"
        )));
    }
    let top = f0 + h_max as f64 * delta_f;
    if top > pd_bandwidth {
        return Err(Error::BandwidthExceeded { required_hz: top, bandwidth_hz: pd_bandwidth });
    }

    // Scale the LO to the record's rms field so the photocurrent cross term
    // has comparable magnitude to the baseband and stays within f64 range.
    let lo_scale = record.mean_power().sqrt();
    let n = record.len();
    let mut photocurrent = Vec::with_capacity(n);
    for i in 0..n {
        let t = record.sample_time(i);
        let mut lo = Complex64::new(0.0, 0.0);
        for line in lo_comb.lines() {
            let (sin, cos) = (TWO_PI * line.offset_hz * t + line.phase_rad).sin_cos();
            lo += line.amplitude * lo_scale * Complex64::new(cos, sin);
        }
        let total = record.samples[i] + lo;
        photocurrent.push(Complex64::new(total.norm_sqr(), 0.0));
    }
    let pd_record = FieldRecord {
        samples: photocurrent,
        sample_interval: record.sample_interval,
        start_time: record.start_time,
        carrier_trace: None,
    };
    let spec = power_spectrum(&pd_record, WindowKind::Hann)?;

    // Search halfwidth: a quarter harmonic spacing, at least a couple of bins.
    let halfwidth = if h_max > 0 {
        (delta_f / 4.0).max(2.0 * spec.bin_spacing())
    } else {
        (f0 / 4.0).max(2.0 * spec.bin_spacing())
    };

    let mut harmonics = Vec::new();
    for k in -(h_max as i32)..=h_max as i32 {
        let f = f0 + k as f64 * delta_f;
        if f <= 0.0 || f > pd_bandwidth {
            continue; // out of the detector band
        }
        if let Some((_, p)) = spec.peak_near(f, halfwidth) {
            harmonics.push(BeatHarmonic {
                h: k.unsigned_abs(),
                line: k,
                frequency_hz: f,
                power_db: db(p),
            });
        }
    }
    Ok(BeatReadout { harmonics, f0_hz: f0, delta_f_hz: delta_f })
}
