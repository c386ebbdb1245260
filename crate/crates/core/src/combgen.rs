//! Injected and local-oscillator comb construction.
//!
//! Combs are lists of spectral lines at frequency offsets relative to the
//! free-running laser line, with dimensionless amplitudes (injection ratios
//! relative to the free-running steady amplitude) and phases. Canonical form
//! is ascending offset order with pairwise distinct offsets.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombLine {
    /// Offset from the free-running laser frequency, Hz.
    pub offset_hz: f64,
    /// Relative amplitude (>= 0), in units of the free-running field amplitude.
    pub amplitude: f64,
    pub phase_rad: f64,
}

impl CombLine {
    pub fn new(offset_hz: f64, amplitude: f64, phase_rad: f64) -> Self {
        CombLine { offset_hz, amplitude, phase_rad }
    }
}

/// A set of injected comb lines in canonical (ascending-offset) form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CombSpec {
    lines: Vec<CombLine>,
}

impl CombSpec {
    /// Build from an arbitrary line list; sorts into canonical form and
    /// validates amplitudes and offset distinctness.
    pub fn new(mut lines: Vec<CombLine>) -> Result<Self> {
        for line in &lines {
            if !line.offset_hz.is_finite() || !line.phase_rad.is_finite() {
                return Err(Error::InvalidComb("non-finite offset or phase".into()));
            }
            if !(line.amplitude >= 0.0) || !line.amplitude.is_finite() {
                return Err(Error::InvalidComb(format!(
                    "amplitude must be >= 0, got {:e}",
                    line.amplitude
                )));
            }
        }
        lines.sort_by(|a, b| a.offset_hz.total_cmp(&b.offset_hz));
        for pair in lines.windows(2) {
            if pair[0].offset_hz == pair[1].offset_hz {
                return Err(Error::InvalidComb(format!(
                    "duplicate line offset {:e} Hz",
                    pair[0].offset_hz
                )));
            }
        }
        Ok(CombSpec { lines })
    }

    /// No injection at all.
    pub fn empty() -> Self {
        CombSpec { lines: Vec::new() }
    }

    pub fn lines(&self) -> &[CombLine] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn offsets(&self) -> Vec<f64> {
        self.lines.iter().map(|l| l.offset_hz).collect()
    }

    /// Largest |offset| over all lines, 0 for an empty comb.
    pub fn max_abs_offset(&self) -> f64 {
        self.lines.iter().map(|l| l.offset_hz.abs()).fold(0.0, f64::max)
    }

    /// Total relative power sum a_k^2.
    pub fn total_power(&self) -> f64 {
        self.lines.iter().map(|l| l.amplitude * l.amplitude).sum()
    }

    /// Index of the line nearest to zero offset (the "state comb"),
    /// or None for an empty comb. Ties resolve to the lower offset.
    pub fn state_comb_index(&self) -> Option<usize> {
        self.lines
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.offset_hz
                    .abs()
                    .total_cmp(&b.offset_hz.abs())
                    .then(a.offset_hz.total_cmp(&b.offset_hz))
            })
            .map(|(i, _)| i)
    }

    /// Combine two combs into one; coinciding offsets are a collision.
    pub fn merge(&self, other: &CombSpec) -> Result<CombSpec> {
        let mut lines = self.lines.clone();
        lines.extend_from_slice(&other.lines);
        CombSpec::new(lines).map_err(|e| match e {
            Error::InvalidComb(msg) if msg.starts_with("duplicate") => {
                let offset_hz = self
                    .lines
                    .iter()
                    .find(|l| other.lines.iter().any(|o| o.offset_hz == l.offset_hz))
                    .map(|l| l.offset_hz)
                    .unwrap_or(f64::NAN);
                Error::ShiftCollision { offset_hz }
            }
            e => e,
        })
    }
}

/// Equal-amplitude comb of `count` lines spaced by `spacing`, zero phases.
///
/// The line nearest the laser sits at `f_detu` and is the comb center for odd
/// counts: offsets are `f_detu + k*spacing` with `k` in
/// `-(count-1)/2 ..= (count-1)/2` (odd) or `-count/2+1 ..= count/2` (even).
pub fn uniform_comb(f_detu: f64, spacing: f64, count: usize, amplitude: f64) -> Result<CombSpec> {
    if count < 1 {
        return Err(Error::InvalidCount(count));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidComb(format!("spacing must be > 0, got {spacing:e}")));
    }
    let (k_lo, k_hi) = if count % 2 == 1 {
        let half = (count as i64 - 1) / 2;
        (-half, half)
    } else {
        let half = count as i64 / 2;
        (-half + 1, half)
    };
    let lines = (k_lo..=k_hi)
        .map(|k| CombLine::new(f_detu + k as f64 * spacing, amplitude, 0.0))
        .collect();
    CombSpec::new(lines)
}

/// Comb produced by pure phase modulation at index `beta`: line `k` carries
/// amplitude `|J_k(beta)|` with the Bessel sign folded into the phase (0 or pi).
pub fn pm_comb(beta: f64, spacing: f64, n_sidebands: usize, center_offset: f64) -> Result<CombSpec> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidComb(format!("spacing must be > 0, got {spacing:e}")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidComb(format!("modulation index must be >= 0, got {beta:e}")));
    }
    let n = n_sidebands as i64;
    let lines = (-n..=n)
        .map(|k| {
            // J_{-m}(x) = (-1)^m J_m(x)
            let j = bessel_j(k.unsigned_abs() as u32, beta);
            let signed = if k < 0 && k % 2 != 0 { -j } else { j };
            let phase = if signed < 0.0 { std::f64::consts::PI } else { 0.0 };
            CombLine::new(center_offset + k as f64 * spacing, signed.abs(), phase)
        })
        .collect();
    CombSpec::new(lines)
}

/// Copy of `comb` with `f0` added to every offset.
pub fn shift_comb(comb: &CombSpec, f0: f64) -> CombSpec {
    let lines = comb
        .lines
        .iter()
        .map(|l| CombLine::new(l.offset_hz + f0, l.amplitude, l.phase_rad))
        .collect();
    // Adding a constant preserves ordering and distinctness.
    CombSpec { lines }
}

/// Bessel function of the first kind J_n(x) by its ascending power series,
/// adequate over the modulation-index range of electro-optic combs.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    // (x/2)^n / n!
    let half = x / 2.0;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0; // underflow: far beyond any line we care about
        }
    }
    let mut sum = term;
    let h2 = half * half;
    for m in 1..200 {
        term *= -h2 / (m as f64 * (m as f64 + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: J_n(x) = (1/pi) * integral_0^pi cos(n*tau - x*sin(tau)) d tau,
    /// evaluated by Simpson's rule.
    fn bessel_j_quadrature(n: u32, x: f64) -> f64 {
        let steps = 20_000usize; // even
        let h = std::f64::consts::PI / steps as f64;
        let f = |tau: f64| (n as f64 * tau - x * tau.sin()).cos();
        let mut acc = f(0.0) + f(std::f64::consts::PI);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / (3.0 * std::f64::consts::PI)
    }

    #[test]
    fn bessel_matches_quadrature_oracle() {
        for &x in &[0.1, 0.5, 1.0, 2.4048, 3.0, 5.0] {
            for n in 0..8u32 {
                let series = bessel_j(n, x);
                let quad = bessel_j_quadrature(n, x);
                assert!(
                    (series - quad).abs() < 1e-10,
                    "J_{n}({x}) series {series} vs quadrature {quad}"
                );
            }
        }
    }

    #[test]
    fn uniform_comb_single_line() {
        let c = uniform_comb(100e6, 2e9, 1, 0.3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.lines()[0].offset_hz, 100e6);
        assert_eq!(c.lines()[0].amplitude, 0.3);
    }

    #[test]
    fn uniform_comb_three_lines_centered() {
        let c = uniform_comb(100e6, 2e9, 3, 0.3).unwrap();
        assert_eq!(c.offsets(), vec![-1.9e9, 0.1e9, 2.1e9]);
    }

    #[test]
    fn uniform_comb_fifteen_lines() {
        let c = uniform_comb(2.01e9, 150e6, 15, 0.1).unwrap();
        assert_eq!(c.len(), 15);
        let offs = c.offsets();
        assert!((offs[0] - 0.96e9).abs() < 1.0);
        assert!((offs[14] - 3.06e9).abs() < 1.0);
    }

    #[test]
    fn uniform_comb_even_count_rule() {
        let c = uniform_comb(0.0, 1e9, 4, 1.0).unwrap();
        assert_eq!(c.offsets(), vec![-1e9, 0.0, 1e9, 2e9]);
    }

    #[test]
    fn uniform_comb_spacing_is_exact() {
        let c = uniform_comb(2.01e9, 150e6, 15, 0.1).unwrap();
        for pair in c.lines().windows(2) {
            let d = pair[1].offset_hz - pair[0].offset_hz;
            assert!((d - 150e6).abs() <= f64::EPSILON * 150e6 * 4.0, "spacing {d}");
        }
    }

    #[test]
    fn uniform_comb_rejects_zero_count() {
        assert!(matches!(uniform_comb(0.0, 1e9, 0, 1.0), Err(Error::InvalidCount(0))));
    }

    #[test]
    fn pm_comb_zero_index_is_single_carrier() {
        let c = pm_comb(0.0, 1e9, 2, 0.0).unwrap();
        assert_eq!(c.len(), 5);
        for line in c.lines() {
            if line.offset_hz == 0.0 {
                assert_eq!(line.amplitude, 1.0);
            } else {
                assert_eq!(line.amplitude, 0.0);
            }
        }
    }

    #[test]
    fn pm_comb_beta_one_amplitudes() {
        let c = pm_comb(1.0, 1e9, 2, 0.0).unwrap();
        let amps: Vec<f64> = c.lines().iter().map(|l| l.amplitude).collect();
        let expected = [0.1149034849, 0.4400505857, 0.7651976866, 0.4400505857, 0.1149034849];
        for (a, e) in amps.iter().zip(expected) {
            assert!((a - e).abs() < 1e-9, "amp {a} vs {e}");
        }
        // Negative-order lines carry the (-1)^k sign as a pi phase.
        assert_eq!(c.lines()[1].phase_rad, std::f64::consts::PI); // k = -1
        assert_eq!(c.lines()[0].phase_rad, 0.0); // k = -2
    }

    #[test]
    fn pm_comb_power_approaches_unity() {
        let mut prev = 0.0;
        for n in [1usize, 2, 4, 8, 16] {
            let p = pm_comb(2.0, 1e9, n, 0.0).unwrap().total_power();
            assert!(p <= 1.0 + 1e-12);
            assert!(p >= prev - 1e-15, "power not monotone: {p} after {prev}");
            prev = p;
        }
        assert!((prev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_comb_examples() {
        let c = uniform_comb(100e6, 2e9, 3, 0.3).unwrap();
        assert_eq!(shift_comb(&c, 0.0), c);
        let shifted = shift_comb(&c, 100e6);
        assert_eq!(shifted.offsets(), vec![-1.8e9, 0.2e9, 2.2e9]);
        // Round trip is bit-exact.
        assert_eq!(shift_comb(&shifted, -100e6), c);
    }

    #[test]
    fn merge_detects_collision() {
        let a = uniform_comb(0.0, 1e9, 3, 0.5).unwrap();
        let b = uniform_comb(0.5e9, 1e9, 2, 0.5).unwrap();
        assert!(a.merge(&b).is_ok());
        assert!(matches!(a.merge(&a), Err(Error::ShiftCollision { .. })));
    }

    #[test]
    fn state_comb_index_nearest_zero() {
        let c = uniform_comb(100e6, 2e9, 3, 0.3).unwrap();
        assert_eq!(c.state_comb_index(), Some(1));
        let c = uniform_comb(2.01e9, 150e6, 15, 0.1).unwrap();
        assert_eq!(c.state_comb_index(), Some(0));
        assert_eq!(CombSpec::empty().state_comb_index(), None);
    }
}
