//! Frequency bands, jittered multi-tone pattern synthesis, population-activity
//! extraction, and readout classification.
//!
//! Jitter draws use an integer SplitMix64 stream keyed by (seed, band), with
//! per-trial seeds derived from (master seed, trial index), so tone lists are
//! reproducible bit-for-bit across platforms and schedules.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Tone;
use crate::probe::ProbeSetup;
use crate::spectrum::WindowKind;

/// `n+1` equally spaced band edges over `[f_lo, f_hi]`.
pub fn make_bands(f_lo: f64, f_hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(f_hi > f_lo) || n < 1 {
        return Err(Error::InvalidRange(format!(
            "need f_hi > f_lo and n >= 1, got [{f_lo:e}, {f_hi:e}] / {n}"
        )));
    }
    let width = (f_hi - f_lo) / n as f64;
    Ok((0..=n).map(|i| f_lo + i as f64 * width).collect())
}

/// Center frequency of band `k` (0-based).
pub fn band_center(band_edges: &[f64], k: usize) -> f64 {
    0.5 * (band_edges[k] + band_edges[k + 1])
}

/// Where to pad bit vectors shorter than the band count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadPosition {
    Trailing,
    Leading,
}

/// Extend `bits` with zeros to length `n_bands`.
pub fn pad_bits(bits: &[bool], n_bands: usize, position: PadPosition) -> Vec<bool> {
    let mut out = Vec::with_capacity(n_bands);
    let missing = n_bands.saturating_sub(bits.len());
    match position {
        PadPosition::Trailing => {
            out.extend_from_slice(bits);
            out.extend(std::iter::repeat(false).take(missing));
        }
        PadPosition::Leading => {
            out.extend(std::iter::repeat(false).take(missing));
            out.extend_from_slice(bits);
        }
    }
    out.truncate(n_bands);
    out
}

/// A labeled multi-band binary input pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub label: String,
    pub bits: Vec<bool>,
}

/// The full pattern-classification task definition.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    /// Ascending, length n_bands + 1.
    pub band_edges: Vec<f64>,
    pub patterns: Vec<Pattern>,
    /// Multiplicative jitter, in [0, 1).
    pub jitter_ratio: f64,
    /// Modulation depth m of every emitted tone.
    pub tone_depth: f64,
}

impl PatternSet {
    pub fn n_bands(&self) -> usize {
        self.band_edges.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.band_edges.len() < 2 {
            return Err(Error::InvalidRange("need at least one band".into()));
        }
        if !self.band_edges.windows(2).all(|p| p[1] > p[0]) {
            return Err(Error::InvalidRange("band edges must be strictly ascending".into()));
        }
        if !(0.0..1.0).contains(&self.jitter_ratio) {
            return Err(Error::InvalidRange(format!(
                "jitter_ratio must be in [0, 1), got {}",
                self.jitter_ratio
            )));
        }
        let n = self.n_bands();
        let mut seen = std::collections::HashSet::new();
        for p in &self.patterns {
            if p.bits.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.bits.len() });
            }
            if !seen.insert(p.label.as_str()) {
                return Err(Error::InvalidRange(format!("duplicate pattern label {:?}", p.label)));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer; the fixed integer backbone of every random draw.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for stream `index` of a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(1)))
}

/// Uniform draw in [-1, 1] for (seed, band), built from the top 53 bits of a
/// SplitMix64 word so the float conversion is exact on every platform.
fn jitter_draw(seed: u64, band: u64) -> f64 {
    let word = splitmix64(seed ^ splitmix64(band.wrapping_add(0x517C_C1B7_2722_0A95)));
    let unit = (word >> 11) as f64 / (1u64 << 53) as f64; // [0, 1)
    2.0 * unit - 1.0
}

/// Emit one tone per set bit: frequency `center * (1 + jitter_ratio * u)`
/// clamped into its band, depth `tone_depth`, zero phase.
pub fn pattern_tones(
    bits: &[bool],
    band_edges: &[f64],
    jitter_ratio: f64,
    tone_depth: f64,
    seed: u64,
) -> Vec<Tone> {
    let n_bands = band_edges.len().saturating_sub(1);
    debug_assert_eq!(bits.len(), n_bands);
    let mut tones = Vec::new();
    for (k, &bit) in bits.iter().enumerate().take(n_bands) {
        if !bit {
            continue;
        }
        let center = band_center(band_edges, k);
        let f = center * (1.0 + jitter_ratio * jitter_draw(seed, k as u64));
        let f = f.clamp(band_edges[k], band_edges[k + 1]);
        tones.push(Tone::new(f, tone_depth, 0.0));
    }
    tones
}

/// FNV-1a over the f64 bit patterns of a probe configuration; binds cached
/// baselines to the exact configuration they were computed with.
fn config_digest(probe: &ProbeSetup) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut h = OFFSET;
    let mut eat = |v: u64| {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    let p = &probe.params;
    for v in [p.tau_s, p.g_n, p.n_th, p.tau_p, p.alpha, p.r_th, p.kappa, probe.bias_ratio] {
        eat(v.to_bits());
    }
    for line in probe.comb.lines() {
        eat(line.offset_hz.to_bits());
        eat(line.amplitude.to_bits());
        eat(line.phase_rad.to_bits());
    }
    eat(probe.grid.dt.to_bits());
    eat(probe.grid.t_transient.to_bits());
    eat(probe.grid.t_record.to_bits());
    eat(probe.grid.record_stride as u64);
    for &o in &probe.tracked_offsets {
        eat(o.to_bits());
    }
    eat(probe.search_halfwidth.to_bits());
    eat(match probe.window {
        WindowKind::Rectangular => 0,
        WindowKind::Hann => 1,
    });
    h
}

/// Cached no-input comb powers for one probe configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub powers: Vec<f64>,
    pub config_digest: u64,
}

/// Run the no-input configuration once and cache its tracked powers.
pub fn compute_baseline(probe: &ProbeSetup) -> Result<Baseline> {
    Ok(Baseline { powers: probe.baseline_powers()?, config_digest: config_digest(probe) })
}

/// Per-comb power change versus the no-input baseline, dB.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityVector {
    pub deltas: Vec<f64>,
    /// Digest of the generating configuration.
    pub config_digest: u64,
}

/// Integrate with `tones` and subtract the cached baseline per tracked comb.
///
/// The baseline must have been computed for the *same* probe configuration.
pub fn activity_vector(
    probe: &ProbeSetup,
    tones: &[Tone],
    baseline: &Baseline,
) -> Result<ActivityVector> {
    let digest = config_digest(probe);
    if digest != baseline.config_digest || baseline.powers.len() != probe.tracked_offsets.len() {
        return Err(Error::BaselineMissing);
    }
    let powers = probe.powers(tones)?;
    let deltas = powers.iter().zip(&baseline.powers).map(|(p, b)| p - b).collect();
    Ok(ActivityVector { deltas, config_digest: digest })
}

/// Which side of the threshold counts as a set bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeSign {
    /// Bit set where delta > +threshold.
    Excitatory,
    /// Bit set where delta < -threshold.
    Inhibitory,
}

/// Threshold the activity vector into a bit vector.
pub fn binary_decode(activity: &ActivityVector, threshold_db: f64, sign: DecodeSign) -> Vec<bool> {
    activity
        .deltas
        .iter()
        .map(|&d| match sign {
            DecodeSign::Excitatory => d > threshold_db,
            DecodeSign::Inhibitory => d < -threshold_db,
        })
        .collect()
}

/// Two-means split of the deltas; returns the midpoint of the class means.
/// Used as the automatic decode threshold.
pub fn auto_threshold(deltas: &[f64]) -> f64 {
    if deltas.len() < 2 {
        return deltas.first().copied().unwrap_or(0.0);
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    let mut prefix = 0.0;
    let mut best = (f64::INFINITY, 0.0);
    for k in 1..sorted.len() {
        prefix += sorted[k - 1];
        let m1 = prefix / k as f64;
        let m2 = (total - prefix) / (sorted.len() - k) as f64;
        let cost: f64 = sorted[..k].iter().map(|v| (v - m1) * (v - m1)).sum::<f64>()
            + sorted[k..].iter().map(|v| (v - m2) * (v - m2)).sum::<f64>();
        if cost < best.0 {
            best = (cost, 0.5 * (m1 + m2));
        }
    }
    best.1
}

/// Pick the decode sign with the larger total |delta| on that side.
pub fn auto_sign(deltas: &[f64]) -> DecodeSign {
    let pos: f64 = deltas.iter().filter(|&&d| d > 0.0).sum();
    let neg: f64 = deltas.iter().filter(|&&d| d < 0.0).map(|d| -d).sum();
    if pos >= neg {
        DecodeSign::Excitatory
    } else {
        DecodeSign::Inhibitory
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutKind {
    NearestCentroid,
    LinearLeastSquares,
}

/// Trained readout: per-label centroids or a ridge-regularized linear map.
#[derive(Debug, Clone, PartialEq)]
pub enum ReadoutModel {
    NearestCentroid {
        labels: Vec<String>,
        centroids: Vec<Vec<f64>>,
    },
    LinearLeastSquares {
        labels: Vec<String>,
        /// weights[l][d]: score_l = w_l . x + intercept_l
        weights: Vec<Vec<f64>>,
        intercepts: Vec<f64>,
    },
}

impl ReadoutModel {
    pub fn labels(&self) -> &[String] {
        match self {
            ReadoutModel::NearestCentroid { labels, .. } => labels,
            ReadoutModel::LinearLeastSquares { labels, .. } => labels,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ReadoutModel::NearestCentroid { centroids, .. } => {
                centroids.first().map_or(0, Vec::len)
            }
            ReadoutModel::LinearLeastSquares { weights, .. } => {
                weights.first().map_or(0, Vec::len)
            }
        }
    }
}

pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Train a readout on labeled activity vectors. Labels keep first-appearance
/// order, which also fixes the classification tie-break.
pub fn train_readout(
    labeled: &[(ActivityVector, String)],
    kind: ReadoutKind,
) -> Result<ReadoutModel> {
    if labeled.is_empty() {
        return Err(Error::DegenerateTraining("no training examples".into()));
    }
    let dim = labeled[0].0.deltas.len();
    for (v, _) in labeled {
        if v.deltas.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.deltas.len() });
        }
    }
    let mut labels: Vec<String> = Vec::new();
    for (_, l) in labeled {
        if !labels.contains(l) {
            labels.push(l.clone());
        }
    }

    match kind {
        ReadoutKind::NearestCentroid => {
            let mut centroids = vec![vec![0.0; dim]; labels.len()];
            let mut counts = vec![0usize; labels.len()];
            for (v, l) in labeled {
                let li = labels.iter().position(|x| x == l).unwrap();
                counts[li] += 1;
                for (c, d) in centroids[li].iter_mut().zip(&v.deltas) {
                    *c += d;
                }
            }
            for (c, n) in centroids.iter_mut().zip(&counts) {
                for v in c.iter_mut() {
                    *v /= *n as f64;
                }
            }
            Ok(ReadoutModel::NearestCentroid { labels, centroids })
        }
        ReadoutKind::LinearLeastSquares => {
            train_least_squares(labeled, labels, dim, DEFAULT_RIDGE)
        }
    }
}

/// Ridge-regularized normal equations for one-hot targets, with an augmented
/// intercept column.
fn train_least_squares(
    labeled: &[(ActivityVector, String)],
    labels: Vec<String>,
    dim: usize,
    ridge: f64,
) -> Result<ReadoutModel> {
    let d1 = dim + 1;
    let n_labels = labels.len();
    // Accumulate X^T X and X^T Y directly.
    let mut xtx = vec![vec![0.0f64; d1]; d1];
    let mut xty = vec![vec![0.0f64; n_labels]; d1];
    for (v, l) in labeled {
        let li = labels.iter().position(|x| x == l).unwrap();
        let x = |i: usize| if i < dim { v.deltas[i] } else { 1.0 };
        for i in 0..d1 {
            for j in 0..d1 {
                xtx[i][j] += x(i) * x(j);
            }
            xty[i][li] += x(i);
        }
    }
    // Scale the ridge to the data magnitude so the guard works at any unit.
    let trace: f64 = (0..d1).map(|i| xtx[i][i]).sum();
    let lambda = ridge * (trace / d1 as f64).max(1.0);
    for (i, row) in xtx.iter_mut().enumerate() {
        row[i] += lambda;
    }

    let solution = solve_linear_system(&mut xtx, &mut xty).ok_or_else(|| {
        Error::DegenerateTraining("normal equations are rank-deficient beyond the ridge guard".into())
    })?;
    let weights = (0..n_labels)
        .map(|l| (0..dim).map(|i| solution[i][l]).collect())
        .collect();
    let intercepts = (0..n_labels).map(|l| solution[dim][l]).collect();
    Ok(ReadoutModel::LinearLeastSquares { labels, weights, intercepts })
}

/// Gaussian elimination with partial pivoting; `b` holds multiple RHS columns.
/// Returns None on a vanishing pivot.
fn solve_linear_system(a: &mut [Vec<f64>], b: &mut [Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let m = b[0].len();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            for k in 0..m {
                b[row][k] -= factor * b[col][k];
            }
        }
    }
    let mut x = vec![vec![0.0; m]; n];
    for row in (0..n).rev() {
        for k in 0..m {
            let mut acc = b[row][k];
            for j in row + 1..n {
                acc -= a[row][j] * x[j][k];
            }
            x[row][k] = acc / a[row][row];
        }
    }
    Some(x)
}

/// Classify one activity vector; ties resolve to the earliest label.
pub fn classify(model: &ReadoutModel, activity: &ActivityVector) -> Result<String> {
    let dim = model.dimension();
    if activity.deltas.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: activity.deltas.len() });
    }
    match model {
        ReadoutModel::NearestCentroid { labels, centroids } => {
            let mut best = (f64::INFINITY, 0usize);
            for (i, c) in centroids.iter().enumerate() {
                let d2: f64 = c
                    .iter()
                    .zip(&activity.deltas)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d2 < best.0 {
                    best = (d2, i);
                }
            }
            Ok(labels[best.1].clone())
        }
        ReadoutModel::LinearLeastSquares { labels, weights, intercepts } => {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (i, (w, b)) in weights.iter().zip(intercepts).enumerate() {
                let score: f64 =
                    w.iter().zip(&activity.deltas).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
                if score > best.0 {
                    best = (score, i);
                }
            }
            Ok(labels[best.1].clone())
        }
    }
}

/// One classified trial of the pattern experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialActivity {
    pub pattern_index: usize,
    pub label: String,
    pub trial: usize,
    pub seed: u64,
    pub activity: ActivityVector,
}

/// Run `trials_per_pattern` jittered trials of every pattern, in parallel,
/// with per-trial seeds derived from the master seed. Output order is
/// (pattern, trial), independent of scheduling.
pub fn run_trials(
    probe: &ProbeSetup,
    set: &PatternSet,
    trials_per_pattern: usize,
    master_seed: u64,
) -> Result<Vec<TrialActivity>> {
    set.validate()?;
    let baseline = compute_baseline(probe)?;
    let jobs: Vec<(usize, usize)> = (0..set.patterns.len())
        .flat_map(|p| (0..trials_per_pattern).map(move |t| (p, t)))
        .collect();
    jobs.par_iter()
        .map(|&(p, t)| {
            let global_index = (p * trials_per_pattern + t) as u64;
            let seed = derive_seed(master_seed, global_index);
            let tones = pattern_tones(
                &set.patterns[p].bits,
                &set.band_edges,
                set.jitter_ratio,
                set.tone_depth,
                seed,
            );
            let activity = activity_vector(probe, &tones, &baseline)?;
            Ok(TrialActivity {
                pattern_index: p,
                label: set.patterns[p].label.clone(),
                trial: t,
                seed,
                activity,
            })
        })
        .collect()
}

/// Leave-one-out accuracy of a readout kind over labeled trials.
pub fn leave_one_out_accuracy(trials: &[TrialActivity], kind: ReadoutKind) -> Result<f64> {
    if trials.len() < 2 {
        return Err(Error::DegenerateTraining("need at least two trials".into()));
    }
    let mut correct = 0usize;
    for i in 0..trials.len() {
        let training: Vec<(ActivityVector, String)> = trials
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, t)| (t.activity.clone(), t.label.clone()))
            .collect();
        let model = train_readout(&training, kind)?;
        if classify(&model, &trials[i].activity)? == trials[i].label {
            correct += 1;
        }
    }
    Ok(correct as f64 / trials.len() as f64)
}

/// Silhouette value of every trial under Euclidean distance, grouped by label.
/// Positive values mean the trial sits closer to its own cluster than to any
/// other.
pub fn silhouette_scores(trials: &[TrialActivity]) -> Vec<f64> {
    let n = trials.len();
    let dist = |a: &TrialActivity, b: &TrialActivity| -> f64 {
        a.activity
            .deltas
            .iter()
            .zip(&b.activity.deltas)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let labels: Vec<&str> = {
        let mut ls: Vec<&str> = Vec::new();
        for t in trials {
            if !ls.contains(&t.label.as_str()) {
                ls.push(&t.label);
            }
        }
        ls
    };
    (0..n)
        .map(|i| {
            let own = &trials[i].label;
            let mut intra = (0.0, 0usize);
            let mut inter: Vec<(f64, usize)> = vec![(0.0, 0); labels.len()];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = dist(&trials[i], &trials[j]);
                if &trials[j].label == own {
                    intra.0 += d;
                    intra.1 += 1;
                } else {
                    let li = labels.iter().position(|l| *l == trials[j].label).unwrap();
                    inter[li].0 += d;
                    inter[li].1 += 1;
                }
            }
            if intra.1 == 0 {
                return 0.0; // singleton cluster convention
            }
            let a = intra.0 / intra.1 as f64;
            let b = inter
                .iter()
                .filter(|(_, c)| *c > 0)
                .map(|(s, c)| s / *c as f64)
                .fold(f64::INFINITY, f64::min);
            if !b.is_finite() {
                return 0.0;
            }
            (b - a) / a.max(b)
        })
        .collect()
}

/// Second built-in scenario: three dual-tone classes over bands centered on
/// multiples of the comb spacing. Class tone pairs are drawn (distinct) from
/// the seed.
pub fn dual_tone_scenario(
    comb_spacing: f64,
    n_bands: usize,
    jitter_ratio: f64,
    tone_depth: f64,
    seed: u64,
) -> Result<PatternSet> {
    if n_bands < 3 {
        return Err(Error::InvalidRange("dual-tone scenario needs >= 3 bands".into()));
    }
    // Band k (0-based) centered on (k+1) * spacing.
    let band_edges: Vec<f64> =
        (0..=n_bands).map(|k| (k as f64 + 0.5) * comb_spacing).collect();

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut draw = 0u64;
    while pairs.len() < 3 {
        let a = (splitmix64(derive_seed(seed, draw)) % n_bands as u64) as usize;
        let b = (splitmix64(derive_seed(seed, draw + 1)) % n_bands as u64) as usize;
        draw += 2;
        if a != b {
            let pair = (a.min(b), a.max(b));
            if !pairs.contains(&pair) {
                pairs.push(pair);
            }
        }
    }
    let patterns = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let mut bits = vec![false; n_bands];
            bits[a] = true;
            bits[b] = true;
            Pattern { label: format!("class{}", i + 1), bits }
        })
        .collect();
    Ok(PatternSet { band_edges, patterns, jitter_ratio, tone_depth })
}
