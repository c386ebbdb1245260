//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Pump rate at or below the lasing threshold `N_th / tau_s`.
    BelowThreshold { pump_rate: f64, lasing_threshold: f64 },
    /// A physical parameter violates its range constraint.
    InvalidParameter(String),
    /// Comb construction asked for fewer than one line.
    InvalidCount(usize),
    /// Comb lines ended up with coinciding offsets during a merge.
    ShiftCollision { offset_hz: f64 },
    /// A comb line list violates the canonical-form invariants.
    InvalidComb(String),
    /// Simulation grid fields are inconsistent.
    InvalidGrid(String),
    /// `dt` is too coarse for the fastest comb/drive frequency.
    NyquistViolation { dt: f64, f_max: f64 },
    /// State left the physically plausible range during integration.
    NumericalBlowup { t: f64, detail: String },
    EmptyRecord,
    /// Two comb-power search windows intersect.
    WindowOverlap { a_hz: f64, b_hz: f64 },
    /// A search window contains no spectrum bins.
    EmptyWindow { offset_hz: f64 },
    /// Requested beat harmonics exceed the photodetector bandwidth.
    BandwidthExceeded { required_hz: f64, bandwidth_hz: f64 },
    InvalidRange(String),
    /// No cached baseline matches the activity-vector configuration.
    BaselineMissing,
    DegenerateTraining(String),
    DimensionMismatch { expected: usize, got: usize },
    /// Calibration target power too far outside the sweep's range.
    TargetOutOfRange { target_db: f64, min_db: f64, max_db: f64 },
    /// Wraps an error with the scan frequency (or detuning) that produced it.
    AtFrequency { frequency_hz: f64, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BelowThreshold { pump_rate, lasing_threshold } => write!(
                f,
                "pump rate {pump_rate:.6e} m^-3 s^-1 is at or below the lasing threshold {lasing_threshold:.6e}"
            ),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::InvalidCount(n) => write!(f, "comb line count must be >= 1, got {n}"),
            Error::ShiftCollision { offset_hz } => {
                write!(f, "comb merge produced coinciding lines at {offset_hz:.6e} Hz")
            }
            Error::InvalidComb(msg) => write!(f, "invalid comb: {msg}"),
            Error::InvalidGrid(msg) => write!(f, "invalid simulation grid: {msg}"),
            Error::NyquistViolation { dt, f_max } => write!(
                f,
                "dt = {dt:.6e} s too coarse for f_max = {f_max:.6e} Hz (need dt*f_max <= 1/20)"
            ),
            Error::NumericalBlowup { t, detail } => {
                write!(f, "numerical blowup at t = {t:.6e} s: {detail}")
            }
            Error::EmptyRecord => write!(f, "field record contains no samples"),
            Error::WindowOverlap { a_hz, b_hz } => write!(
                f,
                "search windows around {a_hz:.6e} Hz and {b_hz:.6e} Hz overlap"
            ),
            Error::EmptyWindow { offset_hz } => {
                write!(f, "no spectrum bins inside the window around {offset_hz:.6e} Hz")
            }
            Error::BandwidthExceeded { required_hz, bandwidth_hz } => write!(
                f,
                "beat harmonics reach {required_hz:.6e} Hz, beyond the {bandwidth_hz:.6e} Hz detector bandwidth"
            ),
            Error::InvalidRange(msg) => write!(f, "invalid range: {msg}"),
            Error::BaselineMissing => {
                write!(f, "no cached baseline for this configuration; compute one first")
            }
            Error::DegenerateTraining(msg) => write!(f, "degenerate training set: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::TargetOutOfRange { target_db, min_db, max_db } => write!(
                f,
                "target power {target_db:.2} dB outside sweep range [{min_db:.2}, {max_db:.2}] dB by more than 3 dB"
            ),
            Error::AtFrequency { frequency_hz, source } => {
                write!(f, "at {frequency_hz:.6e} Hz: {source}")
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::AtFrequency { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

impl Error {
    /// Annotate an error with the scan frequency that produced it.
    pub fn at_frequency(self, frequency_hz: f64) -> Error {
        Error::AtFrequency { frequency_hz, source: Box::new(self) }
    }

    /// True for errors that indicate a numerical failure rather than bad configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalBlowup { .. } => true,
            Error::AtFrequency { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
