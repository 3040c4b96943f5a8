use thiserror::Error;

use crate::numerology::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cp_ratio {cp_ratio} times fft_size {fft_size} is not a whole number of samples")]
    NonIntegerCp { cp_ratio: f64, fft_size: usize },

    #[error("numerology pair violates the 2^k scaling relation: {0}")]
    ScalingMismatch(String),

    #[error("cyclic prefix of {cp} samples exceeds symbol length {len}")]
    CpTooLong { cp: usize, len: usize },

    #[error("roll-off {rolloff} gives a {transition}-sample transition, longer than the {cp}-sample CP")]
    RolloffTooLarge { rolloff: f64, transition: usize, cp: usize },

    #[error("window [{start}, {end}) lies outside a signal of {len} samples")]
    WindowOutOfRange { start: isize, end: isize, len: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("expected {expected} symbols, got {actual}")]
    SymbolCountMismatch { expected: usize, actual: usize },

    #[error("frequency {freq_hz} Hz is not on the {scs_hz} Hz subcarrier grid")]
    GridMisalignment { freq_hz: f64, scs_hz: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("scenario is invalid: {}", display_violations(.0))]
    Validation(Vec<Violation>),
}

fn display_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
