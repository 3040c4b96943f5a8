//! Raised-cosine transition ramps shared by the transmit and receive windows.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Continuous raised-cosine rise on `x ∈ [0, 1]`: `½(1 − cos πx)`.
pub fn raised_cosine(x: f64) -> f64 {
    0.5 * (1.0 - (PI * x.clamp(0.0, 1.0)).cos())
}

/// `w` samples of a rising ramp, sampled at the centres `(n + ½)/w`.
///
/// Sampling at centres makes the ramp complementary to its reverse:
/// `rise[n] + rise[w − 1 − n] = 1`.
pub fn rising_ramp(w: usize) -> Vec<f64> {
    (0..w).map(|n| raised_cosine((n as f64 + 0.5) / w as f64)).collect()
}

/// Transition length `W = round(rolloff · cp)`.
pub fn transition_len(rolloff: f64, cp_samples: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::RolloffTooLarge {
            rolloff,
            transition: (rolloff.abs() * cp_samples as f64).round() as usize,
            cp: cp_samples,
        });
    }
    let w = (rolloff * cp_samples as f64).round() as usize;
    if w > cp_samples {
        return Err(Error::RolloffTooLarge { rolloff, transition: w, cp: cp_samples });
    }
    Ok(w)
}
