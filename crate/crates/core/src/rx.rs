//! Receive chain: FFT-window placement, optional receive windowing with
//! cyclic folding, forward transform, and per-user extraction.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerology::{FrameGeometry, NumerologyId};
use crate::tx::{ComplexSignal, OfdmEngine};
use crate::window::{rising_ramp, transition_len};

/// An FFT window: `len` samples starting at frame offset `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaptureWindow {
    pub offset: usize,
    pub len: usize,
}

/// FFT windows of one numerology, each starting at the end of its CP.
///
/// In common mode numerology 1 starts after the shared CP and numerology 2's
/// windows tile the following `fft₁` samples.
pub fn capture_windows(geometry: &FrameGeometry, numerology: NumerologyId) -> Vec<CaptureWindow> {
    geometry
        .layout(numerology)
        .iter()
        .map(|slot| CaptureWindow { offset: slot.body_start(), len: slot.body_len })
        .collect()
}

/// Receive-window transition length, truncated so the head never reaches
/// before the frame start.
pub fn rx_transition(window: CaptureWindow, rolloff: f64, cp_samples: usize) -> Result<usize> {
    Ok(transition_len(rolloff, cp_samples)?.min(window.offset))
}

/// Captures `len + W` samples ending at the window end, tapers the `W`-sample
/// head (rising) and the last `W` body samples (falling), then folds the
/// head onto the block end.
///
/// The rising and falling weights at samples one period apart sum to one, so
/// a signal periodic over the window (an own-numerology symbol with its CP)
/// passes unchanged.
pub fn apply_rx_window(
    frame: &ComplexSignal,
    window: CaptureWindow,
    rolloff: f64,
    cp_samples: usize,
) -> Result<ComplexSignal> {
    let CaptureWindow { offset, len } = window;
    if offset + len > frame.len() || len == 0 {
        return Err(Error::WindowOutOfRange { start: offset as isize, end: (offset + len) as isize, len: frame.len() });
    }
    let w = rx_transition(window, rolloff, cp_samples)?;
    if w > len {
        return Err(Error::RolloffTooLarge { rolloff, transition: w, cp: cp_samples });
    }
    let mut block = frame.samples[offset..offset + len].to_vec();
    if w > 0 {
        let ramp = rising_ramp(w);
        let head = &frame.samples[offset - w..offset];
        for (j, r) in ramp.iter().enumerate() {
            let tail = &mut block[len - w + j];
            *tail = *tail * (1.0 - r) + head[j] * r;
        }
    }
    Ok(ComplexSignal::new(block, frame.sample_rate_hz))
}

/// Unitary forward DFT of one FFT window.
pub fn ofdm_demodulate(block: &ComplexSignal) -> Vec<Complex64> {
    OfdmEngine::new().demodulate(&block.samples)
}

/// A user's bins divided by `√P`.
pub fn extract_user_symbols(bins: &[Complex64], user_bins: Range<usize>, power_ratio: f64) -> Vec<Complex64> {
    let amp = power_ratio.sqrt();
    bins[user_bins].iter().map(|b| b / amp).collect()
}
