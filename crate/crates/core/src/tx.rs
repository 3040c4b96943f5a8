//! Transmit chain for one numerology: bits → BPSK → resource grid →
//! inverse transform → CP → raised-cosine windowing.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numerology::{FrameGeometry, NumerologyId, UserAllocation};
use crate::window::{rising_ramp, transition_len};

/// Time-domain samples at a known rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        Self { samples, sample_rate_hz }
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate_hz)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sum of `|x|²` over all samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// Frequency-domain symbols indexed by (OFDM symbol, bin); unallocated cells
/// are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub fft_size: usize,
    pub symbols: usize,
    pub sample_rate_hz: f64,
    cells: Vec<Complex64>,
}

impl ResourceGrid {
    pub fn zeros(fft_size: usize, symbols: usize, sample_rate_hz: f64) -> Self {
        Self { fft_size, symbols, sample_rate_hz, cells: vec![Complex64::new(0.0, 0.0); fft_size * symbols] }
    }

    pub fn row(&self, symbol: usize) -> &[Complex64] {
        &self.cells[symbol * self.fft_size..(symbol + 1) * self.fft_size]
    }

    pub fn row_mut(&mut self, symbol: usize) -> &mut [Complex64] {
        &mut self.cells[symbol * self.fft_size..(symbol + 1) * self.fft_size]
    }

    pub fn get(&self, symbol: usize, bin: usize) -> Complex64 {
        self.cells[symbol * self.fft_size + bin]
    }

    /// Sum of `|X|²` over all cells.
    pub fn energy(&self) -> f64 {
        self.cells.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Bit 0 → +1, bit 1 → −1.
pub fn map_bpsk(bits: &[bool]) -> Vec<Complex64> {
    bits.iter().map(|&b| Complex64::new(if b { -1.0 } else { 1.0 }, 0.0)).collect()
}

/// Places each user's symbols on its absolute bins, scaled by `√P`.
///
/// `users[u]` pairs an allocation with its absolute bin range on the
/// numerology's grid; `symbols[u]` holds `bin_count` values per OFDM symbol,
/// symbol-major.
pub fn build_grid(
    symbols: &[Vec<Complex64>],
    users: &[(&UserAllocation, Range<usize>)],
    geometry: &FrameGeometry,
    numerology: NumerologyId,
) -> Result<ResourceGrid> {
    let fft = geometry.fft_size(numerology);
    let nsym = geometry.symbols_per_frame(numerology);
    if symbols.len() != users.len() {
        return Err(Error::LengthMismatch { expected: users.len(), actual: symbols.len() });
    }
    let mut grid = ResourceGrid::zeros(fft, nsym, geometry.sample_rate_hz);
    for (data, (alloc, bins)) in symbols.iter().zip(users) {
        let count = bins.len();
        if data.len() != count * nsym {
            return Err(Error::LengthMismatch { expected: count * nsym, actual: data.len() });
        }
        if bins.end > fft {
            return Err(Error::LengthMismatch { expected: fft, actual: bins.end });
        }
        let amp = alloc.power_ratio().sqrt();
        for s in 0..nsym {
            let row = grid.row_mut(s);
            for (cell, &x) in row[bins.clone()].iter_mut().zip(&data[s * count..(s + 1) * count]) {
                *cell = x * amp;
            }
        }
    }
    Ok(grid)
}

/// Unitary forward/inverse DFTs with cached plans.
pub struct OfdmEngine {
    planner: FftPlanner<f64>,
}

impl Default for OfdmEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl OfdmEngine {
    pub fn new() -> Self {
        Self { planner: FftPlanner::new() }
    }

    fn run(&mut self, plan: Arc<dyn Fft<f64>>, input: &[Complex64]) -> Vec<Complex64> {
        let scale = 1.0 / (input.len() as f64).sqrt();
        let mut buf = input.to_vec();
        plan.process(&mut buf);
        for x in &mut buf {
            *x *= scale;
        }
        buf
    }

    /// `x[n] = N^{-1/2} Σ_b X[b] e^{+i2πbn/N}`.
    pub fn modulate(&mut self, bins: &[Complex64]) -> Vec<Complex64> {
        let plan = self.planner.plan_fft_inverse(bins.len());
        self.run(plan, bins)
    }

    /// `Y[b] = N^{-1/2} Σ_n y[n] e^{−i2πbn/N}`.
    pub fn demodulate(&mut self, block: &[Complex64]) -> Vec<Complex64> {
        let plan = self.planner.plan_fft_forward(block.len());
        self.run(plan, block)
    }

    pub fn modulate_grid(&mut self, grid: &ResourceGrid) -> Vec<ComplexSignal> {
        (0..grid.symbols).map(|s| ComplexSignal::new(self.modulate(grid.row(s)), grid.sample_rate_hz)).collect()
    }
}

/// One bare time-domain symbol per grid row.
pub fn ofdm_modulate(grid: &ResourceGrid) -> Vec<ComplexSignal> {
    OfdmEngine::new().modulate_grid(grid)
}

/// Prepends the last `cp_samples` samples.
pub fn add_cp(symbol: &ComplexSignal, cp_samples: usize) -> Result<ComplexSignal> {
    let n = symbol.len();
    if cp_samples > n {
        return Err(Error::CpTooLong { cp: cp_samples, len: n });
    }
    let mut out = Vec::with_capacity(n + cp_samples);
    out.extend_from_slice(&symbol.samples[n - cp_samples..]);
    out.extend_from_slice(&symbol.samples);
    Ok(ComplexSignal::new(out, symbol.sample_rate_hz))
}

/// CP-framed symbols after transmit windowing, with the plan for
/// overlap-adding them back into a frame.
///
/// Each symbol is followed by a `transition`-sample cyclic postfix. The first
/// `transition` samples (inside the CP) ramp up and the postfix ramps down,
/// so the postfix of symbol `s` overlaps the CP head of symbol `s + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSymbols {
    pub symbols: Vec<ComplexSignal>,
    /// Frame offset of each symbol's first (CP) sample.
    pub starts: Vec<usize>,
    pub transition: usize,
    /// Frame length without windowing.
    pub frame_len: usize,
}

impl WindowedSymbols {
    /// Overlap-adds into a frame of the un-windowed length; tails that run
    /// past the frame end are dropped.
    pub fn overlap_add(&self) -> ComplexSignal {
        let rate = self.symbols.first().map_or(0.0, |s| s.sample_rate_hz);
        let mut frame = vec![Complex64::new(0.0, 0.0); self.frame_len];
        for (sym, &start) in self.symbols.iter().zip(&self.starts) {
            let end = (start + sym.len()).min(self.frame_len);
            for (dst, src) in frame[start..end].iter_mut().zip(&sym.samples) {
                *dst += src;
            }
        }
        ComplexSignal::new(frame, rate)
    }
}

/// Applies raised-cosine edges of `W = round(rolloff · cp)` samples to
/// consecutive CP-framed symbols.
pub fn apply_tx_window(symbols: &[ComplexSignal], rolloff: f64, cp_samples: usize) -> Result<WindowedSymbols> {
    let w = transition_len(rolloff, cp_samples)?;
    let ramp = rising_ramp(w);
    let mut starts = Vec::with_capacity(symbols.len());
    let mut offset = 0;
    let mut out = Vec::with_capacity(symbols.len());
    for sym in symbols {
        let len = sym.len();
        if cp_samples > len || w > len - cp_samples {
            return Err(Error::CpTooLong { cp: cp_samples, len });
        }
        starts.push(offset);
        offset += len;
        if w == 0 {
            out.push(sym.clone());
            continue;
        }
        let mut ext = Vec::with_capacity(len + w);
        ext.extend_from_slice(&sym.samples);
        // cyclic postfix: the body continues past its end
        ext.extend_from_slice(&sym.samples[cp_samples..cp_samples + w]);
        for (x, r) in ext[..w].iter_mut().zip(&ramp) {
            *x *= r;
        }
        for (x, r) in ext[len..].iter_mut().zip(ramp.iter().rev()) {
            *x *= r;
        }
        out.push(ComplexSignal::new(ext, sym.sample_rate_hz));
    }
    Ok(WindowedSymbols { symbols: out, starts, transition: w, frame_len: offset })
}
