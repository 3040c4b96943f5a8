//! Frame assembly for each CP mode, band placement, the composite sum, and
//! a continuous-frequency probe of transmitted spectra.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerology::{CpMode, FrameGeometry, NumerologyId};
use crate::tx::{add_cp, apply_tx_window, ComplexSignal};

fn concat(parts: &[ComplexSignal], rate: f64) -> ComplexSignal {
    ComplexSignal::new(parts.iter().flat_map(|p| p.samples.iter().copied()).collect(), rate)
}

/// Lays out one numerology's bare symbols for the frame.
///
/// Individual mode: each symbol gets its own CP, back to back, giving
/// `frame_samples`. Common mode: bare symbols back to back, giving `fft₁`
/// samples; the shared CP is added by [`compose_frame`].
pub fn assemble_numerology_frame(
    symbols: &[ComplexSignal],
    geometry: &FrameGeometry,
    numerology: NumerologyId,
    cp_mode: CpMode,
) -> Result<ComplexSignal> {
    let expected = geometry.symbols_per_frame(numerology);
    if symbols.len() != expected {
        return Err(Error::SymbolCountMismatch { expected, actual: symbols.len() });
    }
    let rate = geometry.sample_rate_hz;
    match cp_mode {
        CpMode::Individual => {
            let cp = geometry.cp_samples(numerology);
            let framed = symbols.iter().map(|s| add_cp(s, cp)).collect::<Result<Vec<_>>>()?;
            Ok(concat(&framed, rate))
        }
        CpMode::Common => Ok(concat(symbols, rate)),
    }
}

/// Like [`assemble_numerology_frame`], but always returns a full
/// `frame_samples` signal with transmit windowing applied.
///
/// In common mode the numerology's block receives its own copy of the shared
/// CP; summing both numerologies gives the same composite as
/// [`compose_frame`] by linearity.
pub fn frame_numerology(
    symbols: &[ComplexSignal],
    geometry: &FrameGeometry,
    numerology: NumerologyId,
    tx_rolloff: f64,
) -> Result<ComplexSignal> {
    let expected = geometry.symbols_per_frame(numerology);
    if symbols.len() != expected {
        return Err(Error::SymbolCountMismatch { expected, actual: symbols.len() });
    }
    let (framed, cp) = match geometry.common_cp() {
        None => {
            let cp = geometry.cp_samples(numerology);
            (symbols.iter().map(|s| add_cp(s, cp)).collect::<Result<Vec<_>>>()?, cp)
        }
        Some(cp_c) => {
            let block = concat(symbols, geometry.sample_rate_hz);
            (vec![add_cp(&block, cp_c)?], cp_c)
        }
    };
    Ok(apply_tx_window(&framed, tx_rolloff, cp)?.overlap_add())
}

/// Multiplies by `e^{+i2π f₀ n / Fs}`, moving every component up by `f₀`.
pub fn shift_to_band(frame: &ComplexSignal, start_frequency_hz: f64, scs_hz: f64) -> Result<ComplexSignal> {
    let steps = start_frequency_hz / scs_hz;
    if (steps - steps.round()).abs() > 1e-9 {
        return Err(Error::GridMisalignment { freq_hz: start_frequency_hz, scs_hz });
    }
    let fs = frame.sample_rate_hz;
    // f₀/Fs is an exact ratio of integers when f₀ is a whole number of bins,
    // so reduce n·f₀/Fs modulo 1 before taking the exponential.
    let cycles_per_sample = start_frequency_hz / fs;
    let samples = frame
        .samples
        .iter()
        .enumerate()
        .map(|(n, x)| {
            let c = cycles_per_sample * n as f64;
            x * Complex64::from_polar(1.0, 2.0 * PI * (c - c.round()))
        })
        .collect();
    Ok(ComplexSignal::new(samples, fs))
}

/// Sums the two numerology frames into the composite.
///
/// Individual mode: both inputs are `frame_samples` long. Common mode: both
/// are `fft₁` long, and the composite's tail is prepended as the one CP.
pub fn compose_frame(
    frame1: &ComplexSignal,
    frame2: &ComplexSignal,
    geometry: &FrameGeometry,
    cp_mode: CpMode,
) -> Result<ComplexSignal> {
    let expected = match cp_mode {
        CpMode::Individual => geometry.frame_samples,
        CpMode::Common => geometry.fft1,
    };
    for f in [frame1, frame2] {
        if f.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: f.len() });
        }
    }
    let sum = ComplexSignal::new(
        frame1.samples.iter().zip(&frame2.samples).map(|(a, b)| a + b).collect(),
        geometry.sample_rate_hz,
    );
    match cp_mode {
        CpMode::Individual => Ok(sum),
        CpMode::Common => add_cp(&sum, geometry.cp1_samples),
    }
}

/// `(1/L) Σ_n frame[start + n] e^{−i2π f n / Fs}` over an `L`-sample window.
pub fn tx_spectrum_probe(
    frame: &ComplexSignal,
    window_start: usize,
    window_len: usize,
    probe_freq_hz: f64,
) -> Result<Complex64> {
    let end = window_start + window_len;
    if window_len == 0 || end > frame.len() {
        return Err(Error::WindowOutOfRange { start: window_start as isize, end: end as isize, len: frame.len() });
    }
    let cycles_per_sample = probe_freq_hz / frame.sample_rate_hz;
    let sum = frame.samples[window_start..end].iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (n, x)| {
        let c = cycles_per_sample * n as f64;
        acc + x * Complex64::from_polar(1.0, -2.0 * PI * (c - c.round()))
    });
    Ok(sum / window_len as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerology::{build_frame_geometry, NumerologyConfig, ScenarioConfig, WindowConfig};
    use crate::tx::{ofdm_modulate, ResourceGrid};

    fn geometry(fft1: usize, k: u32, cp_ratio: f64, mode: CpMode) -> FrameGeometry {
        let num1 = NumerologyConfig::new(15e3, fft1, cp_ratio);
        build_frame_geometry(&ScenarioConfig {
            num1,
            num2: num1.scaled(k),
            allocations: vec![],
            guard_band_bins: 0,
            cp_mode: mode,
            windows: WindowConfig::default(),
            trials: 1,
            seed: 0,
        })
        .unwrap()
    }

    fn tone_symbols(g: &FrameGeometry, id: NumerologyId, bins: &[(usize, f64)]) -> Vec<ComplexSignal> {
        let mut grid = ResourceGrid::zeros(g.fft_size(id), g.symbols_per_frame(id), g.sample_rate_hz);
        for s in 0..grid.symbols {
            for &(b, v) in bins {
                grid.row_mut(s)[b] = Complex64::new(v * if s % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
            }
        }
        ofdm_modulate(&grid)
    }

    #[test]
    fn frame_lengths_small_case() {
        let gi = geometry(8, 1, 0.25, CpMode::Individual);
        let s2 = tone_symbols(&gi, NumerologyId::Two, &[(1, 1.0)]);
        let s1 = tone_symbols(&gi, NumerologyId::One, &[(1, 1.0)]);
        let f2 = assemble_numerology_frame(&s2, &gi, NumerologyId::Two, CpMode::Individual).unwrap();
        let f1 = assemble_numerology_frame(&s1, &gi, NumerologyId::One, CpMode::Individual).unwrap();
        assert_eq!(f2.len(), 10);
        assert_eq!(f1.len(), f2.len());
        // [cp|sym][cp|sym]
        assert_eq!(f2.samples[0], f2.samples[4]);
        assert_eq!(f2.samples[5], f2.samples[9]);

        let gc = geometry(8, 1, 0.25, CpMode::Common);
        let f2 = assemble_numerology_frame(&s2, &gc, NumerologyId::Two, CpMode::Common).unwrap();
        assert_eq!(f2.len(), 8);
        assert_eq!(f2.samples[..4], s2[0].samples[..]);

        let err = assemble_numerology_frame(&s2[..1], &gc, NumerologyId::Two, CpMode::Common);
        assert!(matches!(err, Err(Error::SymbolCountMismatch { expected: 2, actual: 1 })));
    }

    #[test]
    fn compose_common_prepends_tail() {
        let g = geometry(8, 1, 0.25, CpMode::Common);
        let s1 = tone_symbols(&g, NumerologyId::One, &[(1, 1.0), (3, 0.5)]);
        let f1 = assemble_numerology_frame(&s1, &g, NumerologyId::One, CpMode::Common).unwrap();
        let zero = ComplexSignal::zeros(8, g.sample_rate_hz);
        let out = compose_frame(&f1, &zero, &g, CpMode::Common).unwrap();
        assert_eq!(out.len(), 10);
        assert_eq!(out.samples[..2], out.samples[8..]);
        assert_eq!(out.samples[2..], f1.samples[..]);
        assert!(matches!(
            compose_frame(&f1, &ComplexSignal::zeros(7, 1.0), &g, CpMode::Common),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn windowed_framing_matches_compose_when_rectangular() {
        for mode in [CpMode::Individual, CpMode::Common] {
            let g = geometry(64, 1, 0.25, mode);
            let s1 = tone_symbols(&g, NumerologyId::One, &[(3, 1.0), (5, -0.7)]);
            let s2 = tone_symbols(&g, NumerologyId::Two, &[(6, 1.0), (7, 0.3)]);
            let a1 = assemble_numerology_frame(&s1, &g, NumerologyId::One, mode).unwrap();
            let a2 = assemble_numerology_frame(&s2, &g, NumerologyId::Two, mode).unwrap();
            let composed = compose_frame(&a1, &a2, &g, mode).unwrap();
            let f1 = frame_numerology(&s1, &g, NumerologyId::One, 0.0).unwrap();
            let f2 = frame_numerology(&s2, &g, NumerologyId::Two, 0.0).unwrap();
            for (n, c) in composed.samples.iter().enumerate() {
                assert!((c - f1.samples[n] - f2.samples[n]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn disjoint_bands_add_power() {
        // Common-mode blocks are bare bodies. Over them the NUM2 symbols (sign flipped per symbol)
        // only occupy odd NUM1 bins, so even NUM1 tones are orthogonal.
        let gc = geometry(64, 1, 0.25, CpMode::Common);
        let s1 = tone_symbols(&gc, NumerologyId::One, &[(2, 1.0), (4, -1.0), (6, 1.0)]);
        let s2 = tone_symbols(&gc, NumerologyId::Two, &[(4, 1.0), (5, 1.0)]);
        let a1 = assemble_numerology_frame(&s1, &gc, NumerologyId::One, CpMode::Common).unwrap();
        let a2 = assemble_numerology_frame(&s2, &gc, NumerologyId::Two, CpMode::Common).unwrap();
        let body = 0..gc.fft1;
        let energy = |x: &[Complex64]| x.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let sum: Vec<Complex64> = body.clone().map(|n| a1.samples[n] + a2.samples[n]).collect();
        let parts = energy(&a1.samples[body.clone()]) + energy(&a2.samples[body]);
        assert!((energy(&sum) - parts).abs() <= 1e-12 * parts);
    }

    #[test]
    fn composition_is_linear() {
        let g = geometry(32, 1, 0.25, CpMode::Common);
        let a = assemble_numerology_frame(
            &tone_symbols(&g, NumerologyId::One, &[(3, 1.0)]),
            &g,
            NumerologyId::One,
            CpMode::Common,
        )
        .unwrap();
        let c = assemble_numerology_frame(
            &tone_symbols(&g, NumerologyId::One, &[(5, 0.5)]),
            &g,
            NumerologyId::One,
            CpMode::Common,
        )
        .unwrap();
        let b = assemble_numerology_frame(
            &tone_symbols(&g, NumerologyId::Two, &[(4, 1.0)]),
            &g,
            NumerologyId::Two,
            CpMode::Common,
        )
        .unwrap();
        let zero = ComplexSignal::zeros(32, g.sample_rate_hz);
        let ac = ComplexSignal::new(a.samples.iter().zip(&c.samples).map(|(x, y)| x + y).collect(), g.sample_rate_hz);
        let lhs1 = compose_frame(&a, &b, &g, CpMode::Common).unwrap();
        let lhs2 = compose_frame(&c, &zero, &g, CpMode::Common).unwrap();
        let rhs = compose_frame(&ac, &b, &g, CpMode::Common).unwrap();
        for n in 0..rhs.len() {
            assert!((lhs1.samples[n] + lhs2.samples[n] - rhs.samples[n]).norm() < 1e-15);
        }
    }

    #[test]
    fn shift_is_bin_offset() {
        let g = geometry(16, 1, 0.25, CpMode::Common);
        assert_eq!(
            shift_to_band(&ComplexSignal::new(vec![Complex64::new(1.0, 2.0)], 1.0), 0.0, 1.0).unwrap().samples[0],
            Complex64::new(1.0, 2.0)
        );
        let base = tone_symbols(&g, NumerologyId::Two, &[(2, 1.0)]);
        let moved = tone_symbols(&g, NumerologyId::Two, &[(3, 1.0)]);
        let a = assemble_numerology_frame(&base, &g, NumerologyId::Two, CpMode::Common).unwrap();
        let b = assemble_numerology_frame(&moved, &g, NumerologyId::Two, CpMode::Common).unwrap();
        let shifted = shift_to_band(&a, 30e3, 30e3).unwrap();
        for (x, y) in shifted.samples.iter().zip(&b.samples) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(matches!(shift_to_band(&a, 15e3, 30e3), Err(Error::GridMisalignment { .. })));
    }

    #[test]
    fn probe_reads_amplitude_and_nulls() {
        let g = geometry(16, 1, 0.25, CpMode::Common);
        let s1 = tone_symbols(&g, NumerologyId::One, &[(2, 1.0), (3, -1.0)]);
        let bare = &s1[0];
        let amp = tx_spectrum_probe(bare, 0, 16, 2.0 * 15e3).unwrap();
        assert!((amp - Complex64::new(1.0 / 4.0, 0.0)).norm() < 1e-12);
        // NUM2 grid frequencies off the occupied NUM1 bins are nulls.
        for m in 2..8 {
            let p = tx_spectrum_probe(bare, 0, 16, m as f64 * 30e3).unwrap();
            assert!(p.norm() < 1e-12, "m={m} {p}");
        }
        // Bare NUM2 pair over 2·T₂: nulls on even NUM1 bins, leakage on odd.
        let s2 = tone_symbols(&g, NumerologyId::Two, &[(5, 1.0)]);
        let block = assemble_numerology_frame(&s2, &g, NumerologyId::Two, CpMode::Common).unwrap();
        for b in 1..8 {
            let p = tx_spectrum_probe(&block, 0, 16, b as f64 * 15e3).unwrap().norm();
            if b % 2 == 0 {
                assert!(p < 1e-12, "b={b} {p}");
            } else {
                assert!(p > 1e-3, "b={b} {p}");
            }
        }
        assert!(matches!(tx_spectrum_probe(bare, 10, 8, 0.0), Err(Error::WindowOutOfRange { .. })));
    }
}
