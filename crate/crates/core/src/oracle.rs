//! Closed-form interference prediction.
//!
//! Every transmitted data symbol reaches a receiver as a truncated, possibly
//! tapered complex exponential. Its contribution to a victim bin is the inner
//! product of that exponential with the victim's (tapered) analysis
//! exponential over the capture window. Splitting the window where either
//! waveform changes form leaves pieces on which the summand is a raised-cosine
//! polynomial times one exponential, so each piece is a handful of geometric
//! partial sums.
//!
//! With i.i.d. zero-mean unit-power data the expected interference on victim
//! bin `b` is `Σ P_m |c[b][m] − δ|²` over every transmitted symbol, where the
//! `δ` removes the victim's own reference.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::link::Link;
use crate::numerology::{CpMode, FrameGeometry, NumerologyId, ScenarioConfig};
use crate::rx::{capture_windows, rx_transition, CaptureWindow};
use crate::window::transition_len;

/// Relative sine below which [`geometric_sum`] switches to its series form.
pub const NEAR_RESONANCE: f64 = 1e-9;

/// `e^{i·phase0} Σ_{n<len} e^{i2π f n}` in closed form.
pub fn geometric_sum(f: f64, len: usize, phase0: f64) -> Complex64 {
    if len == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let f = f - f.round();
    let l = len as f64;
    let s = (PI * f).sin();
    let magnitude = if s.abs() < NEAR_RESONANCE {
        l * (1.0 - (PI * f).powi(2) * (l * l - 1.0) / 6.0)
    } else {
        (PI * reduce_mod2(f * l)).sin() / s
    };
    Complex64::from_polar(magnitude, phase0 + PI * reduce_mod2(f * (l - 1.0)))
}

fn reduce_mod2(x: f64) -> f64 {
    x - 2.0 * (x / 2.0).round()
}

/// Sample weights on one piece of a waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Taper {
    Flat,
    /// `r[p − start]` with `r` the rising ramp of `len` samples.
    Rise {
        start: usize,
        len: usize,
    },
    /// `1 − r[p − start]`.
    Fall {
        start: usize,
        len: usize,
    },
}

const FLAT_TERMS: [(f64, i64); 1] = [(1.0, 0)];
const RISE_TERMS: [(f64, i64); 3] = [(0.5, 0), (-0.25, 1), (-0.25, -1)];
const FALL_TERMS: [(f64, i64); 3] = [(0.5, 0), (0.25, 1), (0.25, -1)];

impl Taper {
    pub fn weight(&self, p: usize) -> f64 {
        let ramp = |start: usize, len: usize| 0.5 - 0.5 * (PI * ((p - start) as f64 + 0.5) / len as f64).cos();
        match *self {
            Taper::Flat => 1.0,
            Taper::Rise { start, len } => ramp(start, len),
            Taper::Fall { start, len } => 1.0 - ramp(start, len),
        }
    }

    /// The taper as `Σ coef·e^{ikθ}`, `θ = π(p − start + ½)/len`.
    fn terms(&self) -> &'static [(f64, i64)] {
        match self {
            Taper::Flat => &FLAT_TERMS,
            Taper::Rise { .. } => &RISE_TERMS,
            Taper::Fall { .. } => &FALL_TERMS,
        }
    }

    /// Cycles per sample and cycles at sample `p` of the `k`-th term.
    fn term_phase(&self, k: i64, p: usize) -> (f64, f64) {
        match *self {
            Taper::Flat => (0.0, 0.0),
            Taper::Rise { start, len } | Taper::Fall { start, len } => {
                let period = 4 * len as i64;
                let at = (k * (2 * (p as i64 - start as i64) + 1)).rem_euclid(period);
                (k as f64 / (2 * len) as f64, at as f64 / period as f64)
            }
        }
    }
}

/// A stretch of the victim's capture on which one interferer symbol is a
/// single exponential `e^{i2π m (p − origin)/N}` under fixed tapers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub offset: usize,
    pub len: usize,
    pub symbol: usize,
    pub origin: usize,
    pub tx_taper: Taper,
    pub rx_taper: Taper,
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    range: Range<usize>,
    taper: Taper,
    symbol: usize,
    origin: usize,
}

fn push_piece(out: &mut Vec<Piece>, range: Range<usize>, taper: Taper, symbol: usize, origin: usize) {
    if !range.is_empty() {
        out.push(Piece { range, taper, symbol, origin });
    }
}

/// Transmitted support of every symbol of `id`, split at CP/body boundaries
/// and transmit-ramp boundaries. `w` is the transmit transition length.
fn tx_pieces(g: &FrameGeometry, id: NumerologyId, w: usize) -> Vec<Piece> {
    let frame = g.frame_samples;
    let mut out = Vec::new();
    match g.cp_mode {
        CpMode::Individual => {
            for (s, slot) in g.layout(id).iter().enumerate() {
                let (start, body) = (slot.start, slot.body_start());
                let end = slot.end();
                push_piece(&mut out, start..start + w, Taper::Rise { start, len: w }, s, body);
                push_piece(&mut out, start + w..body, Taper::Flat, s, body);
                push_piece(&mut out, body..end, Taper::Flat, s, body);
                // cyclic postfix overlapping the next symbol's CP
                push_piece(&mut out, end..(end + w).min(frame), Taper::Fall { start: end, len: w }, s, body);
            }
        }
        CpMode::Common => {
            let cp = g.cp1_samples;
            let rise = Taper::Rise { start: 0, len: w };
            match id {
                NumerologyId::One => {
                    push_piece(&mut out, 0..w, rise, 0, cp);
                    push_piece(&mut out, w..cp, Taper::Flat, 0, cp);
                    push_piece(&mut out, cp..frame, Taper::Flat, 0, cp);
                }
                NumerologyId::Two => {
                    let n = g.fft2;
                    // the shared CP copies block samples fft₁ − cp .. fft₁
                    let tail = g.fft1 - cp;
                    for s in 0..g.sym2_per_frame {
                        let origin = cp + s * n;
                        let q0 = (s * n).max(tail);
                        let q1 = (s + 1) * n;
                        if q0 < q1 {
                            let (p0, p1) = (q0 - tail, q1 - tail);
                            push_piece(&mut out, p0..p1.min(w), rise, s, origin);
                            push_piece(&mut out, p0.max(w)..p1, Taper::Flat, s, origin);
                        }
                        push_piece(&mut out, origin..origin + n, Taper::Flat, s, origin);
                    }
                }
            }
        }
    }
    out
}

/// Receive support of one capture window with transition `w`.
fn rx_pieces(window: CaptureWindow, w: usize) -> Vec<(Range<usize>, Taper)> {
    let CaptureWindow { offset: o, len } = window;
    let tail = o + len - w;
    [
        (o - w..o, Taper::Rise { start: o - w, len: w }),
        (o..tail, Taper::Flat),
        (tail..o + len, Taper::Fall { start: tail, len: w }),
    ]
    .into_iter()
    .filter(|(r, _)| !r.is_empty())
    .collect()
}

/// Decomposes a capture window (widened by its receive transition) into
/// segments of the interferer waveform, in order of offset then symbol.
///
/// Boundaries fall at interferer CP and body starts, transmit and receive
/// ramp edges and the window ends.
pub fn piecewise_segments(
    geometry: &FrameGeometry,
    window: CaptureWindow,
    interferer: NumerologyId,
    tx_transition: usize,
    rx_transition: usize,
) -> Vec<Segment> {
    let rx = rx_pieces(window, rx_transition);
    let mut out = Vec::new();
    for piece in tx_pieces(geometry, interferer, tx_transition) {
        for (range, rx_taper) in &rx {
            let lo = piece.range.start.max(range.start);
            let hi = piece.range.end.min(range.end);
            if lo < hi {
                out.push(Segment {
                    offset: lo,
                    len: hi - lo,
                    symbol: piece.symbol,
                    origin: piece.origin,
                    tx_taper: piece.taper,
                    rx_taper: *rx_taper,
                });
            }
        }
    }
    out.sort_by_key(|s| (s.offset, s.symbol));
    out
}

/// `(m·a mod n)/n` in cycles.
fn cycles(m: usize, a: i64, n: usize) -> f64 {
    (m as i64 * a).rem_euclid(n as i64) as f64 / n as f64
}

/// Coupling of interferer subcarrier `m` (transform size `n_i`) into victim
/// bin `b` (size `n_v`, window offset `o`) over the given segments.
fn coupling(segments: &[Segment], m: usize, n_i: usize, b: usize, n_v: usize, o: usize) -> Complex64 {
    let base_f = m as f64 / n_i as f64 - b as f64 / n_v as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for seg in segments {
        let lo = seg.offset;
        let base_phase = cycles(m, lo as i64 - seg.origin as i64, n_i) - cycles(b, lo as i64 - o as i64, n_v);
        for &(ct, kt) in seg.tx_taper.terms() {
            let (ft, pt) = seg.tx_taper.term_phase(kt, lo);
            for &(cr, kr) in seg.rx_taper.terms() {
                let (fr, pr) = seg.rx_taper.term_phase(kr, lo);
                let phase = 2.0 * PI * (base_phase + pt + pr).fract();
                acc += ct * cr * geometric_sum(base_f + ft + fr, seg.len, phase);
            }
        }
    }
    acc / ((n_i * n_v) as f64).sqrt()
}

/// An occupied resource element: symbol, absolute bin and power ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Element {
    pub symbol: usize,
    pub bin: usize,
    pub power_ratio: f64,
}

/// Couplings from every occupied element of one numerology into every
/// occupied element of a victim numerology, per unit interferer amplitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageMatrix {
    pub victim: NumerologyId,
    pub interferer: NumerologyId,
    pub victim_fft: usize,
    pub interferer_fft: usize,
    pub rows: Vec<Element>,
    pub cols: Vec<Element>,
    /// Row-major `rows.len() × cols.len()`.
    pub entries: Vec<Complex64>,
}

impl LeakageMatrix {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols.len() + col]
    }

    /// `Σ_m |c|²·P_m` per row.
    pub fn expected_power(&self) -> Vec<f64> {
        self.entries
            .chunks(self.cols.len().max(1))
            .map(|row| row.iter().zip(&self.cols).map(|(c, e)| c.norm_sqr() * e.power_ratio).sum())
            .collect()
    }

    /// `symbol·fft + bin`, the flat index used when exporting.
    pub fn victim_index(&self, row: usize) -> usize {
        let e = self.rows[row];
        e.symbol * self.victim_fft + e.bin
    }

    pub fn interferer_index(&self, col: usize) -> usize {
        let e = self.cols[col];
        e.symbol * self.interferer_fft + e.bin
    }
}

/// Everything the oracle needs about one scenario.
struct Plan {
    link: Link,
    tx_w: [usize; 2],
}

impl Plan {
    fn new(scenario: &ScenarioConfig) -> Result<Self> {
        let link = Link::new(scenario)?;
        let g = &link.geometry;
        let tx = |id| transition_len(scenario.windows.tx(id), g.tx_window_cp(id));
        let tx_w = [tx(NumerologyId::One)?, tx(NumerologyId::Two)?];
        Ok(Self { link, tx_w })
    }

    fn elements(&self, id: NumerologyId) -> Vec<Element> {
        let nsym = self.link.geometry.symbols_per_frame(id);
        let mut out = Vec::new();
        for symbol in 0..nsym {
            for user in self.link.users(id) {
                out.extend(user.bins.clone().map(|bin| Element { symbol, bin, power_ratio: user.power_ratio }));
            }
        }
        out
    }

    /// Per victim symbol: its window and the interferer's segments grouped by
    /// interferer symbol.
    fn segments(
        &self,
        victim: NumerologyId,
        interferer: NumerologyId,
    ) -> Result<Vec<(CaptureWindow, Vec<Vec<Segment>>)>> {
        let g = &self.link.geometry;
        let rolloff = self.link.scenario.windows.rx(victim);
        let nsym = g.symbols_per_frame(interferer);
        capture_windows(g, victim)
            .into_iter()
            .map(|w| {
                let w_rx = rx_transition(w, rolloff, g.cp_samples(victim))?;
                let mut grouped = vec![Vec::new(); nsym];
                for seg in piecewise_segments(g, w, interferer, self.tx_w[interferer.index()], w_rx) {
                    grouped[seg.symbol].push(seg);
                }
                Ok((w, grouped))
            })
            .collect()
    }
}

/// Couplings from numerology `interferer` into numerology `victim`; with
/// `victim == interferer` this is the own-grid response.
pub fn coupling_matrix(
    scenario: &ScenarioConfig,
    victim: NumerologyId,
    interferer: NumerologyId,
) -> Result<LeakageMatrix> {
    let plan = Plan::new(scenario)?;
    let g = &plan.link.geometry;
    let (n_v, n_i) = (g.fft_size(victim), g.fft_size(interferer));
    let rows = plan.elements(victim);
    let cols = plan.elements(interferer);
    let segments = plan.segments(victim, interferer)?;
    let entries = rows
        .par_iter()
        .flat_map_iter(|r| {
            let (w, grouped) = &segments[r.symbol];
            cols.iter().map(move |c| coupling(&grouped[c.symbol], c.bin, n_i, r.bin, n_v, w.offset))
        })
        .collect();
    Ok(LeakageMatrix { victim, interferer, victim_fft: n_v, interferer_fft: n_i, rows, cols, entries })
}

/// Couplings from the other numerology into `victim`.
pub fn leakage_matrix(scenario: &ScenarioConfig, victim: NumerologyId) -> Result<LeakageMatrix> {
    coupling_matrix(scenario, victim, victim.other())
}

/// Expected interference power on one occupied bin, averaged over the
/// victim's symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedBin {
    pub numerology: NumerologyId,
    pub user_index: usize,
    pub abs_bin: usize,
    pub interference_power: f64,
}

/// Expected interference from both numerologies (including the victim's own
/// inter-symbol and inter-carrier leakage) on every occupied bin, in the
/// order of [`crate::metrics::MetricsReport::bins`].
pub fn expected_interference(scenario: &ScenarioConfig) -> Result<Vec<ExpectedBin>> {
    let plan = Plan::new(scenario)?;
    let g = &plan.link.geometry;
    let mut out = Vec::new();
    for victim in NumerologyId::BOTH {
        let n_v = g.fft_size(victim);
        let nsym = g.symbols_per_frame(victim);
        let sources: Vec<_> = NumerologyId::BOTH
            .into_iter()
            .map(|i| Ok((i, g.fft_size(i), plan.elements(i), plan.segments(victim, i)?)))
            .collect::<Result<_>>()?;
        let bins: Vec<(usize, usize)> =
            plan.link.users(victim).iter().flat_map(|u| u.bins.clone().map(move |b| (u.user_index, b))).collect();
        let powers: Vec<f64> = bins
            .par_iter()
            .map(|&(_, b)| {
                let mut total = 0.0;
                for s in 0..nsym {
                    for (i, n_i, elements, segments) in &sources {
                        let (w, grouped) = &segments[s];
                        for e in elements {
                            let mut c = coupling(&grouped[e.symbol], e.bin, *n_i, b, n_v, w.offset);
                            if *i == victim && e.symbol == s && e.bin == b {
                                c -= 1.0;
                            }
                            total += c.norm_sqr() * e.power_ratio;
                        }
                    }
                }
                total / nsym as f64
            })
            .collect();
        out.extend(bins.iter().zip(powers).map(|(&(user_index, abs_bin), p)| ExpectedBin {
            numerology: victim,
            user_index,
            abs_bin,
            interference_power: p,
        }));
    }
    Ok(out)
}
