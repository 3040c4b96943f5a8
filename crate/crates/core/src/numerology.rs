//! Numerology and scenario configuration, band placement, and the
//! sample-domain geometry of one LCM frame.
//!
//! Two numerologies share a band. Numerology 1 uses spacing `Δf₁` and an
//! `N`-point transform; numerology 2 uses `2^k·Δf₁` and `N/2^k` points, so
//! `2^k` of its symbols line up with one numerology-1 symbol. Both are
//! sampled at `Fs = N·Δf₁`.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that `cp_ratio · fft_size` is integral.
const CP_INTEGER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NumerologyId {
    One,
    Two,
}

impl NumerologyId {
    pub const BOTH: [NumerologyId; 2] = [NumerologyId::One, NumerologyId::Two];

    pub fn number(self) -> u8 {
        match self {
            NumerologyId::One => 1,
            NumerologyId::Two => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(NumerologyId::One),
            2 => Some(NumerologyId::Two),
            _ => None,
        }
    }

    pub fn other(self) -> Self {
        match self {
            NumerologyId::One => NumerologyId::Two,
            NumerologyId::Two => NumerologyId::One,
        }
    }

    pub(crate) fn index(self) -> usize {
        self.number() as usize - 1
    }
}

impl fmt::Display for NumerologyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NUM{}", self.number())
    }
}

/// One numerology's grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumerologyConfig {
    pub scs_hz: f64,
    pub fft_size: usize,
    /// CP length as a fraction of the useful symbol.
    pub cp_ratio: f64,
    pub scaling_k: u32,
}

impl NumerologyConfig {
    pub fn new(scs_hz: f64, fft_size: usize, cp_ratio: f64) -> Self {
        Self { scs_hz, fft_size, cp_ratio, scaling_k: 0 }
    }

    /// The partner numerology with `2^k` times the spacing and `1/2^k` the
    /// transform size.
    pub fn scaled(&self, k: u32) -> Self {
        Self {
            scs_hz: self.scs_hz * f64::from(1u32 << k),
            fft_size: self.fft_size >> k,
            cp_ratio: self.cp_ratio,
            scaling_k: k,
        }
    }

    pub fn cp_samples(&self) -> Result<usize> {
        let exact = self.cp_ratio * self.fft_size as f64;
        let rounded = exact.round();
        if !exact.is_finite() || rounded < 1.0 || (exact - rounded).abs() > CP_INTEGER_TOL {
            return Err(Error::NonIntegerCp { cp_ratio: self.cp_ratio, fft_size: self.fft_size });
        }
        Ok(rounded as usize)
    }

    pub fn symbol_duration_s(&self) -> f64 {
        1.0 / self.scs_hz
    }

    fn fft_size_ok(&self) -> bool {
        self.fft_size >= 8 && self.fft_size.is_power_of_two()
    }
}

/// A contiguous block of subcarriers owned by one user.
///
/// For numerology 1, `start_bin` is the absolute bin on its own grid. For
/// numerology 2 it is relative to the numerology-2 band origin, which sits
/// `guard_band_bins·Δf₁` above the highest numerology-1 bin (see
/// [`ScenarioConfig::band_origin`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserAllocation {
    pub numerology: NumerologyId,
    /// 1-based index within the numerology.
    pub user_index: usize,
    pub start_bin: usize,
    pub bin_count: usize,
    /// Per-subcarrier power in dB; the linear ratio is [`Self::power_ratio`].
    pub power_db: f64,
}

impl UserAllocation {
    pub fn new(numerology: NumerologyId, user_index: usize, start_bin: usize, bin_count: usize, power_db: f64) -> Self {
        Self { numerology, user_index, start_bin, bin_count, power_db }
    }

    pub fn power_ratio(&self) -> f64 {
        10f64.powf(self.power_db / 10.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CpMode {
    /// Every symbol of each numerology carries its own CP.
    Individual,
    /// One CP shared by the composite; numerology 2 sends `2^k` bare symbols.
    Common,
}

/// Raised-cosine roll-off factors; 0 means rectangular.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub tx_rolloff_num1: f64,
    pub tx_rolloff_num2: f64,
    pub rx_rolloff_num1: f64,
    pub rx_rolloff_num2: f64,
}

impl WindowConfig {
    pub fn tx(&self, id: NumerologyId) -> f64 {
        match id {
            NumerologyId::One => self.tx_rolloff_num1,
            NumerologyId::Two => self.tx_rolloff_num2,
        }
    }

    pub fn rx(&self, id: NumerologyId) -> f64 {
        match id {
            NumerologyId::One => self.rx_rolloff_num1,
            NumerologyId::Two => self.rx_rolloff_num2,
        }
    }

    fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("tx1", self.tx_rolloff_num1),
            ("tx2", self.tx_rolloff_num2),
            ("rx1", self.rx_rolloff_num1),
            ("rx2", self.rx_rolloff_num2),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub num1: NumerologyConfig,
    pub num2: NumerologyConfig,
    pub allocations: Vec<UserAllocation>,
    /// Guard width in multiples of `Δf₁`.
    pub guard_band_bins: usize,
    pub cp_mode: CpMode,
    pub windows: WindowConfig,
    pub trials: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn numerology(&self, id: NumerologyId) -> &NumerologyConfig {
        match id {
            NumerologyId::One => &self.num1,
            NumerologyId::Two => &self.num2,
        }
    }

    pub fn users(&self, id: NumerologyId) -> impl Iterator<Item = &UserAllocation> {
        self.allocations.iter().filter(move |a| a.numerology == id)
    }

    /// Numerology-2 band origin expressed in `Δf₁` units, before snapping to
    /// the numerology-2 grid.
    pub fn band_origin_units(&self) -> usize {
        let top1 = self.users(NumerologyId::One).map(|a| a.start_bin + a.bin_count).max();
        top1.unwrap_or(0) + self.guard_band_bins
    }

    /// Absolute numerology-2 bin of the band origin (rounded up onto the
    /// numerology-2 grid; validation rejects guards that need rounding).
    pub fn band_origin(&self) -> usize {
        let step = 1usize << self.num2.scaling_k.min(31);
        self.band_origin_units().div_ceil(step)
    }

    /// Absolute bins on the owning numerology's grid.
    pub fn absolute_bins(&self, alloc: &UserAllocation) -> Range<usize> {
        let start = match alloc.numerology {
            NumerologyId::One => alloc.start_bin,
            NumerologyId::Two => self.band_origin() + alloc.start_bin,
        };
        start..start + alloc.bin_count
    }

    /// Allocations of one numerology with their absolute bins, in config order.
    pub fn placed_users(&self, id: NumerologyId) -> Vec<(&UserAllocation, Range<usize>)> {
        self.users(id).map(|a| (a, self.absolute_bins(a))).collect()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.num1.fft_size as f64 * self.num1.scs_hz
    }
}

/// A named invariant a scenario failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadFftSize { numerology: NumerologyId, fft_size: usize },
    NonIntegerCp { numerology: NumerologyId, cp_ratio: f64, fft_size: usize },
    CpTooLong { numerology: NumerologyId, cp_ratio: f64 },
    ScalingMismatch(String),
    CommonCpNeedsScaling,
    EmptyAllocation { numerology: NumerologyId, user: usize },
    NonPositivePower { numerology: NumerologyId, user: usize },
    OverlappingAllocations { numerology: NumerologyId, first: usize, second: usize },
    GridMisalignment { origin_units: usize, scaling_k: u32 },
    DcBinUsed { numerology: NumerologyId, user: usize },
    BandOverflow { numerology: NumerologyId, user: usize, end_bin: usize, limit: usize },
    BadRolloff { window: &'static str, rolloff: f64 },
    ZeroTrials,
}

impl Violation {
    /// Short invariant name, stable for diagnostics and tests.
    pub fn name(&self) -> &'static str {
        match self {
            Violation::BadFftSize { .. } => "BadFftSize",
            Violation::NonIntegerCp { .. } => "NonIntegerCp",
            Violation::CpTooLong { .. } => "CpTooLong",
            Violation::ScalingMismatch(_) => "ScalingMismatch",
            Violation::CommonCpNeedsScaling => "CommonCpNeedsScaling",
            Violation::EmptyAllocation { .. } => "EmptyAllocation",
            Violation::NonPositivePower { .. } => "NonPositivePower",
            Violation::OverlappingAllocations { .. } => "OverlappingAllocations",
            Violation::GridMisalignment { .. } => "GridMisalignment",
            Violation::DcBinUsed { .. } => "DcBinUsed",
            Violation::BandOverflow { .. } => "BandOverflow",
            Violation::BadRolloff { .. } => "BadRolloff",
            Violation::ZeroTrials => "ZeroTrials",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name())?;
        match self {
            Violation::BadFftSize { numerology, fft_size } => {
                write!(f, "{numerology} fft_size {fft_size} is not a power of two >= 8")
            }
            Violation::NonIntegerCp { numerology, cp_ratio, fft_size } => {
                write!(f, "{numerology} cp_ratio {cp_ratio} x fft_size {fft_size} is not a positive whole number")
            }
            Violation::CpTooLong { numerology, cp_ratio } => {
                write!(f, "{numerology} cp_ratio {cp_ratio} exceeds 1")
            }
            Violation::ScalingMismatch(msg) => f.write_str(msg),
            Violation::CommonCpNeedsScaling => f.write_str("common CP mode requires scaling_k >= 1"),
            Violation::EmptyAllocation { numerology, user } => {
                write!(f, "{numerology} user {user} has no subcarriers")
            }
            Violation::NonPositivePower { numerology, user } => {
                write!(f, "{numerology} user {user} power is not a finite positive ratio")
            }
            Violation::OverlappingAllocations { numerology, first, second } => {
                write!(f, "{numerology} users {first} and {second} share subcarriers")
            }
            Violation::GridMisalignment { origin_units, scaling_k } => {
                write!(f, "NUM2 band would start at {origin_units}·Δf₁, not a multiple of 2^{scaling_k}·Δf₁")
            }
            Violation::DcBinUsed { numerology, user } => {
                write!(f, "{numerology} user {user} occupies the DC bin")
            }
            Violation::BandOverflow { numerology, user, end_bin, limit } => {
                write!(f, "{numerology} user {user} ends at bin {end_bin}, past the positive-frequency limit {limit}")
            }
            Violation::BadRolloff { window, rolloff } => {
                write!(f, "roll-off {window} = {rolloff} is outside [0, 1]")
            }
            Violation::ZeroTrials => f.write_str("trials must be positive"),
        }
    }
}

fn check_pair(num1: &NumerologyConfig, num2: &NumerologyConfig) -> Option<String> {
    let k = num2.scaling_k;
    if k >= 16 {
        return Some(format!("scaling_k {k} is unreasonably large"));
    }
    let factor = 1usize << k;
    if num1.scaling_k != 0 {
        return Some(format!("NUM1 must be the base numerology (k = 0), got k = {}", num1.scaling_k));
    }
    let scs_expected = num1.scs_hz * factor as f64;
    if (num2.scs_hz - scs_expected).abs() > 1e-9 * scs_expected.abs().max(1.0) {
        return Some(format!("NUM2 spacing {} Hz != 2^{k} x {} Hz", num2.scs_hz, num1.scs_hz));
    }
    if num2.fft_size * factor != num1.fft_size {
        return Some(format!("NUM2 fft_size {} != {} / 2^{k}", num2.fft_size, num1.fft_size));
    }
    if num2.cp_ratio != num1.cp_ratio {
        return Some(format!("NUM2 cp_ratio {} differs from NUM1 cp_ratio {}", num2.cp_ratio, num1.cp_ratio));
    }
    None
}

/// Checks every scenario invariant and returns all violations found.
pub fn validate_scenario(scenario: &ScenarioConfig) -> Vec<Violation> {
    let mut out = Vec::new();

    for id in NumerologyId::BOTH {
        let num = scenario.numerology(id);
        if !num.fft_size_ok() {
            out.push(Violation::BadFftSize { numerology: id, fft_size: num.fft_size });
        }
        if num.cp_ratio > 1.0 {
            out.push(Violation::CpTooLong { numerology: id, cp_ratio: num.cp_ratio });
        } else if num.cp_samples().is_err() {
            out.push(Violation::NonIntegerCp { numerology: id, cp_ratio: num.cp_ratio, fft_size: num.fft_size });
        }
    }
    if let Some(msg) = check_pair(&scenario.num1, &scenario.num2) {
        out.push(Violation::ScalingMismatch(msg));
    }
    if scenario.cp_mode == CpMode::Common && scenario.num2.scaling_k == 0 {
        out.push(Violation::CommonCpNeedsScaling);
    }

    for a in &scenario.allocations {
        if a.bin_count == 0 {
            out.push(Violation::EmptyAllocation { numerology: a.numerology, user: a.user_index });
        }
        let p = a.power_ratio();
        if !(p.is_finite() && p > 0.0) {
            out.push(Violation::NonPositivePower { numerology: a.numerology, user: a.user_index });
        }
    }

    for id in NumerologyId::BOTH {
        let users: Vec<_> = scenario.users(id).collect();
        for (i, a) in users.iter().enumerate() {
            for b in &users[i + 1..] {
                let overlap = a.start_bin < b.start_bin + b.bin_count && b.start_bin < a.start_bin + a.bin_count;
                if overlap && a.bin_count > 0 && b.bin_count > 0 {
                    out.push(Violation::OverlappingAllocations {
                        numerology: id,
                        first: a.user_index,
                        second: b.user_index,
                    });
                }
            }
        }
    }

    let k = scenario.num2.scaling_k.min(15);
    let origin_units = scenario.band_origin_units();
    if scenario.users(NumerologyId::Two).next().is_some() && !origin_units.is_multiple_of(1usize << k) {
        out.push(Violation::GridMisalignment { origin_units, scaling_k: k });
    }

    for id in NumerologyId::BOTH {
        let limit = scenario.numerology(id).fft_size / 2;
        for (a, bins) in scenario.placed_users(id) {
            if a.bin_count == 0 {
                continue;
            }
            if bins.start == 0 {
                out.push(Violation::DcBinUsed { numerology: id, user: a.user_index });
            }
            if bins.end > limit {
                out.push(Violation::BandOverflow { numerology: id, user: a.user_index, end_bin: bins.end, limit });
            }
        }
    }

    for (window, rolloff) in scenario.windows.named() {
        if !(0.0..=1.0).contains(&rolloff) {
            out.push(Violation::BadRolloff { window, rolloff });
        }
    }
    if scenario.trials == 0 {
        out.push(Violation::ZeroTrials);
    }
    out
}

/// [`validate_scenario`] as a `Result`.
pub fn ensure_valid(scenario: &ScenarioConfig) -> Result<()> {
    let violations = validate_scenario(scenario);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(violations))
    }
}

/// Sample span of one symbol inside the LCM frame.
///
/// `cp_len` is zero for numerology-2 symbols in common-CP mode; the shared
/// CP then belongs to the frame, not to any one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSlot {
    pub start: usize,
    pub cp_len: usize,
    pub body_len: usize,
}

impl SymbolSlot {
    pub fn body_start(&self) -> usize {
        self.start + self.cp_len
    }

    pub fn end(&self) -> usize {
        self.start + self.cp_len + self.body_len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameGeometry {
    pub cp_mode: CpMode,
    pub scaling_k: u32,
    pub sample_rate_hz: f64,
    pub fft1: usize,
    pub fft2: usize,
    pub cp1_samples: usize,
    pub cp2_samples: usize,
    pub sym1_per_frame: usize,
    pub sym2_per_frame: usize,
    pub frame_samples: usize,
    pub layout1: Vec<SymbolSlot>,
    pub layout2: Vec<SymbolSlot>,
}

impl FrameGeometry {
    pub fn fft_size(&self, id: NumerologyId) -> usize {
        match id {
            NumerologyId::One => self.fft1,
            NumerologyId::Two => self.fft2,
        }
    }

    pub fn cp_samples(&self, id: NumerologyId) -> usize {
        match id {
            NumerologyId::One => self.cp1_samples,
            NumerologyId::Two => self.cp2_samples,
        }
    }

    pub fn symbols_per_frame(&self, id: NumerologyId) -> usize {
        match id {
            NumerologyId::One => self.sym1_per_frame,
            NumerologyId::Two => self.sym2_per_frame,
        }
    }

    pub fn layout(&self, id: NumerologyId) -> &[SymbolSlot] {
        match id {
            NumerologyId::One => &self.layout1,
            NumerologyId::Two => &self.layout2,
        }
    }

    /// CP bounding a numerology's transmit ramps: its own CP, or the shared
    /// CP in common mode (where the whole frame is one windowed block).
    pub fn tx_window_cp(&self, id: NumerologyId) -> usize {
        self.common_cp().unwrap_or_else(|| self.cp_samples(id))
    }

    /// Length of the shared CP in common-CP mode.
    pub fn common_cp(&self) -> Option<usize> {
        match self.cp_mode {
            CpMode::Common => Some(self.cp1_samples),
            CpMode::Individual => None,
        }
    }

    fn seconds(&self, samples: usize) -> f64 {
        samples as f64 / self.sample_rate_hz
    }

    /// Useful symbol duration `T₁`.
    pub fn t1(&self) -> f64 {
        self.seconds(self.fft1)
    }

    /// Useful symbol duration `T₂`.
    pub fn t2(&self) -> f64 {
        self.seconds(self.fft2)
    }

    pub fn t1_cp(&self) -> f64 {
        self.seconds(self.cp1_samples)
    }

    pub fn t2_cp(&self) -> f64 {
        self.seconds(self.cp2_samples)
    }

    /// CP covering all `2^k` concatenated numerology-2 symbols.
    pub fn t2_cp_concatenated(&self) -> f64 {
        self.seconds(self.cp2_samples << self.scaling_k)
    }

    pub fn tc_cp(&self) -> Option<f64> {
        self.common_cp().map(|cp| self.seconds(cp))
    }

    /// Duration `T` of the synchronized LCM frame.
    pub fn frame_duration(&self) -> f64 {
        self.seconds(self.frame_samples)
    }
}

/// Derives the sample-domain frame layout for the scenario's CP mode.
pub fn build_frame_geometry(scenario: &ScenarioConfig) -> Result<FrameGeometry> {
    let (num1, num2) = (&scenario.num1, &scenario.num2);
    if let Some(msg) = check_pair(num1, num2) {
        return Err(Error::ScalingMismatch(msg));
    }
    let k = num2.scaling_k;
    let reps = 1usize << k;
    let fft1 = num1.fft_size;
    let fft2 = num2.fft_size;
    let cp1 = num1.cp_samples()?;
    let cp2 = num2.cp_samples()?;
    if cp2 * reps != cp1 {
        return Err(Error::ScalingMismatch(format!("CP {cp1} != 2^{k} x {cp2}")));
    }

    let (frame_samples, layout1, layout2) = match scenario.cp_mode {
        CpMode::Individual => {
            let len2 = fft2 + cp2;
            let layout2 = (0..reps).map(|s| SymbolSlot { start: s * len2, cp_len: cp2, body_len: fft2 }).collect();
            (fft1 + cp1, vec![SymbolSlot { start: 0, cp_len: cp1, body_len: fft1 }], layout2)
        }
        CpMode::Common => {
            if k == 0 {
                return Err(Error::ScalingMismatch("common CP mode requires k >= 1".into()));
            }
            let layout2 = (0..reps).map(|s| SymbolSlot { start: cp1 + s * fft2, cp_len: 0, body_len: fft2 }).collect();
            (fft1 + cp1, vec![SymbolSlot { start: 0, cp_len: cp1, body_len: fft1 }], layout2)
        }
    };

    Ok(FrameGeometry {
        cp_mode: scenario.cp_mode,
        scaling_k: k,
        sample_rate_hz: fft1 as f64 * num1.scs_hz,
        fft1,
        fft2,
        cp1_samples: cp1,
        cp2_samples: cp2,
        sym1_per_frame: 1,
        sym2_per_frame: reps,
        frame_samples,
        layout1,
        layout2,
    })
}

/// A standardized 5G-NR numerology for data channels, as metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumerologyPreset {
    pub scs_hz: f64,
    pub cp_duration_s: f64,
    pub slot_duration_s: f64,
    /// Extended-CP duration where the standard defines one (60 kHz only).
    /// Carried as metadata; the simulator models normal CP only.
    pub extended_cp_duration_s: Option<f64>,
}

impl NumerologyPreset {
    /// CP duration as a fraction of the useful symbol `1/Δf`.
    pub fn cp_ratio(&self) -> f64 {
        self.cp_duration_s * self.scs_hz
    }

    /// A simulator configuration at the given transform size, with the CP
    /// rounded to the nearest whole sample of `Fs = fft_size·Δf`.
    pub fn config(&self, fft_size: usize) -> NumerologyConfig {
        let cp = (self.cp_ratio() * fft_size as f64).round().max(1.0);
        NumerologyConfig::new(self.scs_hz, fft_size, cp / fft_size as f64)
    }
}

pub fn table1_presets() -> Vec<NumerologyPreset> {
    [
        (15e3, 4.76e-6, 1e-3, None),
        (30e3, 2.38e-6, 0.5e-3, None),
        (60e3, 1.19e-6, 0.25e-3, Some(4.17e-6)),
        (120e3, 0.6e-6, 0.125e-3, None),
    ]
    .into_iter()
    .map(|(scs_hz, cp, slot, ext)| NumerologyPreset {
        scs_hz,
        cp_duration_s: cp,
        slot_duration_s: slot,
        extended_cp_duration_s: ext,
    })
    .collect()
}
