//! Named scenarios, one per reproduced experiment.
//!
//! Every preset uses Δf₁ = 15 kHz, CP ratio 1/16, three users per
//! numerology and 500 trials. Numerology 1 users start at bin 2 so that no
//! user touches DC; numerology 2 sits `guard` numerology-1 bins above the top
//! of numerology 1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerology::{CpMode, NumerologyConfig, NumerologyId, ScenarioConfig, UserAllocation, WindowConfig};

pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_SEED: u64 = 1;
pub const SCS1_HZ: f64 = 15e3;
pub const CP_RATIO: f64 = 1.0 / 16.0;
pub const GUARD_SWEEP: [usize; 5] = [0, 2, 4, 8, 16];

/// One scenario of a preset; `suffix` distinguishes members of a family and
/// is empty for single-scenario presets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetMember {
    pub suffix: String,
    pub scenario: ScenarioConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

const PRESETS: [PresetInfo; 13] = [
    PresetInfo { name: "baseline", description: "15/30 kHz, 3+3 users x 336 bins, guard 2, individual CP" },
    PresetInfo { name: "fig4", description: "transmit-side coexistence, baseline layout" },
    PresetInfo { name: "fig6a", description: "common CP, fft 4096, 3+3 users x 200 bins" },
    PresetInfo { name: "fig6b", description: "individual CP, fft 4096, 3+3 users x 200 bins" },
    PresetInfo { name: "fig7a", description: "small vs large subcarrier spacing (baseline)" },
    PresetInfo { name: "fig7b", description: "family: 15/30 and 15/60 kHz, equal NUM2 user bandwidth" },
    PresetInfo { name: "fig8_9", description: "family: NUM2 users of 336 (s1) or 168 (s2) bins" },
    PresetInfo { name: "fig10a", description: "no power offset" },
    PresetInfo { name: "fig10b", description: "NUM1 +3 dB, NUM2 -3 dB" },
    PresetInfo { name: "fig11a", description: "transmit windowing, roll-off 0.5" },
    PresetInfo { name: "fig11b", description: "receive windowing, roll-off 0.5" },
    PresetInfo { name: "fig11c", description: "transmit and receive windowing, roll-off 0.5" },
    PresetInfo { name: "fig12", description: "family: guard band 0, 2, 4, 8, 16 bins" },
];

pub fn list_presets() -> &'static [PresetInfo] {
    &PRESETS
}

/// Consecutive users of `count` bins each starting at `first`.
fn users(id: NumerologyId, first: usize, count: usize, power_db: f64) -> Vec<UserAllocation> {
    (0..3).map(|u| UserAllocation::new(id, u + 1, first + u * count, count, power_db)).collect()
}

/// Three users of `bins1` and three of `bins2` bins.
fn layout(fft1: usize, k: u32, bins1: usize, bins2: usize, guard: usize, mode: CpMode) -> ScenarioConfig {
    let num1 = NumerologyConfig::new(SCS1_HZ, fft1, CP_RATIO);
    let mut allocations = users(NumerologyId::One, 2, bins1, 0.0);
    allocations.extend(users(NumerologyId::Two, 0, bins2, 0.0));
    ScenarioConfig {
        num1,
        num2: num1.scaled(k),
        allocations,
        guard_band_bins: guard,
        cp_mode: mode,
        windows: WindowConfig::default(),
        trials: DEFAULT_TRIALS,
        seed: DEFAULT_SEED,
    }
}

/// 15/30 kHz at fft₁ = 8192 with 336-bin users, guard 2, individual CP.
pub fn baseline() -> ScenarioConfig {
    layout(8192, 1, 336, 336, 2, CpMode::Individual)
}

fn single(scenario: ScenarioConfig) -> Vec<PresetMember> {
    vec![PresetMember { suffix: String::new(), scenario }]
}

fn windowed(tx: f64, rx: f64) -> ScenarioConfig {
    let mut s = baseline();
    s.windows = WindowConfig { tx_rolloff_num1: tx, tx_rolloff_num2: tx, rx_rolloff_num1: rx, rx_rolloff_num2: rx };
    s
}

/// Scales every user of numerology `id` by `delta_db`.
pub fn offset_power(scenario: &mut ScenarioConfig, id: NumerologyId, delta_db: f64) {
    for a in scenario.allocations.iter_mut().filter(|a| a.numerology == id) {
        a.power_db += delta_db;
    }
}

/// Expands a preset into its ordered scenarios.
pub fn expand_preset(name: &str) -> Result<Vec<PresetMember>> {
    Ok(match name {
        "baseline" | "fig4" | "fig7a" | "fig10a" => single(baseline()),
        "fig6a" => single(layout(4096, 1, 200, 200, 2, CpMode::Common)),
        "fig6b" => single(layout(4096, 1, 200, 200, 2, CpMode::Individual)),
        // NUM2 users keep the same occupied bandwidth, 336 × 30 kHz
        "fig7b" => [("_15_30", 1), ("_15_60", 2)]
            .into_iter()
            .map(|(suffix, k)| PresetMember {
                suffix: suffix.into(),
                scenario: layout(8192, k, 336, 672 >> k, 2, CpMode::Individual),
            })
            .collect(),
        "fig8_9" => [("_s1", 336), ("_s2", 168)]
            .into_iter()
            .map(|(suffix, bins2)| PresetMember {
                suffix: suffix.into(),
                scenario: layout(8192, 1, 336, bins2, 2, CpMode::Individual),
            })
            .collect(),
        "fig10b" => {
            let mut s = baseline();
            offset_power(&mut s, NumerologyId::One, 3.0);
            offset_power(&mut s, NumerologyId::Two, -3.0);
            single(s)
        }
        "fig11a" => single(windowed(0.5, 0.0)),
        "fig11b" => single(windowed(0.0, 0.5)),
        "fig11c" => single(windowed(0.5, 0.5)),
        "fig12" => GUARD_SWEEP
            .iter()
            .map(|&g| PresetMember {
                suffix: format!("_g{g}"),
                scenario: layout(8192, 1, 336, 336, g, CpMode::Individual),
            })
            .collect(),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    })
}
