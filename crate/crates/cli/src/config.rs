//! JSON scenario files.
//!
//! ```json
//! {
//!   "preset": "fig6a",
//!   "num1": { "scs_hz": 15000, "fft_size": 4096, "cp_ratio": 0.0625 },
//!   "num2": { "scs_hz": 30000, "scaling_k": 1 },
//!   "users": [ { "numerology": 1, "start_bin": 2, "bin_count": 200, "power_db": 0 } ],
//!   "guard_band_bins": 2,
//!   "cp_mode": "individual",
//!   "windows": { "tx1": 0, "tx2": 0, "rx1": 0.5, "rx2": 0.5 },
//!   "trials": 500,
//!   "seed": 1
//! }
//! ```
//!
//! Every key is optional. Missing keys come from `preset`, or from the
//! baseline scenario when no preset is named. A `users` list replaces all
//! allocations; user indices count from 1 within each numerology in file
//! order.

use std::path::Path;

use ini_sim_core::presets::{baseline, expand_preset, PresetMember};
use ini_sim_core::{
    validate_scenario, CpMode, Error, NumerologyConfig, NumerologyId, Result, ScenarioConfig, UserAllocation,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    preset: Option<String>,
    num1: Option<RawNum1>,
    num2: Option<RawNum2>,
    users: Option<Vec<RawUser>>,
    guard_band_bins: Option<usize>,
    cp_mode: Option<CpMode>,
    windows: Option<RawWindows>,
    trials: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawNum1 {
    scs_hz: Option<f64>,
    fft_size: Option<usize>,
    cp_ratio: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawNum2 {
    scs_hz: Option<f64>,
    scaling_k: Option<u32>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    numerology: u8,
    start_bin: usize,
    bin_count: usize,
    #[serde(default)]
    power_db: f64,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawWindows {
    tx1: Option<f64>,
    tx2: Option<f64>,
    rx1: Option<f64>,
    rx2: Option<f64>,
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse { location: location.into(), message: message.into() }
}

fn overlay(raw: &RawFile, base: &ScenarioConfig, source: &str) -> Result<ScenarioConfig> {
    let mut s = base.clone();
    if let Some(n) = &raw.num1 {
        s.num1.scs_hz = n.scs_hz.unwrap_or(s.num1.scs_hz);
        s.num1.fft_size = n.fft_size.unwrap_or(s.num1.fft_size);
        s.num1.cp_ratio = n.cp_ratio.unwrap_or(s.num1.cp_ratio);
    }
    let given = raw.num2.as_ref();
    let k = match (given.and_then(|n| n.scaling_k), given.and_then(|n| n.scs_hz)) {
        (Some(k), _) => k,
        (None, Some(scs)) => {
            let ratio = (scs / s.num1.scs_hz).log2();
            if ratio.is_finite() && ratio >= 0.0 {
                ratio.round() as u32
            } else {
                0
            }
        }
        (None, None) => s.num2.scaling_k,
    };
    // num2 always follows num1; a contradictory scs_hz is left in place so
    // validation names it
    s.num2 = NumerologyConfig {
        scs_hz: given.and_then(|n| n.scs_hz).unwrap_or(s.num1.scs_hz * 2f64.powi(k.min(1023) as i32)),
        fft_size: s.num1.fft_size.checked_shr(k).unwrap_or(0),
        cp_ratio: s.num1.cp_ratio,
        scaling_k: k,
    };

    if let Some(users) = &raw.users {
        let mut counts = [0usize; 2];
        s.allocations = users
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let id = NumerologyId::from_number(u.numerology).ok_or_else(|| {
                    parse_error(
                        format!("{source}: users[{i}].numerology"),
                        format!("expected 1 or 2, got {}", u.numerology),
                    )
                })?;
                let slot = &mut counts[usize::from(id.number() - 1)];
                *slot += 1;
                Ok(UserAllocation::new(id, *slot, u.start_bin, u.bin_count, u.power_db))
            })
            .collect::<Result<_>>()?;
    }
    s.guard_band_bins = raw.guard_band_bins.unwrap_or(s.guard_band_bins);
    s.cp_mode = raw.cp_mode.unwrap_or(s.cp_mode);
    if let Some(w) = &raw.windows {
        let win = &mut s.windows;
        win.tx_rolloff_num1 = w.tx1.unwrap_or(win.tx_rolloff_num1);
        win.tx_rolloff_num2 = w.tx2.unwrap_or(win.tx_rolloff_num2);
        win.rx_rolloff_num1 = w.rx1.unwrap_or(win.rx_rolloff_num1);
        win.rx_rolloff_num2 = w.rx2.unwrap_or(win.rx_rolloff_num2);
    }
    s.trials = raw.trials.unwrap_or(s.trials);
    s.seed = raw.seed.unwrap_or(s.seed);
    Ok(s)
}

fn check(member: PresetMember) -> Result<PresetMember> {
    let violations = validate_scenario(&member.scenario);
    if violations.is_empty() {
        Ok(member)
    } else {
        Err(Error::Validation(violations))
    }
}

/// Parses a scenario file's text; `source` names it in error locations.
/// Family presets yield one scenario per member.
pub fn parse_family(text: &str, source: &str) -> Result<Vec<PresetMember>> {
    let raw: RawFile = serde_json::from_str(text)
        .map_err(|e| parse_error(format!("{source}:{}:{}", e.line(), e.column()), e.to_string()))?;
    let bases = match &raw.preset {
        Some(name) => expand_preset(name)?,
        None => vec![PresetMember { suffix: String::new(), scenario: baseline() }],
    };
    bases
        .into_iter()
        .map(|m| check(PresetMember { scenario: overlay(&raw, &m.scenario, source)?, suffix: m.suffix }))
        .collect()
}

pub fn load_family(path: &Path) -> Result<Vec<PresetMember>> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| parse_error(&source, e.to_string()))?;
    parse_family(&text, &source)
}

/// Loads a file that describes exactly one scenario.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let mut family = load_family(path)?;
    if family.len() != 1 {
        return Err(parse_error(
            path.display().to_string(),
            format!("preset expands to {} scenarios; expected one", family.len()),
        ));
    }
    Ok(family.remove(0).scenario)
}

/// Expands a preset and validates each member.
pub fn preset_family(name: &str) -> Result<Vec<PresetMember>> {
    expand_preset(name)?.into_iter().map(check).collect()
}

#[derive(Serialize)]
struct Echo<'a> {
    num1: RawNum1,
    num2: RawNum2,
    users: Vec<RawUser>,
    guard_band_bins: usize,
    cp_mode: &'a CpMode,
    windows: RawWindows,
    trials: usize,
    seed: u64,
}

/// The fully resolved scenario in file form; loading it back gives the same
/// scenario.
pub fn scenario_to_json(s: &ScenarioConfig) -> String {
    let echo = Echo {
        num1: RawNum1 { scs_hz: Some(s.num1.scs_hz), fft_size: Some(s.num1.fft_size), cp_ratio: Some(s.num1.cp_ratio) },
        num2: RawNum2 { scs_hz: Some(s.num2.scs_hz), scaling_k: Some(s.num2.scaling_k) },
        users: s
            .allocations
            .iter()
            .map(|a| RawUser {
                numerology: a.numerology.number(),
                start_bin: a.start_bin,
                bin_count: a.bin_count,
                power_db: a.power_db,
            })
            .collect(),
        guard_band_bins: s.guard_band_bins,
        cp_mode: &s.cp_mode,
        windows: RawWindows {
            tx1: Some(s.windows.tx_rolloff_num1),
            tx2: Some(s.windows.tx_rolloff_num2),
            rx1: Some(s.windows.rx_rolloff_num1),
            rx2: Some(s.windows.rx_rolloff_num2),
        },
        trials: s.trials,
        seed: s.seed,
    };
    let mut text = serde_json::to_string_pretty(&echo).expect("scenario serializes");
    text.push('\n');
    text
}
