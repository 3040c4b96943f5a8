//! Shared fixtures for the criterion benches.

use ini_sim_core::presets::expand_preset;
use ini_sim_core::ScenarioConfig;

/// First member of a preset with its trial count overridden.
pub fn preset_with_trials(name: &str, trials: usize) -> ScenarioConfig {
    let mut s = expand_preset(name).expect("known preset").remove(0).scenario;
    s.trials = trials;
    s
}
