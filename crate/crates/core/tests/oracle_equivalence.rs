//! Monte Carlo interference against the closed-form expectation.

use ini_sim_core::numerology::{CpMode, NumerologyConfig, NumerologyId, ScenarioConfig, UserAllocation, WindowConfig};
use ini_sim_core::{expected_interference, run_monte_carlo};

fn toy(mode: CpMode, rolloff: f64, trials: usize) -> ScenarioConfig {
    let num1 = NumerologyConfig::new(15e3, 16, 0.25);
    let r = rolloff;
    ScenarioConfig {
        num1,
        num2: num1.scaled(1),
        allocations: vec![
            UserAllocation::new(NumerologyId::One, 1, 1, 2, 0.0),
            UserAllocation::new(NumerologyId::One, 2, 3, 1, 2.0),
            UserAllocation::new(NumerologyId::Two, 1, 0, 1, 0.0),
            UserAllocation::new(NumerologyId::Two, 2, 1, 1, -2.0),
        ],
        guard_band_bins: 0,
        cp_mode: mode,
        windows: WindowConfig { tx_rolloff_num1: r, tx_rolloff_num2: r, rx_rolloff_num1: r, rx_rolloff_num2: r },
        trials,
        seed: 2024,
    }
}

#[test]
fn toy_monte_carlo_matches_oracle() {
    for mode in [CpMode::Individual, CpMode::Common] {
        for rolloff in [0.0, 0.5] {
            let s = toy(mode, rolloff, 20_000);
            let report = run_monte_carlo(&s).unwrap();
            let expected = expected_interference(&s).unwrap();
            assert_eq!(report.bins.len(), expected.len());
            for (b, e) in report.bins.iter().zip(&expected) {
                assert_eq!((b.numerology, b.abs_bin), (e.numerology, e.abs_bin));
                let gap = (b.interference_power - e.interference_power).abs();
                assert!(
                    gap <= 4.0 * b.interference_se + 1e-20,
                    "{mode:?} r={rolloff} {} bin {}: mc {} ± {} vs {}",
                    b.numerology,
                    b.abs_bin,
                    b.interference_power,
                    b.interference_se,
                    e.interference_power
                );
            }
        }
    }
}

#[test]
fn common_mode_aligned_bins_expect_zero() {
    let s = toy(CpMode::Common, 0.0, 1);
    let expected = expected_interference(&s).unwrap();
    for e in expected.iter().filter(|e| e.numerology == NumerologyId::One) {
        if e.abs_bin % 2 == 0 {
            assert!(e.interference_power < 1e-24, "bin {}", e.abs_bin);
        } else {
            assert!(e.interference_power > 1e-6, "bin {}", e.abs_bin);
        }
    }
}
