//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ini_sim::export::{write_per_bin, write_per_user};
use ini_sim_core::composer::tx_spectrum_probe;
use ini_sim_core::link::{trial_rng, Link};
use ini_sim_core::presets::{expand_preset, list_presets, offset_power};
use ini_sim_core::tx::ofdm_modulate;
use ini_sim_core::{
    expected_interference, run_monte_carlo, BinRecord, CpMode, MetricsReport, NumerologyConfig, NumerologyId,
    ScenarioConfig, UserAllocation, WindowConfig,
};

use NumerologyId::{One, Two};

type Outcome = (bool, String);
type Check = fn() -> Outcome;

fn preset(name: &str) -> ScenarioConfig {
    expand_preset(name).unwrap().remove(0).scenario
}

fn member(name: &str, suffix: &str) -> ScenarioConfig {
    expand_preset(name).unwrap().into_iter().find(|m| m.suffix == suffix).unwrap().scenario
}

fn mc(s: &ScenarioConfig) -> MetricsReport {
    run_monte_carlo(s).unwrap()
}

fn mean(r: &MetricsReport, id: NumerologyId) -> f64 {
    r.mean_user_sir_db(id).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn all_windows(r: f64) -> WindowConfig {
    WindowConfig { tx_rolloff_num1: r, tx_rolloff_num2: r, rx_rolloff_num1: r, rx_rolloff_num2: r }
}

fn ac1() -> Outcome {
    let s = preset("fig6a");
    let (r, t) = timed(|| mc(&s));
    let step = 1 << s.num2.scaling_k;
    let (aligned, other): (Vec<&BinRecord>, Vec<_>) = r.bins_of(One).partition(|b| b.abs_bin % step == 0);
    let worst_aligned = aligned.iter().map(|b| b.evm).fold(0.0, f64::max);
    let least_other =
        other.iter().chain(r.bins_of(Two).collect::<Vec<_>>().iter()).map(|b| b.evm).fold(f64::MAX, f64::min);
    let ok = !aligned.is_empty() && worst_aligned < 1e-10 && least_other > 1e-4 && t < Duration::from_secs(60);
    (
        ok,
        format!(
            "fig6a {} trials: {} aligned NUM1 bins max EVM {worst_aligned:.2e} (< 1e-10), other bins min EVM {least_other:.2e} (> 1e-4), {:.1} s (< 60 s)",
            s.trials,
            aligned.len(),
            t.as_secs_f64()
        ),
    )
}

fn ac2() -> Outcome {
    let r = mc(&preset("fig6b"));
    let least = r.bins.iter().map(|b| b.evm).fold(f64::MAX, f64::min);
    (least > 1e-6, format!("fig6b min EVM over {} bins {least:.2e} (> 1e-6)", r.bins.len()))
}

fn ac3() -> Outcome {
    let s = preset("fig4");
    let link = Link::new(&s).unwrap();
    let data = link.draw_data(&mut trial_rng(s.seed, 0));
    let symbol = &ofdm_modulate(&link.grid(One, &data).unwrap())[0];
    let fft1 = s.num1.fft_size;
    let probe = |f: f64| tx_spectrum_probe(symbol, 0, fft1, f).unwrap().norm();
    let own = link
        .users(One)
        .iter()
        .flat_map(|u| u.bins.clone())
        .map(|b| probe(b as f64 * s.num1.scs_hz))
        .fold(f64::MAX, f64::min);
    // the NUM2 band, from its origin to the top of the positive half
    let num2_bins = s.band_origin()..s.num2.fft_size / 2;
    let worst = num2_bins.clone().map(|b| probe(b as f64 * s.num2.scs_hz)).fold(0.0, f64::max);
    let rel = worst / own;
    (rel < 1e-10, format!("NUM1 bare symbol at {} NUM2 grid frequencies: max/own {rel:.2e} (< 1e-10)", num2_bins.len()))
}

fn ac4() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (k, want) in [(1u32, 2usize), (2, 4)] {
        let num1 = NumerologyConfig::new(15e3, 1024, 1.0 / 16.0);
        let mut allocations: Vec<_> = (0..3).map(|u| UserAllocation::new(One, u + 1, 2 + 64 * u, 64, 0.0)).collect();
        allocations.extend((0..3).map(|u| UserAllocation::new(Two, u + 1, 16 * u, 16, 0.0)));
        let s = ScenarioConfig {
            num1,
            num2: num1.scaled(k),
            allocations,
            guard_band_bins: 2,
            cp_mode: CpMode::Common,
            windows: WindowConfig::default(),
            trials: 1,
            seed: 1,
        };
        let num1_bins: Vec<_> =
            expected_interference(&s).unwrap().into_iter().filter(|e| e.numerology == One).collect();
        let zero = num1_bins.iter().filter(|e| e.interference_power < 1e-24).count();
        ok &= zero * want == num1_bins.len();
        parts.push(format!("k={k}: {zero}/{} (1/{want})", num1_bins.len()));
    }
    (ok, format!("NUM1 bins with zero common-CP interference {}", parts.join(", ")))
}

fn ac5() -> Outcome {
    let r = mc(&preset("fig7a"));
    let (m1, m2) = (mean(&r, One), mean(&r, Two));
    (m2 - m1 > 0.0, format!("fig7a mean SIR NUM1 {m1:.2} dB, NUM2 {m2:.2} dB, margin {:.2} dB (> 0)", m2 - m1))
}

fn ac6() -> Outcome {
    let a = mc(&member("fig7b", "_15_30"));
    let b = mc(&member("fig7b", "_15_60"));
    let d1 = mean(&b, One) - mean(&a, One);
    let d2 = mean(&b, Two) - mean(&a, Two);
    (d1 < 0.0 && d2 < 0.0, format!("15/30 -> 15/60 mean SIR change NUM1 {d1:+.2} dB, NUM2 {d2:+.2} dB (both < 0)"))
}

fn ac7() -> Outcome {
    const TRIALS: usize = 20_000;
    let mut s1 = member("fig8_9", "_s1");
    let mut s2 = member("fig8_9", "_s2");
    s1.trials = TRIALS;
    s2.trials = TRIALS;
    let (a, b) = (mc(&s1), mc(&s2));
    let delta = |id, u| b.user(id, u).unwrap().sir.db - a.user(id, u).unwrap().sir.db;
    let d1: Vec<f64> = (1..=3).map(|u| delta(One, u)).collect();
    let d2: Vec<f64> = (1..=3).map(|u| delta(Two, u)).collect();
    // NUM1 user 3 borders NUM2
    let ok = d1.iter().all(|&d| d > 0.0) && d2.iter().all(|&d| d < 0.0) && d1[0] > d1[2] && d1[1] > d1[2];

    let oracle_user_sir = |s: &ScenarioConfig, u: usize| {
        let e = expected_interference(s).unwrap();
        let placed = s.placed_users(One);
        let (alloc, bins) = placed.iter().find(|(a, _)| a.user_index == u).unwrap();
        let i: f64 =
            e.iter().filter(|x| x.numerology == One && bins.contains(&x.abs_bin)).map(|x| x.interference_power).sum();
        10.0 * (alloc.power_ratio() * bins.len() as f64 / i).log10()
    };
    let oracle_edge = oracle_user_sir(&s2, 3) - oracle_user_sir(&s1, 3);
    (
        ok,
        format!(
            "fig8_9 at {TRIALS} trials s1->s2: NUM1 users {:+.3}/{:+.3}/{:+.3} dB (all > 0, edge smallest), NUM2 users {:+.2}/{:+.2}/{:+.2} dB (all < 0); oracle edge {oracle_edge:+.3} dB",
            d1[0], d1[1], d1[2], d2[0], d2[1], d2[2]
        ),
    )
}

fn ac8() -> Outcome {
    let base = preset("fig10a");
    let mut s = base.clone();
    for id in NumerologyId::BOTH {
        offset_power(&mut s, id, 10.0);
    }
    let (a, b) = (mc(&base), mc(&s));
    let bins = a.bins.iter().zip(&b.bins).map(|(x, y)| (x.sir.db - y.sir.db).abs());
    let users = a.users.iter().zip(&b.users).map(|(x, y)| (x.sir.db - y.sir.db).abs());
    let worst = bins.chain(users).fold(0.0, f64::max);
    (worst <= 1e-10, format!("+10 dB on both numerologies: max SIR change {worst:.2e} dB (<= 1e-10)"))
}

fn shift_range(a: &MetricsReport, b: &MetricsReport, id: NumerologyId) -> (f64, f64, usize) {
    let d: Vec<f64> = a
        .bins_of(id)
        .zip(b.bins_of(id))
        .filter(|(x, y)| !x.sir.infinite && !y.sir.infinite)
        .map(|(x, y)| y.sir.db - x.sir.db)
        .collect();
    (d.iter().copied().fold(f64::MAX, f64::min), d.iter().copied().fold(f64::MIN, f64::max), d.len())
}

fn ac9() -> Outcome {
    let base = mc(&preset("fig10a"));
    let sym = mc(&preset("fig10b"));
    let mut one_sided = preset("fig10a");
    offset_power(&mut one_sided, One, 3.0);
    let one = mc(&one_sided);
    let (lo_s, hi_s, n) = shift_range(&base, &sym, Two);
    let (lo_o, hi_o, _) = shift_range(&base, &one, Two);
    let within = |lo: f64, hi: f64, want: f64| (lo - want).abs() <= 1e-9 && (hi - want).abs() <= 1e-9;
    (
        n > 0 && within(lo_s, hi_s, -6.0) && within(lo_o, hi_o, -3.0),
        format!(
            "NUM2 bin SIR shift over {n} bins: symmetric [{lo_s:.12}, {hi_s:.12}] dB (-6.0), one-sided [{lo_o:.12}, {hi_o:.12}] dB (-3.0), tol 1e-9"
        ),
    )
}

fn ac10() -> Outcome {
    let base = mc(&preset("fig10a"));
    let tx = mc(&preset("fig11a"));
    let rx = mc(&preset("fig11b"));
    let both = mc(&preset("fig11c"));
    let mut tx1 = preset("fig10a");
    tx1.windows.tx_rolloff_num1 = 0.5;
    let tx1 = mc(&tx1);
    let a = mean(&tx1, Two) - mean(&base, Two);
    let b = mean(&rx, Two) - mean(&base, Two);
    let c = (mean(&both, One), mean(&tx, One), mean(&rx, One));
    let d = mean(&both, Two) - mean(&rx, Two);
    let ok = a.abs() < 0.5 && b > 3.0 && c.0 > c.1 && c.0 > c.2 && d.abs() < 0.5;
    (
        ok,
        format!(
            "(a) NUM1 tx window: NUM2 {a:+.2} dB (|.| < 0.5); (b) rx: NUM2 {b:+.2} dB (> 3); (c) NUM1 tx+rx {:.2} vs tx {:.2}, rx {:.2} dB; (d) NUM2 tx+rx - rx {d:+.2} dB (|.| < 0.5)",
            c.0, c.1, c.2
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn ac11() -> Outcome {
    const EDGE: usize = 16;
    let g2 = mc(&member("fig12", "_g2"));
    let g8 = mc(&member("fig12", "_g8"));
    let mut ok = true;
    let mut parts = Vec::new();
    for id in NumerologyId::BOTH {
        let mut pairs: Vec<(f64, f64)> = g2.bins_of(id).zip(g8.bins_of(id)).map(|(a, b)| (a.evm, b.evm)).collect();
        // edge-nearest first
        if id == One {
            pairs.reverse();
        }
        let n = pairs.len();
        let far = &pairs[n / 2..];
        let gains = |p: &[(f64, f64)]| p.iter().map(|(a, b)| a / b).collect::<Vec<_>>();
        let edge = gains(&pairs[..EDGE]);
        let edge_min = edge.iter().copied().fold(f64::MAX, f64::min);
        let edge_median = median(edge);
        let far_median_gain = median(gains(far));
        let far_change = median(far.iter().map(|p| p.1).collect()) / median(far.iter().map(|p| p.0).collect()) - 1.0;
        ok &= edge_median > far_median_gain && far_change.abs() < 0.1;
        parts.push(format!(
            "{id}: edge gain median {edge_median:.3} (min {edge_min:.3}) vs far-half median {far_median_gain:.4}, far median EVM {:+.2}%",
            100.0 * far_change
        ));
    }
    (ok, format!("guard 2 -> 8 bins: {}", parts.join("; ")))
}

fn ac12() -> Outcome {
    const TRIALS: usize = 100_000;
    let mut within = 0;
    let mut total = 0;
    let (_, t) = timed(|| {
        for mode in [CpMode::Individual, CpMode::Common] {
            for rolloff in [0.0, 0.5] {
                let num1 = NumerologyConfig::new(15e3, 16, 0.25);
                let s = ScenarioConfig {
                    num1,
                    num2: num1.scaled(1),
                    allocations: vec![
                        UserAllocation::new(One, 1, 1, 2, 0.0),
                        UserAllocation::new(One, 2, 3, 1, 0.0),
                        UserAllocation::new(Two, 1, 0, 1, 0.0),
                        UserAllocation::new(Two, 2, 1, 1, 0.0),
                    ],
                    guard_band_bins: 0,
                    cp_mode: mode,
                    windows: all_windows(rolloff),
                    trials: TRIALS,
                    seed: 1,
                };
                let r = mc(&s);
                for (b, e) in r.bins.iter().zip(expected_interference(&s).unwrap()) {
                    total += 1;
                    within += usize::from(
                        (b.interference_power - e.interference_power).abs() <= 3.0 * b.interference_se + 1e-20,
                    );
                }
            }
        }
    });
    let frac = within as f64 / total as f64;
    (
        frac >= 0.99 && t < Duration::from_secs(120),
        format!(
            "fft 16 toy, 4 configs x {TRIALS} trials: {within}/{total} bins within 3 SE of the oracle (>= 99%), {:.1} s (< 120 s)",
            t.as_secs_f64()
        ),
    )
}

fn csv_bytes(r: &MetricsReport) -> Vec<u8> {
    let mut out = Vec::new();
    write_per_bin(&mut out, r).unwrap();
    write_per_user(&mut out, r).unwrap();
    out
}

fn ac13() -> Outcome {
    const TRIALS: usize = 600;
    let pools: Vec<_> =
        [1, 4].iter().map(|&n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()).collect();
    let mut runs = 0;
    let mut mismatched = Vec::new();
    for info in list_presets() {
        for m in expand_preset(info.name).unwrap() {
            let mut s = m.scenario;
            s.trials = TRIALS;
            let out: Vec<_> = pools.iter().map(|p| p.install(|| csv_bytes(&mc(&s)))).collect();
            runs += 1;
            if out[0] != out[1] {
                mismatched.push(format!("{}{}", info.name, m.suffix));
            }
        }
    }
    (
        mismatched.is_empty(),
        format!(
            "{runs} preset scenarios at {TRIALS} trials, 1 vs 4 threads: {} CSV mismatches {mismatched:?}",
            mismatched.len()
        ),
    )
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 13] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
        ("AC11", ac11),
        ("AC12", ac12),
        ("AC13", ac13),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let (ok, detail) = check();
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
