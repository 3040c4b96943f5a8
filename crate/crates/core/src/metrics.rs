//! EVM and SIR per subcarrier and per user, and the Monte Carlo driver that
//! accumulates them over independent trials.
//!
//! Definitions (no noise or channel exists, so everything that is not the
//! scaled reference is interference):
//!
//! * `EVM_b = sqrt(mean |rx/√P − tx|² / mean |tx|²)`
//! * `SIR_b = 10·log10(P·mean |tx|² / mean |rx − √P·tx|²)`
//! * user SIR is the ratio of summed signal to summed interference power over
//!   the user's bins.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::link::{trial_rng, Link};
use crate::numerology::{NumerologyId, ScenarioConfig};
use crate::tx::OfdmEngine;

/// Reported in place of an unbounded SIR.
pub const INFINITE_SIR_DB: f64 = 300.0;
/// Interference power below which a SIR is flagged as infinite.
pub const INFINITE_SIR_THRESHOLD: f64 = 1e-30;

/// Trials simulated in parallel before their results are folded in order.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sir {
    pub db: f64,
    pub infinite: bool,
}

impl Sir {
    pub fn from_powers(signal: f64, interference: f64) -> Self {
        if interference < INFINITE_SIR_THRESHOLD {
            Sir { db: INFINITE_SIR_DB, infinite: true }
        } else {
            Sir { db: 10.0 * (signal / interference).log10(), infinite: false }
        }
    }
}

fn check_shapes(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Result<()> {
    if a.is_empty() || a.iter().any(Vec::is_empty) {
        return Err(Error::EmptyInput);
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    for (x, y) in a.iter().zip(b) {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
        }
    }
    Ok(())
}

fn mean_sq(xs: impl Iterator<Item = Complex64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x.norm_sqr(), n + 1));
    sum / n as f64
}

/// EVM per bin. `tx_ref[b]` and `rx[b]` hold all observations of bin `b`
/// (over trials and symbols); `rx` is already power de-scaled.
pub fn evm_per_subcarrier(tx_ref: &[Vec<Complex64>], rx: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    check_shapes(tx_ref, rx)?;
    Ok(tx_ref
        .iter()
        .zip(rx)
        .map(|(t, r)| {
            let err = mean_sq(t.iter().zip(r).map(|(t, r)| r - t));
            (err / mean_sq(t.iter().copied())).sqrt()
        })
        .collect())
}

/// SIR per bin from raw (not de-scaled) received values.
pub fn sir_per_subcarrier(tx_ref: &[Vec<Complex64>], rx: &[Vec<Complex64>], power_ratios: &[f64]) -> Result<Vec<Sir>> {
    check_shapes(tx_ref, rx)?;
    if power_ratios.len() != tx_ref.len() {
        return Err(Error::LengthMismatch { expected: tx_ref.len(), actual: power_ratios.len() });
    }
    Ok(tx_ref
        .iter()
        .zip(rx)
        .zip(power_ratios)
        .map(|((t, r), &p)| {
            let amp = p.sqrt();
            let interference = mean_sq(t.iter().zip(r).map(|(t, r)| r - t * amp));
            Sir::from_powers(p * mean_sq(t.iter().copied()), interference)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRecord {
    pub numerology: NumerologyId,
    pub user_index: usize,
    /// Absolute bin on the numerology's own grid.
    pub abs_bin: usize,
    pub freq_hz: f64,
    pub evm: f64,
    pub sir: Sir,
    pub signal_power: f64,
    pub interference_power: f64,
    /// Standard error of `interference_power` from the trial-to-trial spread.
    pub interference_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserRecord {
    pub numerology: NumerologyId,
    pub user_index: usize,
    pub sir: Sir,
    pub signal_power: f64,
    pub interference_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub bins: Vec<BinRecord>,
    pub users: Vec<UserRecord>,
    pub trials: usize,
    pub seed: u64,
}

impl MetricsReport {
    pub fn bins_of(&self, id: NumerologyId) -> impl Iterator<Item = &BinRecord> {
        self.bins.iter().filter(move |b| b.numerology == id)
    }

    pub fn users_of(&self, id: NumerologyId) -> impl Iterator<Item = &UserRecord> {
        self.users.iter().filter(move |u| u.numerology == id)
    }

    pub fn user(&self, id: NumerologyId, user_index: usize) -> Option<&UserRecord> {
        self.users_of(id).find(|u| u.user_index == user_index)
    }

    /// Arithmetic mean of the finite per-user SIRs (dB) of a numerology.
    pub fn mean_user_sir_db(&self, id: NumerologyId) -> Option<f64> {
        let finite: Vec<f64> = self.users_of(id).filter(|u| !u.sir.infinite).map(|u| u.sir.db).collect();
        (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64)
    }
}

/// Power-sum SIR per user, in first-appearance order of `(numerology, user)`.
pub fn sir_per_user(bins: &[BinRecord]) -> Vec<UserRecord> {
    let mut users: Vec<UserRecord> = Vec::new();
    for b in bins {
        match users.iter_mut().find(|u| u.numerology == b.numerology && u.user_index == b.user_index) {
            Some(u) => {
                u.signal_power += b.signal_power;
                u.interference_power += b.interference_power;
            }
            None => users.push(UserRecord {
                numerology: b.numerology,
                user_index: b.user_index,
                sir: Sir { db: 0.0, infinite: false },
                signal_power: b.signal_power,
                interference_power: b.interference_power,
            }),
        }
    }
    for u in &mut users {
        u.sir = Sir::from_powers(u.signal_power, u.interference_power);
    }
    users
}

/// Observation sums for one trial, per occupied bin.
struct TrialSums {
    err: Vec<f64>,
    reference: Vec<f64>,
}

#[derive(Default, Clone)]
struct BinAccumulator {
    err: f64,
    reference: f64,
    observations: usize,
    // Welford over per-trial mean interference
    trials: usize,
    mean: f64,
    m2: f64,
}

impl BinAccumulator {
    fn push(&mut self, err: f64, reference: f64, symbols: usize) {
        self.err += err;
        self.reference += reference;
        self.observations += symbols;
        let v = err / symbols as f64;
        self.trials += 1;
        let delta = v - self.mean;
        self.mean += delta / self.trials as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn standard_error(&self) -> f64 {
        if self.trials < 2 {
            return 0.0;
        }
        (self.m2 / (self.trials - 1) as f64 / self.trials as f64).sqrt()
    }
}

fn simulate_trial(link: &Link, trial: usize, engine: &mut OfdmEngine) -> Result<TrialSums> {
    let mut rng = trial_rng(link.scenario.seed, trial as u64);
    let data = link.draw_data(&mut rng);
    let frame = link.transmit(&data, engine)?;
    let mut sums = TrialSums { err: Vec::new(), reference: Vec::new() };
    for id in NumerologyId::BOTH {
        let rx = link.receive(&frame, id, engine)?;
        for (user, symbols) in link.users(id).iter().zip(&data.symbols[id.index()]) {
            let amp = user.power_ratio.sqrt();
            let count = user.bins.len();
            for (j, bin) in user.bins.clone().enumerate() {
                let (mut err, mut reference) = (0.0, 0.0);
                for (s, row) in rx.iter().enumerate() {
                    let tx = symbols[s * count + j];
                    err += (row[bin] - tx * amp).norm_sqr();
                    reference += tx.norm_sqr();
                }
                sums.err.push(err);
                sums.reference.push(reference);
            }
        }
    }
    Ok(sums)
}

/// Runs `scenario.trials` independent trials and reports per-bin and
/// per-user metrics.
///
/// Trial `t` draws its data from a generator keyed by `(seed, t)`, and
/// results are folded in trial order, so the report does not depend on the
/// size of the rayon pool the call runs in.
pub fn run_monte_carlo(scenario: &ScenarioConfig) -> Result<MetricsReport> {
    let link = Link::new(scenario)?;
    let mut layout = Vec::new();
    for id in NumerologyId::BOTH {
        let scs = scenario.numerology(id).scs_hz;
        let nsym = link.geometry.symbols_per_frame(id);
        for user in link.users(id) {
            for bin in user.bins.clone() {
                layout.push((id, user.user_index, bin, bin as f64 * scs, user.power_ratio, nsym));
            }
        }
    }

    let mut acc = vec![BinAccumulator::default(); layout.len()];
    let mut start = 0;
    while start < scenario.trials {
        let end = (start + CHUNK).min(scenario.trials);
        let chunk: Vec<TrialSums> = (start..end)
            .into_par_iter()
            .map_init(OfdmEngine::new, |engine, t| simulate_trial(&link, t, engine))
            .collect::<Result<_>>()?;
        for sums in &chunk {
            for (i, a) in acc.iter_mut().enumerate() {
                a.push(sums.err[i], sums.reference[i], layout[i].5);
            }
        }
        start = end;
    }

    let bins: Vec<BinRecord> = layout
        .iter()
        .zip(&acc)
        .map(|(&(numerology, user_index, abs_bin, freq_hz, p, _), a)| {
            let n = a.observations as f64;
            let signal_power = p * a.reference / n;
            let interference_power = a.err / n;
            BinRecord {
                numerology,
                user_index,
                abs_bin,
                freq_hz,
                evm: (interference_power / signal_power).sqrt(),
                sir: Sir::from_powers(signal_power, interference_power),
                signal_power,
                interference_power,
                interference_se: a.standard_error(),
            }
        })
        .collect();
    let users = sir_per_user(&bins);
    Ok(MetricsReport { bins, users, trials: scenario.trials, seed: scenario.seed })
}
