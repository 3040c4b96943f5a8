//! One end-to-end pass: data → both transmit chains → composite →
//! each numerology's receiver.

use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::composer::frame_numerology;
use crate::error::Result;
use crate::numerology::{build_frame_geometry, ensure_valid, FrameGeometry, NumerologyId, ScenarioConfig};
use crate::rx::{apply_rx_window, capture_windows, CaptureWindow};
use crate::tx::{build_grid, map_bpsk, ComplexSignal, OfdmEngine, ResourceGrid};

/// A user on its absolute bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedUser {
    pub user_index: usize,
    pub bins: Range<usize>,
    pub power_ratio: f64,
}

/// Random generator for one trial, derived from the master seed and the
/// trial index only, so trials can run in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A validated scenario with its geometry and placements resolved.
#[derive(Debug, Clone)]
pub struct Link {
    pub scenario: ScenarioConfig,
    pub geometry: FrameGeometry,
    users: [Vec<PlacedUser>; 2],
}

/// Per-numerology, per-user BPSK symbols for one frame (symbol-major).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameData {
    pub symbols: [Vec<Vec<Complex64>>; 2],
}

impl Link {
    pub fn new(scenario: &ScenarioConfig) -> Result<Self> {
        ensure_valid(scenario)?;
        let geometry = build_frame_geometry(scenario)?;
        let place = |id| {
            scenario
                .placed_users(id)
                .into_iter()
                .map(|(a, bins)| PlacedUser { user_index: a.user_index, bins, power_ratio: a.power_ratio() })
                .collect()
        };
        Ok(Self { scenario: scenario.clone(), geometry, users: [place(NumerologyId::One), place(NumerologyId::Two)] })
    }

    pub fn users(&self, id: NumerologyId) -> &[PlacedUser] {
        &self.users[id.index()]
    }

    /// Draws fresh bits for every user: numerology 1 then 2, users in config
    /// order, all symbols of a user before the next user.
    pub fn draw_data(&self, rng: &mut impl Rng) -> FrameData {
        let draw = |id: NumerologyId, rng: &mut _| -> Vec<Vec<Complex64>> {
            let nsym = self.geometry.symbols_per_frame(id);
            self.users(id)
                .iter()
                .map(|u| {
                    let bits: Vec<bool> = (0..u.bins.len() * nsym).map(|_| Rng::random(rng)).collect();
                    map_bpsk(&bits)
                })
                .collect()
        };
        let one = draw(NumerologyId::One, rng);
        let two = draw(NumerologyId::Two, rng);
        FrameData { symbols: [one, two] }
    }

    pub fn grid(&self, id: NumerologyId, data: &FrameData) -> Result<ResourceGrid> {
        let allocs: Vec<_> = self.scenario.placed_users(id);
        build_grid(&data.symbols[id.index()], &allocs, &self.geometry, id)
    }

    /// One numerology's windowed frame of `frame_samples` samples.
    pub fn transmit_numerology(
        &self,
        id: NumerologyId,
        data: &FrameData,
        engine: &mut OfdmEngine,
    ) -> Result<ComplexSignal> {
        let grid = self.grid(id, data)?;
        let symbols = engine.modulate_grid(&grid);
        frame_numerology(&symbols, &self.geometry, id, self.scenario.windows.tx(id))
    }

    /// The composite frame: both numerologies summed.
    pub fn transmit(&self, data: &FrameData, engine: &mut OfdmEngine) -> Result<ComplexSignal> {
        let mut frame = self.transmit_numerology(NumerologyId::One, data, engine)?;
        let two = self.transmit_numerology(NumerologyId::Two, data, engine)?;
        for (a, b) in frame.samples.iter_mut().zip(&two.samples) {
            *a += b;
        }
        Ok(frame)
    }

    pub fn windows(&self, id: NumerologyId) -> Vec<CaptureWindow> {
        capture_windows(&self.geometry, id)
    }

    /// All bins of every symbol demodulated by numerology `id`'s receiver.
    pub fn receive(
        &self,
        frame: &ComplexSignal,
        id: NumerologyId,
        engine: &mut OfdmEngine,
    ) -> Result<Vec<Vec<Complex64>>> {
        let rolloff = self.scenario.windows.rx(id);
        let cp = self.geometry.cp_samples(id);
        self.windows(id)
            .into_iter()
            .map(|w| Ok(engine.demodulate(&apply_rx_window(frame, w, rolloff, cp)?.samples)))
            .collect()
    }
}
