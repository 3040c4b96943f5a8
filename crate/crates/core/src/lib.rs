//! Inter-numerology interference simulation for mixed-numerology OFDM.
//!
//! Two numerologies share a band: numerology 1 with subcarrier spacing Δf₁
//! and numerology 2 with 2^k·Δf₁. Both are generated, windowed and summed
//! into one composite frame, and each receiver demodulates its own users.
//! [`metrics::run_monte_carlo`] measures the resulting EVM and SIR, and
//! [`oracle`] predicts the same interference in closed form.

pub mod composer;
pub mod error;
pub mod link;
pub mod metrics;
pub mod numerology;
pub mod oracle;
pub mod presets;
pub mod rx;
pub mod tx;
pub mod window;

pub use error::{Error, Result};
pub use metrics::{run_monte_carlo, BinRecord, MetricsReport, Sir, UserRecord};
pub use numerology::{
    build_frame_geometry, validate_scenario, CpMode, FrameGeometry, NumerologyConfig, NumerologyId, ScenarioConfig,
    UserAllocation, Violation, WindowConfig,
};
pub use oracle::{expected_interference, leakage_matrix, ExpectedBin, LeakageMatrix};
pub use presets::{expand_preset, list_presets, PresetMember};
pub use tx::ComplexSignal;
