//! Numerical simulator for conductive multi-target emulation of ISAC base
//! stations.
//!
//! A sensing scenario (targets with range, radial velocity, angle and gain)
//! is compiled into amplitude-and-phase matrix (APM) weights plus radar target
//! simulator (RTS) unit configurations. The forward engine synthesizes the
//! channel-frequency-response (CFR) tensors a VNA-and-switch rig would record,
//! and the estimation chain recovers the targets from those tensors.
//!
//! ```text
//! scenario ──compile──► ApmConfig + RtsUnitConfig ──synthesize──► CfrDataset
//!                                                                   │
//!      RunReport ◄──compare── DetectedTarget ◄──estimate────────────┘
//! ```
//!
//! Two sensing modes are covered:
//!
//! * **ADTR** (array duplex): every element transmits and receives; targets are
//!   far-field; the rig records one monostatic CFR per port.
//! * **SATR** (split array): a Tx sub-array and an Rx sub-array operate
//!   simultaneously; targets may be near-field; the rig records the full
//!   Rx × Tx cross matrix.

pub mod chain;
mod fsutil;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod pipeline;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
pub use fsutil::write_atomic;

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Sensing operation mode of the base station under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Array duplex transmission and reception.
    Adtr,
    /// Split-array transmission and reception.
    Satr,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Adtr => "adtr",
            Mode::Satr => "satr",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
