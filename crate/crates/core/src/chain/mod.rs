//! Configuration compiler and forward synthesis engine.
//!
//! The APM network holds the per-element spatial weights of every target; each
//! RTS unit applies one target's delay, Doppler and complex gain. Synthesis
//! reproduces what the VNA-and-switch rig records through that chain.

mod compile;
pub mod dataset;
mod quantize;
mod synth;

use serde::{Deserialize, Serialize};

use crate::scenario::{Quantization, SensingScenario, Snapshot};
use crate::{Error, Mode, Result, C64};

pub use compile::{compile, compile_adtr, compile_satr};
pub use dataset::{read_dataset, write_dataset, CfrDataset};
pub use quantize::{quantize_apm, quantize_weight};
pub use synth::{add_noise, synthesize_cfr_adtr, synthesize_cfr_satr};

/// Dense row-major complex matrix; rows are APM Type-A ports (array
/// elements), columns are targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl WeightMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: C64) {
        self.data[row * self.cols + col] = v;
    }

    pub fn column(&self, col: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut C64> {
        self.data.iter_mut()
    }
}

/// One Type-B port pair feeding RTS unit `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortGroup {
    /// Type-B port delivering the signal to the RTS input (`Bn_T`).
    pub tx_port: usize,
    /// Type-B port receiving the RTS output (`Bn_R`).
    pub rx_port: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApmConfig {
    pub mode: Mode,
    pub type_a_count: usize,
    pub type_b_groups: Vec<PortGroup>,
    /// Type-A ports wired to the base-station transmitters.
    pub tx_elements: Vec<usize>,
    /// Type-A ports wired to the base-station receivers.
    pub rx_elements: Vec<usize>,
    /// Channel `A_k → Bn_T`, K × N.
    pub weights_tx: WeightMatrix,
    /// Channel `Bn_R → A_k`, K × N.
    pub weights_rx: WeightMatrix,
    pub quantization: Quantization,
}

impl ApmConfig {
    pub fn target_count(&self) -> usize {
        self.type_b_groups.len()
    }

    /// Number of internal links with a non-zero weight.
    pub fn active_links(&self) -> usize {
        self.weights_tx.iter().chain(self.weights_rx.iter()).filter(|w| w.norm_sqr() > 0.0).count()
    }
}

/// One stepped CIR sample loaded into an RTS unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirRecord {
    pub delay_s: f64,
    /// Gain including the Doppler phase progression up to this sample.
    pub complex_gain: C64,
    pub doppler_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtsUnitConfig {
    pub unit: usize,
    pub update_interval_s: f64,
    pub cir_sequence: Vec<CirRecord>,
}

/// Compiled hardware settings for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigBundle {
    pub snapshot: String,
    /// RTS processing units consumed (one per target).
    pub rts_units_used: usize,
    /// RTS RF ports consumed (input + output per unit).
    pub rts_ports_used: usize,
    pub apm: ApmConfig,
    pub rts_units: Vec<RtsUnitConfig>,
}

impl ConfigBundle {
    pub fn new(snapshot: &str, apm: ApmConfig, rts_units: Vec<RtsUnitConfig>) -> Self {
        Self {
            snapshot: snapshot.to_string(),
            rts_units_used: rts_units.len(),
            rts_ports_used: 2 * rts_units.len(),
            apm,
            rts_units,
        }
    }

    /// TOML rendering; complex weights appear as `[re, im]` pairs.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(format!("bundle serialization: {e}")))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        crate::fsutil::write_atomic(path.as_ref(), self.to_toml_string()?.as_bytes())
    }
}

/// One bundle per snapshot, in scenario order.
pub fn compile_bundles(scenario: &SensingScenario) -> Result<Vec<ConfigBundle>> {
    scenario
        .snapshots
        .iter()
        .map(|snap| {
            let (apm, units) = compile(scenario, snap)?;
            Ok(ConfigBundle::new(&snap.label, apm, units))
        })
        .collect()
}

/// Compiles, synthesizes and (optionally) adds noise for one snapshot. The
/// dataset metadata echoes the scenario restricted to that snapshot.
pub fn synthesize_snapshot(scenario: &SensingScenario, snapshot: &Snapshot) -> Result<CfrDataset> {
    let (apm, units) = compile(scenario, snapshot)?;
    let mut d = match scenario.mode {
        Mode::Adtr => synthesize_cfr_adtr(&apm, &units, &scenario.sweep)?,
        Mode::Satr => synthesize_cfr_satr(&apm, &units, &scenario.sweep)?,
    };
    if let Some(noise) = scenario.noise {
        add_noise(&mut d, noise.snr_db, noise.seed);
    }
    d.metadata = scenario.with_single_snapshot(snapshot).to_toml_string();
    Ok(d)
}

fn check_units(apm: &ApmConfig, units: &[RtsUnitConfig]) -> Result<(usize, f64)> {
    if units.len() != apm.target_count() || apm.weights_tx.cols() != units.len() || apm.weights_rx.cols() != units.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} RTS units for {} APM port groups",
            units.len(),
            apm.target_count()
        )));
    }
    if apm.weights_tx.rows() != apm.type_a_count || apm.weights_rx.rows() != apm.type_a_count {
        return Err(Error::DimensionMismatch("weight rows differ from the Type-A port count".into()));
    }
    let first = units.first().ok_or_else(|| Error::invalid("no RTS units"))?;
    let n_t = first.cir_sequence.len();
    let dt = first.update_interval_s;
    if n_t == 0 || !(dt > 0.0) {
        return Err(Error::invalid("RTS units need >= 1 CIR sample and a positive update interval"));
    }
    for u in units {
        if u.cir_sequence.len() != n_t || u.update_interval_s != dt {
            return Err(Error::DimensionMismatch(format!(
                "RTS unit {} has {} samples at {} s, unit 0 has {} at {} s",
                u.unit,
                u.cir_sequence.len(),
                u.update_interval_s,
                n_t,
                dt
            )));
        }
    }
    Ok((n_t, dt))
}
