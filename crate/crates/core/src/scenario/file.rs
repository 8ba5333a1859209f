//! TOML scenario schema.
//!
//! ```toml
//! schema_version = 1
//! name = "drones"
//! mode = "adtr"                 # or "satr"
//!
//! [array]
//! layout = "upa"                # rows, cols, spacing_wl
//! # layout = "ula"              # count, tx_count, spacing_wl
//!
//! [sweep]
//! carrier_hz = 3500000000.0
//! bandwidth_hz = 40000000.0
//! n_freq = 251
//! n_time = 256
//! # cir_update_interval_s = 0.001
//! # range_migration = true
//!
//! [quantization]
//! mode = "lattice"              # or "ideal"
//! phase_bits = 6
//! amp_step_db = 0.5
//!
//! # [noise]
//! # snr_db = 30.0
//! # seed = 7
//!
//! [[snapshots]]
//! label = "t1"
//!
//! [[snapshots.targets]]
//! range_m = 50.0
//! radial_velocity_mps = 7.0
//! elevation_deg = 50.0          # ADTR; SATR targets use angle_deg
//! azimuth_deg = -20.0
//! gain_db = -5.0                # or rcs_m2
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ArraySpec, Direction, Noise, Quantization, SensingScenario, Snapshot, Sweep, TargetState};
use crate::geometry::FarFieldDirection;
use crate::{Error, Mode, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioRecord {
    schema_version: u32,
    name: String,
    mode: Mode,
    array: ArraySpec,
    sweep: Sweep,
    #[serde(default)]
    quantization: Quantization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise: Option<Noise>,
    snapshots: Vec<SnapshotRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotRecord {
    label: String,
    #[serde(default)]
    targets: Vec<TargetRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetRecord {
    range_m: f64,
    radial_velocity_mps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elevation_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    azimuth_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rcs_m2: Option<f64>,
}

impl From<&TargetState> for TargetRecord {
    fn from(t: &TargetState) -> Self {
        let (elevation_deg, azimuth_deg, angle_deg) = match t.direction {
            Direction::FarField(d) => (Some(d.elevation_deg), Some(d.azimuth_deg), None),
            Direction::NearField { angle_deg } => (None, None, Some(angle_deg)),
        };
        Self {
            range_m: t.range_m,
            radial_velocity_mps: t.radial_velocity_mps,
            elevation_deg,
            azimuth_deg,
            angle_deg,
            gain_db: t.gain_db,
            rcs_m2: t.rcs_m2,
        }
    }
}

impl TargetRecord {
    fn into_state(self) -> std::result::Result<TargetState, String> {
        let direction = match (self.elevation_deg, self.azimuth_deg, self.angle_deg) {
            (Some(elevation_deg), Some(azimuth_deg), None) => Direction::FarField(FarFieldDirection {
                elevation_deg,
                azimuth_deg,
            }),
            (None, None, Some(angle_deg)) => Direction::NearField { angle_deg },
            _ => {
                return Err("a target needs either elevation_deg + azimuth_deg or angle_deg".into());
            }
        };
        Ok(TargetState {
            range_m: self.range_m,
            radial_velocity_mps: self.radial_velocity_mps,
            direction,
            gain_db: self.gain_db,
            rcs_m2: self.rcs_m2,
        })
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line of the `n`-th `[[snapshots.targets]]` header, for diagnostics on
/// checks that run after deserialization.
fn target_header_line(text: &str, n: usize) -> usize {
    text.lines()
        .enumerate()
        .filter(|(_, l)| l.trim() == "[[snapshots.targets]]")
        .nth(n)
        .map(|(i, _)| i + 1)
        .unwrap_or(1)
}

impl SensingScenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let rec: ScenarioRecord = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
            message: e.message().to_string(),
        })?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                expected: SCHEMA_VERSION,
                found: rec.schema_version,
            });
        }
        let mut nth = 0;
        let mut snapshots = Vec::with_capacity(rec.snapshots.len());
        for s in rec.snapshots {
            let mut targets = Vec::with_capacity(s.targets.len());
            for t in s.targets {
                let state = t.into_state().map_err(|message| Error::Parse {
                    line: target_header_line(text, nth),
                    message,
                })?;
                targets.push(state);
                nth += 1;
            }
            snapshots.push(Snapshot { label: s.label, targets });
        }
        Ok(Self {
            name: rec.name,
            mode: rec.mode,
            array: rec.array,
            sweep: rec.sweep,
            quantization: rec.quantization,
            noise: rec.noise,
            snapshots,
        })
    }

    pub fn to_toml_string(&self) -> String {
        let rec = ScenarioRecord {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            mode: self.mode,
            array: self.array,
            sweep: self.sweep,
            quantization: self.quantization,
            noise: self.noise,
            snapshots: self
                .snapshots
                .iter()
                .map(|s| SnapshotRecord {
                    label: s.label.clone(),
                    targets: s.targets.iter().map(TargetRecord::from).collect(),
                })
                .collect(),
        };
        toml::to_string(&rec).expect("scenario record always serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::fsutil::write_atomic(path.as_ref(), self.to_toml_string().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets;
    use proptest::prelude::*;

    #[test]
    fn presets_round_trip_byte_identical() {
        for s in [presets::adtr_drones(), presets::satr_drone()] {
            let a = s.to_toml_string();
            let back = SensingScenario::from_toml_str(&a).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.to_toml_string(), a);
        }
    }

    #[test]
    fn documented_keys_present() {
        let text = presets::adtr_drones().to_toml_string();
        for key in [
            "schema_version",
            "mode = \"adtr\"",
            "[array]",
            "layout = \"upa\"",
            "[sweep]",
            "carrier_hz",
            "bandwidth_hz",
            "n_freq",
            "n_time",
            "[quantization]",
            "phase_bits",
            "amp_step_db",
            "[[snapshots]]",
            "[[snapshots.targets]]",
            "range_m",
            "radial_velocity_mps",
            "elevation_deg",
            "azimuth_deg",
            "gain_db",
        ] {
            assert!(text.contains(key), "missing {key}");
        }
        assert!(presets::satr_drone().to_toml_string().contains("angle_deg"));
    }

    #[test]
    fn parse_error_reports_line() {
        let mut text = presets::adtr_drones().to_toml_string();
        text = text.replacen("n_freq = 251", "n_freq = \"many\"", 1);
        let line = text.lines().position(|l| l.contains("\"many\"")).unwrap() + 1;
        match SensingScenario::from_toml_str(&text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ambiguous_direction_reports_target_line() {
        let text = presets::adtr_drones().to_toml_string().replacen("azimuth_deg = 0.0", "angle_deg = 0.0", 1);
        match SensingScenario::from_toml_str(&text) {
            Err(Error::Parse { line, .. }) => {
                assert_eq!(text.lines().nth(line - 1).unwrap().trim(), "[[snapshots.targets]]");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_schema_version() {
        let text = presets::adtr_drones().to_toml_string().replacen("schema_version = 1", "schema_version = 9", 1);
        assert!(matches!(SensingScenario::from_toml_str(&text), Err(Error::SchemaVersion { found: 9, .. })));
    }

    proptest! {
        #[test]
        fn arbitrary_targets_round_trip(
            r in 0.1f64..5000.0, v in -50.0f64..50.0, el in -90.0f64..90.0, az in -180.0f64..180.0, g in -60.0f64..0.0,
        ) {
            let mut s = presets::adtr_drones();
            s.snapshots[1].targets[0] = TargetState::far_field(r, v, el, az, g);
            let a = s.to_toml_string();
            let back = SensingScenario::from_toml_str(&a).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(back.to_toml_string(), a);
        }
    }
}
