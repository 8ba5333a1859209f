//! The two drone scenarios used throughout the test suites and shipped as
//! example scenario files.

use super::{ArraySpec, Quantization, SensingScenario, Snapshot, Sweep, TargetState};
use crate::Mode;

pub const CARRIER_HZ: f64 = 3.5e9;
pub const BANDWIDTH_HZ: f64 = 40e6;

/// Scaled sweep sizes for the ADTR drone run.
pub const SCALED_N_TIME: usize = 256;
pub const SCALED_N_FREQ: usize = 251;

/// Full-size acquisition: 1000 CIR samples × 1001 frequency points.
pub const FULL_N_TIME: usize = 1000;
pub const FULL_N_FREQ: usize = 1001;

/// Two drones seen by a 4×8 half-wavelength UPA over three snapshots.
/// Columns: range m, radial velocity m/s, elevation °, azimuth °, gain dB.
pub fn adtr_drones() -> SensingScenario {
    let rows: [(&str, [(f64, f64, f64, f64, f64); 2]); 3] = [
        ("t1", [(50.0, 7.0, 50.0, -20.0, -5.0), (155.0, 5.0, 0.0, 0.0, -25.0)]),
        ("t2", [(26.0, 2.0, 20.0, 10.0, 0.0), (125.0, 10.0, 0.0, 0.0, -20.0)]),
        ("t3", [(38.0, 10.0, -10.0, 30.0, -3.0), (110.0, 15.0, 0.0, 0.0, -13.0)]),
    ];
    SensingScenario {
        name: "adtr-two-drones".into(),
        mode: Mode::Adtr,
        array: ArraySpec::Upa {
            rows: 4,
            cols: 8,
            spacing_wl: 0.5,
        },
        sweep: Sweep {
            carrier_hz: CARRIER_HZ,
            bandwidth_hz: BANDWIDTH_HZ,
            n_freq: SCALED_N_FREQ,
            n_time: SCALED_N_TIME,
            cir_update_interval_s: None,
            range_migration: false,
        },
        quantization: Quantization::default(),
        noise: None,
        snapshots: rows
            .iter()
            .map(|(label, targets)| Snapshot {
                label: (*label).into(),
                targets: targets
                    .iter()
                    .map(|&(r, v, el, az, g)| TargetState::far_field(r, v, el, az, g))
                    .collect(),
            })
            .collect(),
    }
}

/// Static drone at 3 m, 30° in front of a 1×16 half-wavelength ULA whose
/// first eight elements transmit.
pub fn satr_drone() -> SensingScenario {
    SensingScenario {
        name: "satr-near-drone".into(),
        mode: Mode::Satr,
        array: ArraySpec::Ula {
            count: 16,
            tx_count: 8,
            spacing_wl: 0.5,
        },
        sweep: Sweep {
            carrier_hz: CARRIER_HZ,
            bandwidth_hz: BANDWIDTH_HZ,
            n_freq: FULL_N_FREQ,
            n_time: 1,
            cir_update_interval_s: None,
            range_migration: false,
        },
        quantization: Quantization::default(),
        noise: None,
        snapshots: vec![Snapshot {
            label: "static".into(),
            targets: vec![TargetState::near_field(3.0, 0.0, 30.0, 0.0)],
        }],
    }
}
