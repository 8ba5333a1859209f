use std::f64::consts::PI;

use super::{quantize_apm, ApmConfig, CirRecord, PortGroup, RtsUnitConfig, WeightMatrix};
use crate::geometry::{far_field_steering, near_field_phases, Subarray};
use crate::scenario::{delay_of, doppler_of, rcs_to_gain, Quantization, SensingScenario, Snapshot};
use crate::{Error, Mode, Result, C64};

/// Dispatches on the scenario mode.
pub fn compile(scenario: &SensingScenario, snapshot: &Snapshot) -> Result<(ApmConfig, Vec<RtsUnitConfig>)> {
    match scenario.mode {
        Mode::Adtr => compile_adtr(scenario, snapshot),
        Mode::Satr => compile_satr(scenario, snapshot),
    }
}

/// ADTR: column `n` of both weight matrices is the one-way steering vector of
/// target `n`; the RTS unit carries its gain, delay and Doppler.
pub fn compile_adtr(scenario: &SensingScenario, snapshot: &Snapshot) -> Result<(ApmConfig, Vec<RtsUnitConfig>)> {
    expect_mode(scenario, Mode::Adtr)?;
    let geometry = scenario.geometry()?;
    let k = geometry.len();
    let n = snapshot.targets.len();
    let mut w = WeightMatrix::zeros(k, n);
    for (col, t) in snapshot.targets.iter().enumerate() {
        let dir = t
            .far_field_direction()
            .ok_or_else(|| Error::invalid(format!("target {col} has no far-field direction")))?;
        dir.validate()?;
        for (row, s) in far_field_steering(&geometry, &dir).into_iter().enumerate() {
            w.set(row, col, s);
        }
    }
    let all: Vec<usize> = (0..k).collect();
    let apm = ApmConfig {
        mode: Mode::Adtr,
        type_a_count: k,
        type_b_groups: port_groups(n),
        tx_elements: all.clone(),
        rx_elements: all,
        weights_tx: w.clone(),
        weights_rx: w,
        quantization: Quantization::Ideal,
    };
    Ok((apply_quantization(apm, scenario.quantization), rts_units(scenario, snapshot)?))
}

/// SATR: Tx rows hold the spherical-wavefront phases of the Tx elements, Rx
/// rows those of the Rx elements; all other links stay zero.
pub fn compile_satr(scenario: &SensingScenario, snapshot: &Snapshot) -> Result<(ApmConfig, Vec<RtsUnitConfig>)> {
    expect_mode(scenario, Mode::Satr)?;
    let geometry = scenario.geometry()?;
    let k = geometry.len();
    let n = snapshot.targets.len();
    let tx = geometry.indices(Subarray::Tx);
    let rx = geometry.indices(Subarray::Rx);
    let mut wt = WeightMatrix::zeros(k, n);
    let mut wr = WeightMatrix::zeros(k, n);
    for (col, t) in snapshot.targets.iter().enumerate() {
        let pt = t.near_field_point()?;
        for (&row, v) in tx.iter().zip(near_field_phases(&geometry, &pt, Subarray::Tx)?) {
            wt.set(row, col, v);
        }
        for (&row, v) in rx.iter().zip(near_field_phases(&geometry, &pt, Subarray::Rx)?) {
            wr.set(row, col, v);
        }
    }
    let apm = ApmConfig {
        mode: Mode::Satr,
        type_a_count: k,
        type_b_groups: port_groups(n),
        tx_elements: tx,
        rx_elements: rx,
        weights_tx: wt,
        weights_rx: wr,
        quantization: Quantization::Ideal,
    };
    Ok((apply_quantization(apm, scenario.quantization), rts_units(scenario, snapshot)?))
}

fn expect_mode(scenario: &SensingScenario, expected: Mode) -> Result<()> {
    if scenario.mode != expected {
        return Err(Error::ModeMismatch {
            expected,
            found: scenario.mode,
        });
    }
    Ok(())
}

fn port_groups(n: usize) -> Vec<PortGroup> {
    (0..n)
        .map(|i| PortGroup {
            tx_port: 2 * i,
            rx_port: 2 * i + 1,
        })
        .collect()
}

fn apply_quantization(apm: ApmConfig, q: Quantization) -> ApmConfig {
    match q {
        Quantization::Ideal => apm,
        Quantization::Lattice { phase_bits, amp_step_db } => quantize_apm(&apm, phase_bits, amp_step_db),
    }
}

/// Normalized power gains (dB) of the targets of `snapshot`.
fn snapshot_gains_db(scenario: &SensingScenario, snapshot: &Snapshot) -> Result<Vec<f64>> {
    if let Some(i) = scenario.snapshots.iter().position(|s| s == snapshot) {
        return Ok(scenario.resolved_gains_db()?.swap_remove(i));
    }
    // snapshot not part of the scenario: reference RCS targets within it
    let lambda = scenario.sweep.wavelength();
    let raw = snapshot
        .targets
        .iter()
        .map(|t| match (t.gain_db, t.rcs_m2) {
            (Some(g), None) => Ok((g, false)),
            (None, Some(s)) => Ok((10.0 * rcs_to_gain(s, t.range_m, lambda)?.log10(), true)),
            _ => Err(Error::invalid("exactly one of gain_db / rcs_m2 must be set")),
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = raw.iter().filter(|r| r.1).map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(raw.into_iter().map(|(g, rcs)| if rcs { g - reference } else { g }).collect())
}

fn rts_units(scenario: &SensingScenario, snapshot: &Snapshot) -> Result<Vec<RtsUnitConfig>> {
    let lambda = scenario.sweep.wavelength();
    let dt = scenario.update_interval_s(snapshot);
    let n_t = scenario.sweep.n_time;
    if n_t == 0 {
        return Err(Error::invalid("n_time must be >= 1"));
    }
    let gains = snapshot_gains_db(scenario, snapshot)?;
    snapshot
        .targets
        .iter()
        .zip(gains)
        .enumerate()
        .map(|(unit, (t, gain_db))| {
            let nu = doppler_of(t.radial_velocity_mps, lambda);
            let amplitude = 10f64.powf(gain_db / 20.0);
            let cir_sequence = (0..n_t)
                .map(|i| {
                    let ti = i as f64 * dt;
                    let range = if scenario.sweep.range_migration {
                        t.range_m - t.radial_velocity_mps * ti
                    } else {
                        t.range_m
                    };
                    Ok(CirRecord {
                        delay_s: delay_of(range)?,
                        complex_gain: C64::from_polar(amplitude, 2.0 * PI * nu * ti),
                        doppler_hz: nu,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RtsUnitConfig {
                unit,
                update_interval_s: dt,
                cir_sequence,
            })
        })
        .collect()
}
