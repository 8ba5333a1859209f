//! Sensing scenarios and the physical-parameter conversions.
//!
//! Monostatic conventions: `τ = 2R/c`, `ν = 2v/λ`, and a positive radial
//! velocity means the target approaches the base station (positive Doppler).
//! Gains are normalized two-way powers in dB with 0 dB at the strongest target
//! of the scenario.

mod file;
pub mod presets;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{ArrayGeometry, FarFieldDirection, NearFieldPoint};
use crate::{Error, Mode, Result, SPEED_OF_LIGHT};

pub use file::SCHEMA_VERSION;

/// CIR update interval used when every target of a snapshot is static.
pub const STATIC_UPDATE_INTERVAL_S: f64 = 1e-3;

/// Round-trip delay of a monostatic echo from `range_m`.
pub fn delay_of(range_m: f64) -> Result<f64> {
    if !(range_m.is_finite() && range_m > 0.0) {
        return Err(Error::invalid(format!("range must be > 0, got {range_m}")));
    }
    Ok(2.0 * range_m / SPEED_OF_LIGHT)
}

/// Monostatic Doppler shift; the sign of the velocity is kept.
/// `wavelength_m` must be positive.
pub fn doppler_of(radial_velocity_mps: f64, wavelength_m: f64) -> f64 {
    debug_assert!(wavelength_m > 0.0);
    2.0 * radial_velocity_mps / wavelength_m
}

/// Radar-equation power gain `σ λ² / ((4π)³ R⁴)`.
pub fn rcs_to_gain(rcs_m2: f64, range_m: f64, wavelength_m: f64) -> Result<f64> {
    for (name, v) in [("rcs", rcs_m2), ("range", range_m), ("wavelength", wavelength_m)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
        }
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(rcs_m2 * wavelength_m * wavelength_m / (four_pi.powi(3) * range_m.powi(4)))
}

/// Angular description of a target, matching the scenario mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    /// ADTR: far-field direction.
    FarField(FarFieldDirection),
    /// SATR: in-plane angle from +y toward +x; the point sits at the target range.
    NearField { angle_deg: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub range_m: f64,
    /// Positive when approaching.
    pub radial_velocity_mps: f64,
    pub direction: Direction,
    pub gain_db: Option<f64>,
    pub rcs_m2: Option<f64>,
}

impl TargetState {
    pub fn far_field(range_m: f64, radial_velocity_mps: f64, elevation_deg: f64, azimuth_deg: f64, gain_db: f64) -> Self {
        Self {
            range_m,
            radial_velocity_mps,
            direction: Direction::FarField(FarFieldDirection {
                elevation_deg,
                azimuth_deg,
            }),
            gain_db: Some(gain_db),
            rcs_m2: None,
        }
    }

    pub fn near_field(range_m: f64, radial_velocity_mps: f64, angle_deg: f64, gain_db: f64) -> Self {
        Self {
            range_m,
            radial_velocity_mps,
            direction: Direction::NearField { angle_deg },
            gain_db: Some(gain_db),
            rcs_m2: None,
        }
    }

    pub fn far_field_direction(&self) -> Option<FarFieldDirection> {
        match self.direction {
            Direction::FarField(d) => Some(d),
            Direction::NearField { .. } => None,
        }
    }

    pub fn near_field_point(&self) -> Result<NearFieldPoint> {
        match self.direction {
            Direction::NearField { angle_deg } => NearFieldPoint::from_range_angle(self.range_m, angle_deg),
            Direction::FarField(_) => Err(Error::invalid("target has a far-field direction")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub label: String,
    pub targets: Vec<TargetState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "lowercase")]
pub enum ArraySpec {
    Upa { rows: usize, cols: usize, spacing_wl: f64 },
    Ula { count: usize, tx_count: usize, spacing_wl: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub n_freq: usize,
    pub n_time: usize,
    /// Overrides the derived CIR update interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cir_update_interval_s: Option<f64>,
    /// Let the range drift as `R - v t` across the CIR sequence.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub range_migration: bool,
}

impl Sweep {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Frequency step `B / (N_f - 1)`.
    pub fn freq_step(&self) -> f64 {
        self.bandwidth_hz / (self.n_freq.max(2) - 1) as f64
    }

    /// Baseband frequency offsets spanning `[-B/2, +B/2]`.
    pub fn baseband_offsets(&self) -> Vec<f64> {
        let df = self.freq_step();
        (0..self.n_freq).map(|j| -self.bandwidth_hz / 2.0 + j as f64 * df).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Quantization {
    Ideal,
    Lattice { phase_bits: u32, amp_step_db: f64 },
}

impl Default for Quantization {
    fn default() -> Self {
        Quantization::Lattice {
            phase_bits: 6,
            amp_step_db: 0.5,
        }
    }
}

impl fmt::Display for Quantization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantization::Ideal => f.write_str("ideal"),
            Quantization::Lattice {
                phase_bits,
                amp_step_db,
            } => write!(f, "{phase_bits}-bit phase, {amp_step_db} dB amplitude step"),
        }
    }
}

/// Additive complex white Gaussian noise on synthesized tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    pub snr_db: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingScenario {
    pub name: String,
    pub mode: Mode,
    pub array: ArraySpec,
    pub sweep: Sweep,
    pub quantization: Quantization,
    pub noise: Option<Noise>,
    pub snapshots: Vec<Snapshot>,
}

impl SensingScenario {
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        match self.array {
            ArraySpec::Upa { rows, cols, spacing_wl } => ArrayGeometry::build_upa(rows, cols, spacing_wl, self.sweep.carrier_hz),
            ArraySpec::Ula {
                count,
                tx_count,
                spacing_wl,
            } => ArrayGeometry::build_split_ula(count, spacing_wl, self.sweep.carrier_hz, tx_count),
        }
    }

    pub fn snapshot(&self, label: &str) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.label == label)
    }

    /// Copy holding only `snapshot`, used as dataset metadata.
    pub fn with_single_snapshot(&self, snapshot: &Snapshot) -> Self {
        Self {
            snapshots: vec![snapshot.clone()],
            ..self.clone()
        }
    }

    /// Largest Doppler magnitude over the targets of `snapshot`.
    pub fn max_doppler_hz(&self, snapshot: &Snapshot) -> f64 {
        let lambda = self.sweep.wavelength();
        snapshot
            .targets
            .iter()
            .map(|t| doppler_of(t.radial_velocity_mps, lambda).abs())
            .fold(0.0, f64::max)
    }

    /// CIR update interval `Δt = 1 / (2 ν_max)` for the snapshot, 1 ms when
    /// everything is static, or the configured override.
    pub fn update_interval_s(&self, snapshot: &Snapshot) -> f64 {
        if let Some(dt) = self.sweep.cir_update_interval_s {
            return dt;
        }
        let nu = self.max_doppler_hz(snapshot);
        if nu > 0.0 {
            1.0 / (2.0 * nu)
        } else {
            STATIC_UPDATE_INTERVAL_S
        }
    }

    /// Normalized power gain (dB) of every target, per snapshot.
    ///
    /// `gain_db` values are taken verbatim. RCS-specified targets go through
    /// the radar equation and are referenced to the strongest RCS target
    /// across the whole scenario.
    pub fn resolved_gains_db(&self) -> Result<Vec<Vec<f64>>> {
        let lambda = self.sweep.wavelength();
        let mut raw = Vec::with_capacity(self.snapshots.len());
        let mut rcs_ref = f64::NEG_INFINITY;
        for snap in &self.snapshots {
            let mut row = Vec::with_capacity(snap.targets.len());
            for t in &snap.targets {
                match (t.gain_db, t.rcs_m2) {
                    (Some(g), None) => row.push((g, false)),
                    (None, Some(s)) => {
                        let db = 10.0 * rcs_to_gain(s, t.range_m, lambda)?.log10();
                        rcs_ref = rcs_ref.max(db);
                        row.push((db, true));
                    }
                    _ => return Err(Error::invalid("exactly one of gain_db / rcs_m2 must be set")),
                }
            }
            raw.push(row);
        }
        Ok(raw
            .into_iter()
            .map(|row| row.into_iter().map(|(g, rcs)| if rcs { g - rcs_ref } else { g }).collect())
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NoSnapshots,
    EmptyTargets,
    TargetCountMismatch,
    Range,
    Gain,
    Direction,
    Sweep,
    Array,
    Quantization,
    DelayAmbiguity,
    DopplerAlias,
}

/// One failed scenario check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Dotted location, e.g. `snapshots[1].targets[0].range_m`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Checks every scenario invariant, collecting all violations.
pub fn validate_scenario(s: &SensingScenario) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |kind, location: String, message: String| out.push(Violation { kind, location, message });

    let geometry = s.geometry();
    if let Err(e) = &geometry {
        push(ViolationKind::Array, "array".into(), e.to_string());
    }
    match (s.mode, s.array) {
        (Mode::Adtr, ArraySpec::Ula { .. }) => push(
            ViolationKind::Array,
            "array".into(),
            "ADTR mode uses a full-duplex planar array".into(),
        ),
        (Mode::Satr, ArraySpec::Upa { .. }) => push(
            ViolationKind::Array,
            "array".into(),
            "SATR mode needs a split Tx/Rx array".into(),
        ),
        _ => {}
    }

    let sw = &s.sweep;
    if !(sw.carrier_hz.is_finite() && sw.carrier_hz > 0.0) {
        push(ViolationKind::Sweep, "sweep.carrier_hz".into(), format!("must be > 0, got {}", sw.carrier_hz));
    }
    if !(sw.bandwidth_hz.is_finite() && sw.bandwidth_hz > 0.0) {
        push(ViolationKind::Sweep, "sweep.bandwidth_hz".into(), format!("must be > 0, got {}", sw.bandwidth_hz));
    }
    if sw.n_freq < 2 {
        push(ViolationKind::Sweep, "sweep.n_freq".into(), format!("must be >= 2, got {}", sw.n_freq));
    }
    if sw.n_time < 1 {
        push(ViolationKind::Sweep, "sweep.n_time".into(), "must be >= 1".into());
    }
    if let Some(dt) = sw.cir_update_interval_s {
        if !(dt.is_finite() && dt > 0.0) {
            push(ViolationKind::Sweep, "sweep.cir_update_interval_s".into(), format!("must be > 0, got {dt}"));
        }
    }

    if let Quantization::Lattice { phase_bits, amp_step_db } = s.quantization {
        if !(1..=30).contains(&phase_bits) {
            push(ViolationKind::Quantization, "quantization.phase_bits".into(), format!("must be in 1..=30, got {phase_bits}"));
        }
        if !(amp_step_db.is_finite() && amp_step_db >= 0.0) {
            push(ViolationKind::Quantization, "quantization.amp_step_db".into(), format!("must be >= 0, got {amp_step_db}"));
        }
    }
    if let Some(n) = s.noise {
        if !n.snr_db.is_finite() {
            push(ViolationKind::Sweep, "noise.snr_db".into(), "must be finite".into());
        }
    }

    if s.snapshots.is_empty() {
        push(ViolationKind::NoSnapshots, "snapshots".into(), "scenario has no snapshots".into());
    }
    let expected_count = s.snapshots.first().map(|s| s.targets.len());
    let (mut any_db, mut any_rcs) = (false, false);
    let sweep_ok = sw.bandwidth_hz > 0.0 && sw.n_freq >= 2 && sw.carrier_hz > 0.0;
    for (si, snap) in s.snapshots.iter().enumerate() {
        let loc = format!("snapshots[{si}]");
        if snap.targets.is_empty() {
            push(ViolationKind::EmptyTargets, format!("{loc}.targets"), format!("snapshot '{}' has no targets", snap.label));
        }
        if Some(snap.targets.len()) != expected_count {
            push(
                ViolationKind::TargetCountMismatch,
                format!("{loc}.targets"),
                format!("{} targets, first snapshot has {}", snap.targets.len(), expected_count.unwrap_or(0)),
            );
        }
        for (ti, t) in snap.targets.iter().enumerate() {
            let tl = format!("{loc}.targets[{ti}]");
            if !(t.range_m.is_finite() && t.range_m > 0.0) {
                push(ViolationKind::Range, format!("{tl}.range_m"), format!("must be > 0, got {}", t.range_m));
            } else if sweep_ok {
                let tau = 2.0 * t.range_m / SPEED_OF_LIGHT;
                let limit = 1.0 / sw.freq_step();
                if tau >= limit {
                    push(
                        ViolationKind::DelayAmbiguity,
                        format!("{tl}.range_m"),
                        format!(
                            "delay {:.3} us exceeds the unambiguous {:.3} us (max range {:.1} m)",
                            tau * 1e6,
                            limit * 1e6,
                            SPEED_OF_LIGHT * limit / 2.0
                        ),
                    );
                }
            }
            if !t.radial_velocity_mps.is_finite() {
                push(ViolationKind::Range, format!("{tl}.radial_velocity_mps"), "must be finite".into());
            }
            match (t.gain_db, t.rcs_m2) {
                (Some(g), None) => {
                    any_db = true;
                    if !g.is_finite() {
                        push(ViolationKind::Gain, format!("{tl}.gain_db"), "must be finite".into());
                    }
                }
                (None, Some(r)) => {
                    any_rcs = true;
                    if !(r.is_finite() && r > 0.0) {
                        push(ViolationKind::Gain, format!("{tl}.rcs_m2"), format!("must be > 0, got {r}"));
                    }
                }
                _ => push(ViolationKind::Gain, tl.clone(), "exactly one of gain_db / rcs_m2 must be set".into()),
            }
            match (s.mode, t.direction) {
                (Mode::Adtr, Direction::FarField(d)) => {
                    if let Err(e) = d.validate() {
                        push(ViolationKind::Direction, tl.clone(), e.to_string());
                    }
                }
                (Mode::Satr, Direction::NearField { angle_deg }) => {
                    if !(angle_deg.is_finite() && (-180.0..=180.0).contains(&angle_deg)) {
                        push(ViolationKind::Direction, format!("{tl}.angle_deg"), format!("outside [-180, 180]: {angle_deg}"));
                    } else if let (Ok(g), Ok(pt)) = (&geometry, t.near_field_point()) {
                        if let Err(e) = crate::geometry::near_field_phases(g, &pt, crate::geometry::Subarray::All) {
                            push(ViolationKind::Direction, tl.clone(), e.to_string());
                        }
                    }
                }
                (mode, _) => push(
                    ViolationKind::Direction,
                    tl.clone(),
                    format!("direction type does not match {} mode", mode.as_str().to_uppercase()),
                ),
            }
        }
        if sw.carrier_hz > 0.0 && snap.targets.iter().all(|t| t.radial_velocity_mps.is_finite()) {
            let dt = s.update_interval_s(snap);
            let nyquist = 1.0 / (2.0 * dt);
            let nu = s.max_doppler_hz(snap);
            // The derived interval puts the fastest target exactly at the edge,
            // which the velocity axis assigns to the positive side.
            if nu > nyquist * (1.0 + 1e-12) {
                push(
                    ViolationKind::DopplerAlias,
                    loc.clone(),
                    format!("Doppler {nu:.2} Hz exceeds half the CIR update rate ({nyquist:.2} Hz)"),
                );
            }
        }
    }
    if any_db && any_rcs {
        push(
            ViolationKind::Gain,
            "snapshots".into(),
            "mixing gain_db and rcs_m2 targets in one scenario is not supported".into(),
        );
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
