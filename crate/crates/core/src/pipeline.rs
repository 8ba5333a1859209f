//! End-to-end runs: synthesize each snapshot, estimate, compare against the
//! scenario truth.

use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::chain::{synthesize_snapshot, CfrDataset};
use crate::estimation::{
    delay_profiles, detect_peaks, joint_range_angle_satr, padp_beamform, pas_at_delay, pas_slice, range_velocity_map,
    refine_delay, uniform_grid, DetectedTarget, PadpReference, Pas, PeakList, RangeAngleMap, RangeVelocityMap, Wavefront,
    WindowKind,
};
use crate::geometry::{ArrayGeometry, FarFieldDirection};
use crate::report::{Parameter, ParameterRow, Provenance, RunReport, SnapshotReport, TargetReport, Tolerances};
use crate::scenario::{validate_scenario, Direction, SensingScenario, Snapshot};
use crate::{Error, Mode, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationSettings {
    pub port: usize,
    pub pad_t: usize,
    pub pad_f: usize,
    pub window: WindowKind,
    /// Guard half-width in padded bins; `None` uses twice the larger padding.
    pub guard: Option<usize>,
    pub elevation_grid_deg: Vec<f64>,
    pub azimuth_grid_deg: Vec<f64>,
    pub satr_range_grid_m: Vec<f64>,
    pub satr_angle_grid_deg: Vec<f64>,
    pub satr_window: WindowKind,
    pub satr_wavefront: Wavefront,
}

impl Default for EstimationSettings {
    fn default() -> Self {
        // ±90° is left out: there the two-way signature of a half-wavelength
        // grid is identical to boresight
        let angles = uniform_grid(-89.0, 89.0, 1.0);
        Self {
            port: 0,
            pad_t: 4,
            pad_f: 4,
            window: WindowKind::Hanning,
            guard: None,
            elevation_grid_deg: angles.clone(),
            azimuth_grid_deg: angles,
            satr_range_grid_m: uniform_grid(0.5, 6.0, 0.02),
            satr_angle_grid_deg: uniform_grid(-90.0, 90.0, 0.25),
            satr_window: WindowKind::Hanning,
            satr_wavefront: Wavefront::NearField,
        }
    }
}

impl EstimationSettings {
    fn guard_bins(&self) -> usize {
        self.guard.unwrap_or(2 * self.pad_t.max(self.pad_f))
    }
}

#[derive(Debug, Clone)]
pub struct AdtrEstimate {
    pub rv_map: RangeVelocityMap,
    pub peaks: PeakList,
    /// One PAS per peak, at the refined delay.
    pub pas: Vec<Pas>,
    pub detections: Vec<DetectedTarget>,
}

#[derive(Debug, Clone)]
pub struct SatrEstimate {
    pub map: RangeAngleMap,
    pub detections: Vec<DetectedTarget>,
}

#[derive(Debug, Clone)]
pub enum Estimate {
    Adtr(AdtrEstimate),
    Satr(SatrEstimate),
}

impl Estimate {
    pub fn detections(&self) -> &[DetectedTarget] {
        match self {
            Estimate::Adtr(e) => &e.detections,
            Estimate::Satr(e) => &e.detections,
        }
    }
}

/// Range–velocity detection on one port, then per detection: a coarse PAS
/// from the PADP at the nearest padded delay bin, a delay refinement towards
/// the coarse direction, and the final PAS at the refined delay. Powers are
/// referenced to a unit on-beam target, so they read as channel gain in dB.
pub fn estimate_adtr(dataset: &CfrDataset, geometry: &ArrayGeometry, n_targets: usize, s: &EstimationSettings) -> Result<AdtrEstimate> {
    if dataset.n_ports() != geometry.len() {
        return Err(Error::DimensionMismatch(format!("{} ports for {} elements", dataset.n_ports(), geometry.len())));
    }
    let rv_map = range_velocity_map(dataset, s.port, s.pad_t, s.pad_f, s.window)?;
    let peaks = detect_peaks(&rv_map, n_targets.max(1), s.guard_bins());
    let profiles = delay_profiles(dataset, 0, s.pad_f, s.window)?;
    let bin = 1.0 / (profiles.n_delays() as f64 * dataset.freq_step());
    let (el, az) = (&s.elevation_grid_deg, &s.azimuth_grid_deg);

    let mut pas = Vec::with_capacity(peaks.targets.len());
    let mut detections = Vec::with_capacity(peaks.targets.len());
    for p in &peaks.targets {
        let tau0 = 2.0 * p.range_m / SPEED_OF_LIGHT;
        let padp = padp_beamform(&profiles.select(&[profiles.nearest(tau0)]), geometry, el, az, PadpReference::UnitTarget)?;
        let mut dir = direction_of(&pas_slice(&padp, 0)?.peak)?;
        let mut slice = None;
        for _ in 0..3 {
            let tau = refine_delay(dataset, 0, s.window, geometry, &dir, tau0, bin)?;
            let cur = pas_at_delay(dataset, 0, s.window, geometry, el, az, tau, PadpReference::UnitTarget)?;
            let next = direction_of(&cur.peak)?;
            slice = Some(cur);
            if next == dir {
                break;
            }
            dir = next;
        }
        let slice = slice.expect("at least one refinement pass");
        detections.push(DetectedTarget {
            range_m: p.range_m,
            velocity_mps: p.velocity_mps,
            elevation_deg: slice.peak.elevation_deg,
            azimuth_deg: slice.peak.azimuth_deg,
            power_db: slice.peak.power_db,
        });
        pas.push(slice);
    }
    Ok(AdtrEstimate { rv_map, peaks, pas, detections })
}

fn direction_of(t: &DetectedTarget) -> Result<FarFieldDirection> {
    FarFieldDirection::new(t.elevation_deg.unwrap_or(0.0), t.azimuth_deg.unwrap_or(0.0))
}

pub fn estimate_satr(dataset: &CfrDataset, geometry: &ArrayGeometry, n_targets: usize, s: &EstimationSettings) -> Result<SatrEstimate> {
    let map = joint_range_angle_satr(
        dataset,
        geometry,
        &s.satr_range_grid_m,
        &s.satr_angle_grid_deg,
        s.satr_window,
        s.satr_wavefront,
    )?;
    let detections = if n_targets <= 1 { vec![map.peak] } else { map.peaks(n_targets, 8) };
    Ok(SatrEstimate { map, detections })
}

/// Mode-appropriate estimation of a dataset belonging to `snapshot`.
pub fn estimate(dataset: &CfrDataset, scenario: &SensingScenario, snapshot: &Snapshot, s: &EstimationSettings) -> Result<Estimate> {
    if dataset.mode != scenario.mode {
        return Err(Error::ModeMismatch { expected: scenario.mode, found: dataset.mode });
    }
    let geometry = scenario.geometry()?;
    let n = snapshot.targets.len();
    match scenario.mode {
        Mode::Adtr => estimate_adtr(dataset, &geometry, n, s).map(Estimate::Adtr),
        Mode::Satr => estimate_satr(dataset, &geometry, n, s).map(Estimate::Satr),
    }
}

/// Target-to-detection comparison rows for one snapshot. Targets are paired
/// with detections greedily by tolerance-normalized distance in range and
/// velocity (range and angle for SATR).
pub fn compare(
    scenario: &SensingScenario,
    snapshot_index: usize,
    detections: &[DetectedTarget],
    velocity_estimable: bool,
    tol: &Tolerances,
) -> Result<SnapshotReport> {
    let snapshot = &scenario.snapshots[snapshot_index];
    let gains = scenario.resolved_gains_db()?;
    let gains = &gains[snapshot_index];

    let truth_angle = |i: usize| match snapshot.targets[i].direction {
        Direction::FarField(d) => d.azimuth_deg,
        Direction::NearField { angle_deg } => angle_deg,
    };
    let distance = |i: usize, d: &DetectedTarget| -> f64 {
        let t = &snapshot.targets[i];
        let mut acc = ((d.range_m - t.range_m) / tol.range_m).powi(2);
        match scenario.mode {
            Mode::Adtr => {
                if let (true, Some(v)) = (velocity_estimable, d.velocity_mps) {
                    acc += ((v - t.radial_velocity_mps) / tol.velocity_mps).powi(2);
                }
            }
            Mode::Satr => {
                acc = ((d.range_m - t.range_m) / tol.satr_range_m).powi(2);
                acc += ((d.azimuth_deg.unwrap_or(f64::NAN) - truth_angle(i)) / tol.satr_angle_deg).powi(2);
            }
        }
        acc
    };
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..snapshot.targets.len() {
        for (j, d) in detections.iter().enumerate() {
            pairs.push((distance(i, d), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut matched: Vec<Option<usize>> = vec![None; snapshot.targets.len()];
    let mut used = vec![false; detections.len()];
    for (_, i, j) in pairs {
        if matched[i].is_none() && !used[j] {
            matched[i] = Some(j);
            used[j] = true;
        }
    }

    let targets = snapshot
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let d = matched[i].map(|j| &detections[j]);
            let rows = match (scenario.mode, t.direction) {
                (Mode::Adtr, Direction::FarField(dir)) => vec![
                    ParameterRow::compare(Parameter::RangeM, t.range_m, d.map(|d| d.range_m), tol.range_m),
                    if velocity_estimable {
                        ParameterRow::compare(Parameter::VelocityMps, t.radial_velocity_mps, d.and_then(|d| d.velocity_mps), tol.velocity_mps)
                    } else {
                        ParameterRow::not_estimable(Parameter::VelocityMps, t.radial_velocity_mps, tol.velocity_mps)
                    },
                    ParameterRow::compare(Parameter::ElevationDeg, dir.elevation_deg, d.and_then(|d| d.elevation_deg), tol.angle_deg),
                    ParameterRow::compare(Parameter::AzimuthDeg, dir.azimuth_deg, d.and_then(|d| d.azimuth_deg), tol.angle_deg),
                    ParameterRow::compare(Parameter::PowerDb, gains[i], d.map(|d| d.power_db), tol.power_db),
                ],
                _ => vec![
                    ParameterRow::compare(Parameter::RangeM, t.range_m, d.map(|d| d.range_m), tol.satr_range_m),
                    ParameterRow::compare(Parameter::AngleDeg, truth_angle(i), d.and_then(|d| d.azimuth_deg), tol.satr_angle_deg),
                ],
            };
            TargetReport { target: i, detected: d.is_some(), rows }
        })
        .collect();
    Ok(SnapshotReport { label: snapshot.label.clone(), targets })
}

pub fn scenario_digest(scenario: &SensingScenario) -> String {
    hex::encode(Sha256::digest(scenario.to_toml_string().as_bytes()))
}

pub fn provenance(scenario: &SensingScenario) -> Provenance {
    Provenance {
        scenario_name: scenario.name.clone(),
        scenario_sha256: scenario_digest(scenario),
        tool_version: concat!("isacemu ", env!("CARGO_PKG_VERSION")).to_string(),
        mode: scenario.mode,
        quantization: scenario.quantization.to_string(),
        n_time: scenario.sweep.n_time,
        n_freq: scenario.sweep.n_freq,
    }
}

/// Validates, then synthesizes, estimates and compares every snapshot.
/// `on_snapshot` sees each dataset and estimate before they are dropped,
/// so callers can persist them without holding all snapshots in memory.
pub fn run_scenario(
    scenario: &SensingScenario,
    settings: &EstimationSettings,
    tolerances: &Tolerances,
    mut on_snapshot: impl FnMut(&Snapshot, &CfrDataset, &Estimate) -> Result<()>,
) -> Result<RunReport> {
    validate_scenario(scenario).map_err(Error::Validation)?;
    let start = Instant::now();
    let mut snapshots = Vec::with_capacity(scenario.snapshots.len());
    for (i, snap) in scenario.snapshots.iter().enumerate() {
        let dataset = synthesize_snapshot(scenario, snap)?;
        let est = estimate(&dataset, scenario, snap, settings)?;
        on_snapshot(snap, &dataset, &est)?;
        snapshots.push(compare(scenario, i, est.detections(), dataset.n_time() > 1, tolerances)?);
    }
    Ok(RunReport::new(provenance(scenario), *tolerances, snapshots, start.elapsed().as_secs_f64()))
}
