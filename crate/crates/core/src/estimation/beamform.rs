use rayon::prelude::*;

use super::{profiles_at_delay, to_db, DelayProfiles, DetectedTarget, WindowKind, DB_FLOOR};
use crate::chain::CfrDataset;
use crate::geometry::{far_field_steering, ArrayGeometry, FarFieldDirection};
use crate::{Error, Result, C64, SPEED_OF_LIGHT};

/// Reference level for PADP decibels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PadpReference {
    /// Strongest cell of the computed PADP reads 0 dB.
    GlobalPeak,
    /// A unit-amplitude target on beam reads 0 dB, so peak levels equal the
    /// emulated channel gain.
    UnitTarget,
}

/// Power-angular-delay profile in dB.
#[derive(Debug, Clone)]
pub struct Padp {
    pub elevation_deg: Vec<f64>,
    pub azimuth_deg: Vec<f64>,
    pub delays_s: Vec<f64>,
    /// `[delay][elevation][azimuth]`, row-major.
    pub power_db: Vec<f64>,
}

impl Padp {
    pub fn db(&self, elevation: usize, azimuth: usize, delay: usize) -> f64 {
        let plane = self.elevation_deg.len() * self.azimuth_deg.len();
        self.power_db[delay * plane + elevation * self.azimuth_deg.len() + azimuth]
    }
}

/// Power-angular spectrum at one delay.
#[derive(Debug, Clone)]
pub struct Pas {
    pub elevation_deg: Vec<f64>,
    pub azimuth_deg: Vec<f64>,
    pub delay_s: f64,
    /// `[elevation][azimuth]`, row-major.
    pub power_db: Vec<f64>,
    pub peak: DetectedTarget,
}

impl Pas {
    pub fn db(&self, elevation: usize, azimuth: usize) -> f64 {
        self.power_db[elevation * self.azimuth_deg.len() + azimuth]
    }
}

/// Monostatic per-port signature: the steering vector squared element-wise.
pub fn two_way_signature(geometry: &ArrayGeometry, dir: &FarFieldDirection) -> Vec<C64> {
    far_field_steering(geometry, dir).into_iter().map(|s| s * s).collect()
}

/// Bartlett beamforming of delay profiles with the two-way signature:
/// `P(θ, φ, τ) = |Σ_k conj(b_k(θ, φ)) x_k(τ)|²`.
pub fn padp_beamform(
    profiles: &DelayProfiles,
    geometry: &ArrayGeometry,
    elevation_deg: &[f64],
    azimuth_deg: &[f64],
    reference: PadpReference,
) -> Result<Padp> {
    if elevation_deg.is_empty() || azimuth_deg.is_empty() || profiles.n_delays() == 0 {
        return Err(Error::invalid("empty angle or delay grid"));
    }
    if profiles.n_ports() != geometry.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} delay profiles for {} array elements",
            profiles.n_ports(),
            geometry.len()
        )));
    }
    let (ne, na, nd) = (elevation_deg.len(), azimuth_deg.len(), profiles.n_delays());
    let mut dirs = Vec::with_capacity(ne * na);
    for &e in elevation_deg {
        for &a in azimuth_deg {
            dirs.push(FarFieldDirection::new(e, a)?);
        }
    }
    // [angle][delay] linear power
    let power: Vec<Vec<f64>> = dirs
        .par_iter()
        .map(|dir| {
            let b = two_way_signature(geometry, dir);
            (0..nd)
                .map(|m| {
                    let y: C64 = b.iter().zip(&profiles.profiles).map(|(bk, xk)| bk.conj() * xk[m]).sum();
                    y.norm_sqr()
                })
                .collect()
        })
        .collect();
    let reference = match reference {
        PadpReference::GlobalPeak => power.iter().flatten().cloned().fold(0.0, f64::max),
        PadpReference::UnitTarget => (geometry.len() as f64 * profiles.coherent_gain).powi(2),
    };
    let mut power_db = vec![DB_FLOOR; ne * na * nd];
    for (ang, row) in power.iter().enumerate() {
        for (m, p) in row.iter().enumerate() {
            power_db[m * ne * na + ang] = to_db(*p, reference);
        }
    }
    Ok(Padp {
        elevation_deg: elevation_deg.to_vec(),
        azimuth_deg: azimuth_deg.to_vec(),
        delays_s: profiles.delays_s.clone(),
        power_db,
    })
}

/// The angular plane of `padp` at delay index `delay`, with its peak.
pub fn pas_slice(padp: &Padp, delay: usize) -> Result<Pas> {
    if delay >= padp.delays_s.len() {
        return Err(Error::invalid(format!("delay index {delay} out of {}", padp.delays_s.len())));
    }
    let plane = padp.elevation_deg.len() * padp.azimuth_deg.len();
    let power_db = padp.power_db[delay * plane..(delay + 1) * plane].to_vec();
    let mut best = 0;
    for (i, p) in power_db.iter().enumerate() {
        if *p > power_db[best] {
            best = i;
        }
    }
    let na = padp.azimuth_deg.len();
    let delay_s = padp.delays_s[delay];
    Ok(Pas {
        peak: DetectedTarget {
            range_m: SPEED_OF_LIGHT * delay_s / 2.0,
            velocity_mps: None,
            elevation_deg: Some(padp.elevation_deg[best / na]),
            azimuth_deg: Some(padp.azimuth_deg[best % na]),
            power_db: power_db[best],
        },
        elevation_deg: padp.elevation_deg.clone(),
        azimuth_deg: padp.azimuth_deg.clone(),
        delay_s,
        power_db,
    })
}

/// PAS at an arbitrary delay, evaluated directly rather than on a padded
/// grid, so there is no scalloping loss.
#[allow(clippy::too_many_arguments)]
pub fn pas_at_delay(
    dataset: &CfrDataset,
    time_index: usize,
    window: WindowKind,
    geometry: &ArrayGeometry,
    elevation_deg: &[f64],
    azimuth_deg: &[f64],
    tau: f64,
    reference: PadpReference,
) -> Result<Pas> {
    let p = profiles_at_delay(dataset, time_index, window, tau)?;
    pas_slice(&padp_beamform(&p, geometry, elevation_deg, azimuth_deg, reference)?, 0)
}

/// Delay in `[tau0 - half_width, tau0 + half_width]` maximizing the beam
/// output towards `dir` (golden-section search).
pub fn refine_delay(
    dataset: &CfrDataset,
    time_index: usize,
    window: WindowKind,
    geometry: &ArrayGeometry,
    dir: &FarFieldDirection,
    tau0: f64,
    half_width: f64,
) -> Result<f64> {
    let b = two_way_signature(geometry, dir);
    let score = |tau: f64| -> Result<f64> {
        let p = profiles_at_delay(dataset, time_index, window, tau)?;
        let y: C64 = b.iter().zip(&p.profiles).map(|(bk, xk)| bk.conj() * xk[0]).sum();
        Ok(y.norm_sqr())
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (tau0 - half_width, tau0 + half_width);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (score(x1)?, score(x2)?);
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = score(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = score(x1)?;
        }
        if hi - lo < 1e-6 * half_width {
            break;
        }
    }
    Ok((lo + hi) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::synthesize_snapshot;
    use crate::estimation::{delay_profiles, uniform_grid};
    use crate::scenario::{presets, Quantization, SensingScenario, Snapshot, TargetState};
    use approx::assert_abs_diff_eq;

    fn scenario(targets: Vec<TargetState>) -> (SensingScenario, Snapshot) {
        let mut s = presets::adtr_drones();
        s.sweep.n_time = 2;
        s.sweep.n_freq = 64;
        s.quantization = Quantization::Ideal;
        let snap = Snapshot { label: "b".into(), targets };
        s.snapshots = vec![snap.clone()];
        (s, snap)
    }

    fn padp_for(t: TargetState, reference: PadpReference) -> (Padp, usize) {
        let (s, snap) = scenario(vec![t.clone()]);
        let d = synthesize_snapshot(&s, &snap).unwrap();
        let p = delay_profiles(&d, 0, 1, WindowKind::None).unwrap();
        let bin = p.nearest(2.0 * t.range_m / SPEED_OF_LIGHT);
        let p = p.select(&[bin]);
        let grid = uniform_grid(-89.0, 89.0, 1.0);
        (padp_beamform(&p, &s.geometry().unwrap(), &grid, &grid, reference).unwrap(), 0)
    }

    #[test]
    fn boresight_target() {
        let (padp, m) = padp_for(TargetState::far_field(10.0, 0.0, 0.0, 0.0, 0.0), PadpReference::GlobalPeak);
        let pas = pas_slice(&padp, m).unwrap();
        assert_eq!(pas.peak.elevation_deg, Some(0.0));
        assert_eq!(pas.peak.azimuth_deg, Some(0.0));
        assert_eq!(pas.peak.power_db, 0.0);
    }

    #[test]
    fn drone_one_direction() {
        // range chosen on a delay bin so the slice sees the full response
        let r = 0.5 * SPEED_OF_LIGHT * 10.0 / (64.0 * 40e6 / 63.0);
        let (padp, m) = padp_for(TargetState::far_field(r, 0.0, 50.0, -20.0, -7.0), PadpReference::UnitTarget);
        let pas = pas_slice(&padp, m).unwrap();
        assert_eq!(pas.peak.elevation_deg, Some(50.0));
        assert_eq!(pas.peak.azimuth_deg, Some(-20.0));
        assert_abs_diff_eq!(pas.peak.power_db, -7.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_tensor_is_flat_floor() {
        let p = DelayProfiles {
            delays_s: vec![0.0, 1e-8],
            profiles: vec![vec![C64::new(0.0, 0.0); 2]; 32],
            coherent_gain: 1.0,
        };
        let g = ArrayGeometry::build_upa(4, 8, 0.5, 3.5e9).unwrap();
        for r in [PadpReference::GlobalPeak, PadpReference::UnitTarget] {
            let padp = padp_beamform(&p, &g, &[-10.0, 0.0, 10.0], &[0.0, 5.0], r).unwrap();
            let pas = pas_slice(&padp, 1).unwrap();
            assert!(pas.power_db.iter().all(|&v| v == DB_FLOOR));
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let p = DelayProfiles { delays_s: vec![0.0], profiles: vec![vec![C64::new(1.0, 0.0)]; 32], coherent_gain: 1.0 };
        let g = ArrayGeometry::build_upa(4, 8, 0.5, 3.5e9).unwrap();
        assert!(padp_beamform(&p, &g, &[], &[0.0], PadpReference::GlobalPeak).is_err());
        assert!(padp_beamform(&p, &g, &[0.0], &[], PadpReference::GlobalPeak).is_err());
        assert!(pas_slice(&padp_beamform(&p, &g, &[0.0], &[0.0], PadpReference::GlobalPeak).unwrap(), 1).is_err());
    }

    #[test]
    fn refinement_recovers_off_grid_delay() {
        let (s, snap) = scenario(vec![TargetState::far_field(61.3, 0.0, 20.0, 10.0, 0.0)]);
        let d = synthesize_snapshot(&s, &snap).unwrap();
        let g = s.geometry().unwrap();
        let dir = FarFieldDirection::new(20.0, 10.0).unwrap();
        let truth = 2.0 * 61.3 / SPEED_OF_LIGHT;
        let bin = 1.0 / (4.0 * 64.0 * d.freq_step());
        let tau = refine_delay(&d, 0, WindowKind::Hanning, &g, &dir, truth + 0.4 * bin, bin).unwrap();
        assert!((tau - truth).abs() < 1e-6 * bin);
        let pas = pas_at_delay(&d, 0, WindowKind::Hanning, &g, &[20.0], &[10.0], tau, PadpReference::UnitTarget).unwrap();
        assert_abs_diff_eq!(pas.peak.power_db, 0.0, epsilon = 1e-9);
    }
}
