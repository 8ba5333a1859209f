use std::f64::consts::PI;

use rayon::prelude::*;

use super::{find_peaks_2d, to_db, window_weights, DetectedTarget, WindowKind};
use crate::chain::CfrDataset;
use crate::geometry::{far_field_steering_subset, near_field_phases, ArrayGeometry, FarFieldDirection, NearFieldPoint, Subarray};
use crate::{Error, Mode, Result, C64, SPEED_OF_LIGHT};

/// Spatial model of the candidate echo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Wavefront {
    /// Exact spherical phases relative to the phase center.
    #[default]
    NearField,
    /// Plane-wave steering, ignoring curvature across the aperture.
    FarField,
}

/// Joint range–angle power map in dB (peak at 0 dB).
#[derive(Debug, Clone)]
pub struct RangeAngleMap {
    pub range_m: Vec<f64>,
    pub angle_deg: Vec<f64>,
    /// `[range][angle]`, row-major.
    pub power_db: Vec<f64>,
    pub peak: DetectedTarget,
}

impl RangeAngleMap {
    pub fn db(&self, range: usize, angle: usize) -> f64 {
        self.power_db[range * self.angle_deg.len() + angle]
    }

    /// Up to `n` separated peaks, strongest first.
    pub fn peaks(&self, n: usize, guard: usize) -> Vec<DetectedTarget> {
        find_peaks_2d(&self.power_db, self.range_m.len(), self.angle_deg.len(), false, false, n, guard)
            .into_iter()
            .map(|p| DetectedTarget {
                range_m: self.range_m[p.row],
                velocity_mps: None,
                elevation_deg: None,
                azimuth_deg: Some(self.angle_deg[p.col]),
                power_db: p.value,
            })
            .collect()
    }
}

/// Matched filter over candidate `(R, θ)`:
/// `P = |Σ w_f conj(rx_kR · tx_kT · exp(j2π f' τ(R))) X(kR, kT, f)|²`
/// at time sample 0. The frequency sum is done once per range, leaving a
/// `K_R × K_T` contraction per angle.
pub fn joint_range_angle_satr(
    dataset: &CfrDataset,
    geometry: &ArrayGeometry,
    range_grid: &[f64],
    angle_grid: &[f64],
    window: WindowKind,
    wavefront: Wavefront,
) -> Result<RangeAngleMap> {
    if dataset.mode != Mode::Satr {
        return Err(Error::ModeMismatch { expected: Mode::Satr, found: dataset.mode });
    }
    if range_grid.is_empty() || angle_grid.is_empty() {
        return Err(Error::invalid("empty range or angle grid"));
    }
    if range_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::invalid("range grid values must be positive"));
    }
    if angle_grid.iter().any(|a| !(a.is_finite() && (-90.0..=90.0).contains(a))) {
        return Err(Error::invalid("angle grid values must lie in [-90, 90] degrees"));
    }
    let dims = dataset.dims();
    let (kr, kt, nf) = (dims[1], dims[2], dims[3]);
    let rx_idx = geometry.indices(Subarray::Rx);
    let tx_idx = geometry.indices(Subarray::Tx);
    if rx_idx.len() != kr || tx_idx.len() != kt {
        return Err(Error::DimensionMismatch(format!(
            "dataset is {kr}×{kt}, geometry has {} Rx and {} Tx elements",
            rx_idx.len(),
            tx_idx.len()
        )));
    }
    let w = window_weights(nf, window);
    let offsets = dataset.baseband_offsets();

    // per-angle conjugated spatial models; None when a candidate sits on an element
    let models: Vec<Vec<Option<(Vec<C64>, Vec<C64>)>>> = range_grid
        .par_iter()
        .map(|&r| {
            angle_grid
                .iter()
                .map(|&a| spatial_model(geometry, r, a, wavefront))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let power: Vec<f64> = range_grid
        .par_iter()
        .zip(models.par_iter())
        .flat_map_iter(|(&r, row)| {
            let tau = 2.0 * r / SPEED_OF_LIGHT;
            let kernel: Vec<C64> = offsets.iter().zip(&w).map(|(f, wj)| C64::from_polar(*wj, -2.0 * PI * f * tau)).collect();
            let mut y = vec![C64::new(0.0, 0.0); kr * kt];
            for a in 0..kr {
                for b in 0..kt {
                    y[a * kt + b] = (0..nf).map(|j| dataset.satr_sample(0, a, b, j) * kernel[j]).sum();
                }
            }
            row.iter()
                .map(|m| match m {
                    None => 0.0,
                    Some((rx, tx)) => {
                        let mut acc = C64::new(0.0, 0.0);
                        for a in 0..kr {
                            let inner: C64 = (0..kt).map(|b| tx[b] * y[a * kt + b]).sum();
                            acc += rx[a] * inner;
                        }
                        acc.norm_sqr()
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let reference = power.iter().cloned().fold(0.0, f64::max);
    let power_db: Vec<f64> = power.iter().map(|p| to_db(*p, reference)).collect();
    let mut best = 0;
    for (i, p) in power.iter().enumerate() {
        if *p > power[best] {
            best = i;
        }
    }
    let na = angle_grid.len();
    Ok(RangeAngleMap {
        peak: DetectedTarget {
            range_m: range_grid[best / na],
            velocity_mps: None,
            elevation_deg: None,
            azimuth_deg: Some(angle_grid[best % na]),
            power_db: power_db[best],
        },
        range_m: range_grid.to_vec(),
        angle_deg: angle_grid.to_vec(),
        power_db,
    })
}

fn spatial_model(geometry: &ArrayGeometry, range: f64, angle_deg: f64, wavefront: Wavefront) -> Result<Option<(Vec<C64>, Vec<C64>)>> {
    let conj = |v: Vec<C64>| v.into_iter().map(|x| x.conj()).collect::<Vec<_>>();
    match wavefront {
        Wavefront::NearField => {
            let pt = NearFieldPoint::from_range_angle(range, angle_deg)?;
            match (near_field_phases(geometry, &pt, Subarray::Rx), near_field_phases(geometry, &pt, Subarray::Tx)) {
                (Ok(rx), Ok(tx)) => Ok(Some((conj(rx), conj(tx)))),
                _ => Ok(None),
            }
        }
        Wavefront::FarField => {
            let dir = FarFieldDirection::new(0.0, angle_deg)?;
            Ok(Some((
                conj(far_field_steering_subset(geometry, &dir, Subarray::Rx)),
                conj(far_field_steering_subset(geometry, &dir, Subarray::Tx)),
            )))
        }
    }
}
