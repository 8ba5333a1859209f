//! Base-station-side processing: range–velocity maps, delay-domain profiles,
//! Bartlett beamforming into power-angular-delay profiles, and the SATR
//! near-field matched filter.

mod beamform;
mod delay;
pub mod export;
mod peaks;
mod rv_map;
mod satr;
mod window;

use serde::{Deserialize, Serialize};

pub use beamform::{pas_at_delay, pas_slice, padp_beamform, refine_delay, two_way_signature, Padp, PadpReference, Pas};
pub use delay::{delay_profiles, profiles_at_delay, DelayProfiles};
pub use peaks::{detect_peaks, find_peaks_2d, GridPeak, PeakList};
pub use rv_map::{doppler_delay_spectrum, range_velocity_map, RangeVelocityMap, Spectrum2d};
pub use satr::{joint_range_angle_satr, RangeAngleMap, Wavefront};
pub use window::{apply_window, window_weights, WindowKind};
pub use export::{Heatmap, DEFAULT_DYNAMIC_RANGE_DB};

/// Lowest dB value emitted by maps and exports.
pub const DB_FLOOR: f64 = -120.0;

/// `10 log10(power / reference)`, clamped at [`DB_FLOOR`].
pub fn to_db(power: f64, reference: f64) -> f64 {
    if !(reference > 0.0) || !(power > 0.0) {
        return DB_FLOOR;
    }
    (10.0 * (power / reference).log10()).max(DB_FLOOR)
}

/// A target read off an estimation map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedTarget {
    pub range_m: f64,
    pub velocity_mps: Option<f64>,
    pub elevation_deg: Option<f64>,
    /// ADTR azimuth, or the in-plane SATR angle.
    pub azimuth_deg: Option<f64>,
    pub power_db: f64,
}

/// Inclusive uniform grid `start, start + step, …` up to `stop`.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && stop >= start);
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + i as f64 * step).collect()
}
