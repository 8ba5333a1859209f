//! Array layouts, the coordinate convention and steering-vector models.
//!
//! Coordinates: the array phase center is the origin, the array normal is +y
//! and +z points up. A far-field direction with elevation θ and azimuth φ has
//! unit propagation vector
//!
//! ```text
//! u(θ, φ) = (cos θ · sin φ,  cos θ · cos φ,  sin θ)
//! ```
//!
//! so azimuth grows from +y toward +x and elevation grows from the x–y plane
//! toward +z. Planar arrays lie in the x–z plane; linear arrays lie on the
//! x-axis, with Tx elements on the negative side of a split array.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64, SPEED_OF_LIGHT};

pub type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Grid layout an array was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    /// Uniform planar array; `rows` along z, `cols` along x.
    Upa { rows: usize, cols: usize },
    /// Uniform linear array along x.
    Ula { count: usize },
}

/// Which elements an operation runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subarray {
    All,
    Tx,
    Rx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    elements: Vec<Vec3>,
    wavelength: f64,
    spacing_wl: f64,
    layout: Layout,
    tx_mask: Vec<bool>,
    rx_mask: Vec<bool>,
}

fn check_common(spacing_wl: f64, carrier_hz: f64) -> Result<()> {
    if !(spacing_wl.is_finite() && spacing_wl > 0.0) {
        return Err(Error::invalid(format!("element spacing must be > 0, got {spacing_wl}")));
    }
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return Err(Error::invalid(format!("carrier must be > 0, got {carrier_hz}")));
    }
    Ok(())
}

/// Offset of index `i` from the center of `n` equally spaced slots, in slots.
fn centered(i: usize, n: usize) -> f64 {
    i as f64 - (n as f64 - 1.0) / 2.0
}

impl ArrayGeometry {
    /// `rows × cols` planar array in the x–z plane, element index `r * cols + c`.
    /// Every element both transmits and receives.
    pub fn build_upa(rows: usize, cols: usize, spacing_wl: f64, carrier_hz: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("UPA dimensions must be >= 1, got {rows}x{cols}")));
        }
        check_common(spacing_wl, carrier_hz)?;
        let wavelength = SPEED_OF_LIGHT / carrier_hz;
        let d = spacing_wl * wavelength;
        let elements = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| [centered(c, cols) * d, 0.0, centered(r, rows) * d]))
            .collect::<Vec<_>>();
        let k = elements.len();
        Ok(Self {
            elements,
            wavelength,
            spacing_wl,
            layout: Layout::Upa { rows, cols },
            tx_mask: vec![true; k],
            rx_mask: vec![true; k],
        })
    }

    /// Linear array on the x-axis whose first `tx_count` elements transmit and
    /// the rest receive.
    pub fn build_split_ula(count: usize, spacing_wl: f64, carrier_hz: f64, tx_count: usize) -> Result<Self> {
        if tx_count == 0 || tx_count >= count {
            return Err(Error::invalid(format!(
                "tx_count must satisfy 1 <= tx_count < count, got {tx_count} of {count}"
            )));
        }
        check_common(spacing_wl, carrier_hz)?;
        let wavelength = SPEED_OF_LIGHT / carrier_hz;
        let d = spacing_wl * wavelength;
        let elements = (0..count).map(|i| [centered(i, count) * d, 0.0, 0.0]).collect();
        Ok(Self {
            elements,
            wavelength,
            spacing_wl,
            layout: Layout::Ula { count },
            tx_mask: (0..count).map(|i| i < tx_count).collect(),
            rx_mask: (0..count).map(|i| i >= tx_count).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Vec3] {
        &self.elements
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    pub fn spacing_wl(&self) -> f64 {
        self.spacing_wl
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn tx_mask(&self) -> &[bool] {
        &self.tx_mask
    }

    pub fn rx_mask(&self) -> &[bool] {
        &self.rx_mask
    }

    /// True when Tx and Rx use disjoint sub-arrays.
    pub fn is_split(&self) -> bool {
        self.tx_mask.iter().zip(&self.rx_mask).all(|(t, r)| t != r)
    }

    /// Element indices belonging to `subset`, in element order.
    pub fn indices(&self, subset: Subarray) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| match subset {
                Subarray::All => true,
                Subarray::Tx => self.tx_mask[k],
                Subarray::Rx => self.rx_mask[k],
            })
            .collect()
    }

    /// Largest distance between any two elements.
    pub fn aperture(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.elements.iter().enumerate() {
            for b in &self.elements[i + 1..] {
                best = best.max(norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]]));
            }
        }
        best
    }

    /// Mean of the element positions in `subset`.
    pub fn phase_center(&self, subset: Subarray) -> Vec3 {
        let idx = self.indices(subset);
        let mut c = [0.0; 3];
        for &k in &idx {
            for (ci, pi) in c.iter_mut().zip(self.elements[k]) {
                *ci += pi;
            }
        }
        c.map(|v| v / idx.len() as f64)
    }
}

/// Far-field direction in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldDirection {
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
}

impl FarFieldDirection {
    pub fn new(elevation_deg: f64, azimuth_deg: f64) -> Result<Self> {
        let d = Self {
            elevation_deg,
            azimuth_deg,
        };
        d.validate()?;
        Ok(d)
    }

    pub const BORESIGHT: Self = Self {
        elevation_deg: 0.0,
        azimuth_deg: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.elevation_deg.is_finite() && (-90.0..=90.0).contains(&self.elevation_deg)) {
            return Err(Error::invalid(format!("elevation {} outside [-90, 90]", self.elevation_deg)));
        }
        if !(self.azimuth_deg.is_finite() && (-180.0..=180.0).contains(&self.azimuth_deg)) {
            return Err(Error::invalid(format!("azimuth {} outside [-180, 180]", self.azimuth_deg)));
        }
        Ok(())
    }

    pub fn unit_vector(&self) -> Vec3 {
        let (st, ct) = self.elevation_deg.to_radians().sin_cos();
        let (sp, cp) = self.azimuth_deg.to_radians().sin_cos();
        [ct * sp, ct * cp, st]
    }
}

/// A point in the array frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearFieldPoint {
    pub position: Vec3,
}

impl NearFieldPoint {
    pub fn new(position: Vec3) -> Result<Self> {
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("near-field point must be finite"));
        }
        if norm(&position) <= 0.0 {
            return Err(Error::invalid("near-field point must not sit at the origin"));
        }
        Ok(Self { position })
    }

    /// Point in the x–y plane at `range_m` from the origin, `angle_deg`
    /// measured from +y toward +x.
    pub fn from_range_angle(range_m: f64, angle_deg: f64) -> Result<Self> {
        let (s, c) = angle_deg.to_radians().sin_cos();
        Self::new([range_m * s, range_m * c, 0.0])
    }

    pub fn range(&self) -> f64 {
        norm(&self.position)
    }

    /// In-plane angle from +y toward +x, degrees.
    pub fn angle_deg(&self) -> f64 {
        self.position[0].atan2(self.position[1]).to_degrees()
    }
}

/// Plane-wave phasors `exp(j k r_k · u)` over the whole array.
pub fn far_field_steering(geometry: &ArrayGeometry, dir: &FarFieldDirection) -> Vec<C64> {
    far_field_steering_subset(geometry, dir, Subarray::All)
}

pub fn far_field_steering_subset(geometry: &ArrayGeometry, dir: &FarFieldDirection, subset: Subarray) -> Vec<C64> {
    let u = dir.unit_vector();
    let k0 = geometry.wavenumber();
    geometry
        .indices(subset)
        .into_iter()
        .map(|k| C64::from_polar(1.0, k0 * dot(&geometry.elements[k], &u)))
        .collect()
}

/// Spherical-wavefront phasors `exp(j k (d0 - d_k))` over `subset`, where
/// `d0` is the distance from the phase center to `pt` and `d_k` the distance
/// from element `k`.
pub fn near_field_phases(geometry: &ArrayGeometry, pt: &NearFieldPoint, subset: Subarray) -> Result<Vec<C64>> {
    let p = pt.position;
    let d0 = norm(&p);
    let k0 = geometry.wavenumber();
    geometry
        .indices(subset)
        .into_iter()
        .map(|k| {
            let r = geometry.elements[k];
            let dk = norm(&[p[0] - r[0], p[1] - r[1], p[2] - r[2]]);
            if dk <= 1e-12 * geometry.wavelength {
                return Err(Error::invalid(format!("point coincides with element {k}")));
            }
            // d0 - dk without cancellation: (d0² - dk²) / (d0 + dk)
            let diff = (2.0 * dot(&p, &r) - dot(&r, &r)) / (d0 + dk);
            Ok(C64::from_polar(1.0, k0 * diff))
        })
        .collect()
}
