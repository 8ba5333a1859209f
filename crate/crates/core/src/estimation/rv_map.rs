use rustfft::FftPlanner;

use super::{to_db, window_weights, WindowKind};
use crate::chain::CfrDataset;
use crate::{Error, Mode, Result, C64, SPEED_OF_LIGHT};

/// Zero-padded 2D forward transform of a row-major `rows × cols` slice.
#[derive(Debug, Clone)]
pub struct Spectrum2d {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl Spectrum2d {
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }
}

/// Windows each axis, zero-pads to `pad_t · rows` by `pad_f · cols` and
/// applies a forward DFT along both axes. Row `m` holds Doppler
/// `m / (M_t Δt)` (mod the Doppler span), column `m` holds delay
/// `m / (M_f Δf)`.
pub fn doppler_delay_spectrum(
    slice: &[C64],
    rows: usize,
    cols: usize,
    pad_t: usize,
    pad_f: usize,
    window: WindowKind,
) -> Result<Spectrum2d> {
    if rows == 0 || cols == 0 || slice.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!("{} samples for a {rows}×{cols} slice", slice.len())));
    }
    if pad_t == 0 || pad_f == 0 {
        return Err(Error::invalid("zero-padding factors must be >= 1"));
    }
    let (mr, mc) = (rows * pad_t, cols * pad_f);
    let wt = window_weights(rows, if rows > 1 { window } else { WindowKind::None });
    let wf = window_weights(cols, window);
    let mut data = vec![C64::new(0.0, 0.0); mr * mc];
    for r in 0..rows {
        for c in 0..cols {
            data[r * mc + c] = slice[r * cols + c] * (wt[r] * wf[c]);
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    // only the first `rows` rows are non-zero before the column pass
    planner.plan_fft_forward(mc).process(&mut data[..rows * mc]);
    if mr > 1 {
        let fft = planner.plan_fft_forward(mr);
        let mut col = vec![C64::new(0.0, 0.0); mr];
        for c in 0..mc {
            for r in 0..mr {
                col[r] = data[r * mc + c];
            }
            fft.process(&mut col);
            for r in 0..mr {
                data[r * mc + c] = col[r];
            }
        }
    }
    Ok(Spectrum2d { rows: mr, cols: mc, data })
}

/// Range–velocity power map in dB, rows ordered by ascending velocity.
#[derive(Debug, Clone)]
pub struct RangeVelocityMap {
    pub range_axis_m: Vec<f64>,
    pub velocity_axis_mps: Vec<f64>,
    /// `velocity × range`, row-major.
    pub power_db: Vec<f64>,
    /// False when the dataset has a single time sample.
    pub velocity_estimable: bool,
    pub port: usize,
}

impl RangeVelocityMap {
    pub fn rows(&self) -> usize {
        self.velocity_axis_mps.len()
    }

    pub fn cols(&self) -> usize {
        self.range_axis_m.len()
    }

    pub fn db(&self, row: usize, col: usize) -> f64 {
        self.power_db[row * self.cols() + col]
    }

    pub fn range_bin_m(&self) -> f64 {
        self.range_axis_m.get(1).copied().unwrap_or(0.0)
    }

    pub fn velocity_bin_mps(&self) -> f64 {
        match self.velocity_axis_mps.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }
}

/// Range–velocity map of one ADTR port. Delay bins map to `R = cτ/2` and
/// Doppler bins to `v = λν/2`; the velocity axis spans `(-v_max, v_max]`.
/// With one time sample the map has a single zero-velocity row and
/// `velocity_estimable` is false.
pub fn range_velocity_map(
    dataset: &CfrDataset,
    port: usize,
    pad_t: usize,
    pad_f: usize,
    window: WindowKind,
) -> Result<RangeVelocityMap> {
    if dataset.mode != Mode::Adtr {
        return Err(Error::ModeMismatch { expected: Mode::Adtr, found: dataset.mode });
    }
    if port >= dataset.n_ports() {
        return Err(Error::invalid(format!("port {port} out of {} ports", dataset.n_ports())));
    }
    let (nt, nf) = (dataset.n_time(), dataset.n_freq());
    if nf < 2 {
        return Err(Error::invalid("range processing needs >= 2 frequency points"));
    }
    let pad_t = if nt > 1 { pad_t } else { 1 };
    let spec = doppler_delay_spectrum(&dataset.port_slice(port), nt, nf, pad_t, pad_f, window)?;
    let lambda = SPEED_OF_LIGHT / dataset.carrier_hz();
    let df = dataset.freq_step();
    let range_axis_m: Vec<f64> = (0..spec.cols)
        .map(|m| SPEED_OF_LIGHT * (m as f64 / (spec.cols as f64 * df)) / 2.0)
        .collect();

    let (order, velocity_axis_mps): (Vec<usize>, Vec<f64>) = match dataset.time_step() {
        Some(dt) => {
            let mt = spec.rows;
            let half = mt / 2;
            (half + 1..mt)
                .chain(0..=half)
                .map(|m| {
                    let signed = if m > half { m as f64 - mt as f64 } else { m as f64 };
                    (m, lambda * (signed / (mt as f64 * dt)) / 2.0)
                })
                .unzip()
        }
        None => (vec![0], vec![0.0]),
    };

    let peak = spec.data.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
    let mut power_db = Vec::with_capacity(order.len() * spec.cols);
    for &m in &order {
        for c in 0..spec.cols {
            power_db.push(to_db(spec.get(m, c).norm_sqr(), peak));
        }
    }
    Ok(RangeVelocityMap {
        range_axis_m,
        velocity_axis_mps,
        power_db,
        velocity_estimable: nt > 1,
        port,
    })
}
