use std::f64::consts::PI;

use rustfft::FftPlanner;

use super::{window_weights, WindowKind};
use crate::chain::CfrDataset;
use crate::{Error, Mode, Result, C64};

/// Per-port delay-domain responses of one ADTR time sample.
#[derive(Debug, Clone)]
pub struct DelayProfiles {
    pub delays_s: Vec<f64>,
    /// `profiles[k][m]`: port `k` at `delays_s[m]`.
    pub profiles: Vec<Vec<C64>>,
    /// `Σ w_j`, the response of a unit, zero-delay, flat spectrum at τ = 0.
    pub coherent_gain: f64,
}

impl DelayProfiles {
    pub fn n_ports(&self) -> usize {
        self.profiles.len()
    }

    pub fn n_delays(&self) -> usize {
        self.delays_s.len()
    }

    /// Index of the delay closest to `tau`.
    pub fn nearest(&self, tau: f64) -> usize {
        let mut best = 0;
        for (i, d) in self.delays_s.iter().enumerate() {
            if (d - tau).abs() < (self.delays_s[best] - tau).abs() {
                best = i;
            }
        }
        best
    }

    /// Keeps only the listed delay indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            delays_s: indices.iter().map(|&i| self.delays_s[i]).collect(),
            profiles: self.profiles.iter().map(|p| indices.iter().map(|&i| p[i]).collect()).collect(),
            coherent_gain: self.coherent_gain,
        }
    }
}

fn check_adtr(dataset: &CfrDataset, time_index: usize) -> Result<()> {
    if dataset.mode != Mode::Adtr {
        return Err(Error::ModeMismatch { expected: Mode::Adtr, found: dataset.mode });
    }
    if time_index >= dataset.n_time() {
        return Err(Error::invalid(format!("time index {time_index} out of {}", dataset.n_time())));
    }
    if dataset.n_freq() < 2 {
        return Err(Error::invalid("delay processing needs >= 2 frequency points"));
    }
    Ok(())
}

/// `x_k(τ_m) = Σ_j w_j X_k(t_i, f_j) exp(-j2π f'_j τ_m)` on the padded grid
/// `τ_m = m / (pad · N_f · Δf)`, matched to the synthesis sign.
pub fn delay_profiles(dataset: &CfrDataset, time_index: usize, pad: usize, window: WindowKind) -> Result<DelayProfiles> {
    check_adtr(dataset, time_index)?;
    if pad == 0 {
        return Err(Error::invalid("zero-padding factor must be >= 1"));
    }
    let nf = dataset.n_freq();
    let m = nf * pad;
    let df = dataset.freq_step();
    let b = dataset.bandwidth_hz();
    let w = window_weights(nf, window);
    let delays_s: Vec<f64> = (0..m).map(|i| i as f64 / (m as f64 * df)).collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let profiles = (0..dataset.n_ports())
        .map(|k| {
            let mut buf = vec![C64::new(0.0, 0.0); m];
            for j in 0..nf {
                buf[j] = dataset.adtr_sample(time_index, j, k) * w[j];
            }
            fft.process(&mut buf);
            // f'_0 = -B/2 contributes exp(jπBτ) to every bin
            for (x, tau) in buf.iter_mut().zip(&delays_s) {
                *x *= C64::from_polar(1.0, PI * b * tau);
            }
            buf
        })
        .collect();
    Ok(DelayProfiles { delays_s, profiles, coherent_gain: w.iter().sum() })
}

/// Direct evaluation of every port's delay response at one continuous delay.
pub fn profiles_at_delay(dataset: &CfrDataset, time_index: usize, window: WindowKind, tau: f64) -> Result<DelayProfiles> {
    check_adtr(dataset, time_index)?;
    let nf = dataset.n_freq();
    let w = window_weights(nf, window);
    let kernel: Vec<C64> = dataset
        .baseband_offsets()
        .iter()
        .zip(&w)
        .map(|(f, wj)| C64::from_polar(*wj, -2.0 * PI * f * tau))
        .collect();
    let profiles = (0..dataset.n_ports())
        .map(|k| vec![(0..nf).map(|j| dataset.adtr_sample(time_index, j, k) * kernel[j]).sum()])
        .collect();
    Ok(DelayProfiles { delays_s: vec![tau], profiles, coherent_gain: w.iter().sum() })
}
