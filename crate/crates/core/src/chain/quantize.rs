use std::f64::consts::PI;

use super::ApmConfig;
use crate::scenario::Quantization;
use crate::C64;

/// Rounds the phase to the nearest multiple of `2π / 2^phase_bits` and the
/// amplitude (in dB) to the nearest multiple of `amp_step_db`. A step of 0
/// leaves the amplitude untouched; zero weights stay zero.
pub fn quantize_weight(w: C64, phase_bits: u32, amp_step_db: f64) -> C64 {
    let amp = w.norm();
    if amp == 0.0 {
        return w;
    }
    let levels = (1u64 << phase_bits) as f64;
    let step = 2.0 * PI / levels;
    let idx = (w.arg() / step).round().rem_euclid(levels);
    let amp = if amp_step_db > 0.0 {
        let db = (20.0 * amp.log10() / amp_step_db).round() * amp_step_db;
        10f64.powf(db / 20.0)
    } else {
        amp
    };
    C64::from_polar(amp, idx * step)
}

pub fn quantize_apm(cfg: &ApmConfig, phase_bits: u32, amp_step_db: f64) -> ApmConfig {
    let mut out = cfg.clone();
    for w in out.weights_tx.iter_mut().chain(out.weights_rx.iter_mut()) {
        *w = quantize_weight(*w, phase_bits, amp_step_db);
    }
    out.quantization = Quantization::Lattice { phase_bits, amp_step_db };
    out
}
