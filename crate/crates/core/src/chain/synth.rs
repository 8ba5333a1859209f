use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{check_units, ApmConfig, CfrDataset, RtsUnitConfig};
use crate::scenario::Sweep;
use crate::{Error, Mode, Result, C64};

fn sweep_grids(sweep: &Sweep) -> Result<(Vec<f64>, Vec<f64>)> {
    if sweep.n_freq < 2 || !(sweep.bandwidth_hz > 0.0) {
        return Err(Error::invalid("sweep needs n_freq >= 2 and a positive bandwidth"));
    }
    let offsets = sweep.baseband_offsets();
    let absolute = offsets.iter().map(|f| sweep.carrier_hz + f).collect();
    Ok((offsets, absolute))
}

/// `exp(j 2π f' τ)` scaled by the CIR gain, over the baseband grid.
fn rts_response(rec: &super::CirRecord, offsets: &[f64], out: &mut [C64]) {
    for (o, f) in out.iter_mut().zip(offsets) {
        *o = rec.complex_gain * C64::from_polar(1.0, 2.0 * PI * f * rec.delay_s);
    }
}

/// Switched-monostatic acquisition: port `k` transmits and receives through
/// its own APM links, so
///
/// ```text
/// H_k(t_i, f_j) = Σ_n wtx[k,n] · wrx[k,n] · g_n[i] · exp(j 2π f'_j τ_n[i])
/// ```
///
/// with `g_n[i]` the stepped CIR gain (Doppler phase included). Axes are
/// `[time, frequency, port]`, port fastest.
pub fn synthesize_cfr_adtr(apm: &ApmConfig, rts_units: &[RtsUnitConfig], sweep: &Sweep) -> Result<CfrDataset> {
    if apm.mode != Mode::Adtr {
        return Err(Error::ModeMismatch {
            expected: Mode::Adtr,
            found: apm.mode,
        });
    }
    let (n_t, dt) = check_units(apm, rts_units)?;
    let (offsets, absolute) = sweep_grids(sweep)?;
    let n_f = offsets.len();
    let k = apm.type_a_count;
    let signature: Vec<Vec<C64>> = (0..rts_units.len())
        .map(|n| (0..k).map(|row| apm.weights_tx.get(row, n) * apm.weights_rx.get(row, n)).collect())
        .collect();

    let mut samples = vec![C64::new(0.0, 0.0); n_t * n_f * k];
    samples.par_chunks_mut(n_f * k).enumerate().for_each(|(i, block)| {
        let mut resp = vec![C64::new(0.0, 0.0); n_f];
        for (unit, sig) in rts_units.iter().zip(&signature) {
            rts_response(&unit.cir_sequence[i], &offsets, &mut resp);
            for (row, r) in block.chunks_exact_mut(k).zip(&resp) {
                for (h, s) in row.iter_mut().zip(sig) {
                    *h += s * r;
                }
            }
        }
    });

    let times = (0..n_t).map(|i| i as f64 * dt).collect();
    let ports = (0..k).map(|p| p as f64).collect();
    CfrDataset::new(Mode::Adtr, vec![times, absolute, ports], samples, String::new())
}

/// Dual-switch cross acquisition over the Tx and Rx sub-arrays:
///
/// ```text
/// H(t_i, k_R, k_T, f_j) = Σ_n wtx[k_T,n] · wrx[k_R,n] · g_n[i] · exp(j 2π f'_j τ_n[i])
/// ```
///
/// Axes are `[time, rx port, tx port, frequency]`, frequency fastest; the
/// port axes carry the element indices.
pub fn synthesize_cfr_satr(apm: &ApmConfig, rts_units: &[RtsUnitConfig], sweep: &Sweep) -> Result<CfrDataset> {
    if apm.mode != Mode::Satr {
        return Err(Error::ModeMismatch {
            expected: Mode::Satr,
            found: apm.mode,
        });
    }
    let (n_t, dt) = check_units(apm, rts_units)?;
    let (offsets, absolute) = sweep_grids(sweep)?;
    let n_f = offsets.len();
    let (tx, rx) = (&apm.tx_elements, &apm.rx_elements);
    let block_len = rx.len() * tx.len() * n_f;

    let mut samples = vec![C64::new(0.0, 0.0); n_t * block_len];
    samples.par_chunks_mut(block_len).enumerate().for_each(|(i, block)| {
        let mut resp = vec![C64::new(0.0, 0.0); n_f];
        for (n, unit) in rts_units.iter().enumerate() {
            rts_response(&unit.cir_sequence[i], &offsets, &mut resp);
            for (r_idx, &kr) in rx.iter().enumerate() {
                let wr = apm.weights_rx.get(kr, n);
                for (t_idx, &kt) in tx.iter().enumerate() {
                    let s = wr * apm.weights_tx.get(kt, n);
                    let start = (r_idx * tx.len() + t_idx) * n_f;
                    for (h, r) in block[start..start + n_f].iter_mut().zip(&resp) {
                        *h += s * r;
                    }
                }
            }
        }
    });

    let times = (0..n_t).map(|i| i as f64 * dt).collect();
    let rx_axis = rx.iter().map(|&k| k as f64).collect();
    let tx_axis = tx.iter().map(|&k| k as f64).collect();
    CfrDataset::new(Mode::Satr, vec![times, rx_axis, tx_axis, absolute], samples, String::new())
}

/// Adds circular complex Gaussian noise at `snr_db` relative to the mean
/// sample power. Deterministic for a given seed.
pub fn add_noise(dataset: &mut CfrDataset, snr_db: f64, seed: u64) {
    let n = dataset.samples.len();
    if n == 0 {
        return;
    }
    let power = dataset.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in &mut dataset.samples {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *s += C64::new(re, im) * sigma;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{compile_adtr, compile_satr};
    use crate::geometry::{far_field_steering, ArrayGeometry, FarFieldDirection};
    use crate::scenario::{presets, Quantization, SensingScenario, Snapshot, TargetState};
    use approx::assert_abs_diff_eq;

    fn ideal(mut s: SensingScenario) -> SensingScenario {
        s.quantization = Quantization::Ideal;
        s
    }

    fn synth(s: &SensingScenario, snap: &Snapshot) -> CfrDataset {
        match s.mode {
            Mode::Adtr => {
                let (apm, u) = compile_adtr(s, snap).unwrap();
                synthesize_cfr_adtr(&apm, &u, &s.sweep).unwrap()
            }
            Mode::Satr => {
                let (apm, u) = compile_satr(s, snap).unwrap();
                synthesize_cfr_satr(&apm, &u, &s.sweep).unwrap()
            }
        }
    }

    fn small_adtr() -> SensingScenario {
        let mut s = ideal(presets::adtr_drones());
        s.sweep.n_time = 16;
        s.sweep.n_freq = 21;
        // fixed so single-target runs share the joint time grid
        s.sweep.cir_update_interval_s = Some(2e-4);
        s
    }

    #[test]
    fn trivial_target_gives_ones() {
        let s = small_adtr();
        let (mut apm, mut units) = compile_adtr(&s, &s.snapshots[0]).unwrap();
        for w in apm.weights_tx.iter_mut().chain(apm.weights_rx.iter_mut()) {
            *w = C64::new(1.0, 0.0);
        }
        apm.type_b_groups.truncate(1);
        apm.weights_tx = super::super::WeightMatrix::zeros(32, 1);
        apm.weights_rx = super::super::WeightMatrix::zeros(32, 1);
        for k in 0..32 {
            apm.weights_tx.set(k, 0, C64::new(1.0, 0.0));
            apm.weights_rx.set(k, 0, C64::new(1.0, 0.0));
        }
        units.truncate(1);
        for r in &mut units[0].cir_sequence {
            r.delay_s = 0.0;
            r.complex_gain = C64::new(1.0, 0.0);
            r.doppler_hz = 0.0;
        }
        let d = synthesize_cfr_adtr(&apm, &units, &s.sweep).unwrap();
        assert_eq!(d.dims(), vec![16, 21, 32]);
        assert!(d.samples.iter().all(|v| *v == C64::new(1.0, 0.0)));
    }

    #[test]
    fn superposition_adtr() {
        let s = small_adtr();
        let snap = &s.snapshots[0];
        let joint = synth(&s, snap);
        let mut sum = vec![C64::new(0.0, 0.0); joint.samples.len()];
        for t in &snap.targets {
            let one = Snapshot {
                label: "x".into(),
                targets: vec![t.clone()],
            };
            for (a, b) in sum.iter_mut().zip(&synth(&s, &one).samples) {
                *a += b;
            }
        }
        let scale = joint.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in joint.samples.iter().zip(&sum) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn doppler_and_delay_purity() {
        let mut s = small_adtr();
        s.snapshots[0].targets.truncate(1);
        let snap = s.snapshots[0].clone();
        let (_, units) = compile_adtr(&s, &snap).unwrap();
        let (nu, dt, tau) = (units[0].cir_sequence[0].doppler_hz, units[0].update_interval_s, units[0].cir_sequence[0].delay_s);
        let d = synth(&s, &snap);
        let step_t = 2.0 * PI * nu * dt;
        let step_f = 2.0 * PI * s.sweep.freq_step() * tau;
        let wrap = |p: f64| (p + PI).rem_euclid(2.0 * PI) - PI;
        for port in [0, 17, 31] {
            for j in [0, 10, 20] {
                let seq: Vec<C64> = (0..16).map(|i| d.adtr_sample(i, j, port)).collect();
                for w in seq.windows(2) {
                    assert_abs_diff_eq!(w[1].norm(), w[0].norm(), epsilon = 1e-12);
                    assert!(wrap((w[1] * w[0].conj()).arg() - step_t).abs() < 1e-10);
                }
            }
            let seq: Vec<C64> = (0..21).map(|j| d.adtr_sample(0, j, port)).collect();
            for w in seq.windows(2) {
                assert!(wrap((w[1] * w[0].conj()).arg() - step_f).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adtr_signature_is_squared_steering() {
        let mut s = small_adtr();
        s.snapshots[0].targets.truncate(1);
        let d = synth(&s, &s.snapshots[0].clone());
        let g = ArrayGeometry::build_upa(4, 8, 0.5, 3.5e9).unwrap();
        let a = far_field_steering(&g, &FarFieldDirection::new(50.0, -20.0).unwrap());
        let h0 = d.adtr_sample(0, 0, 0) / (a[0] * a[0]);
        for k in 0..32 {
            let expect = a[k] * a[k] * h0;
            assert!((d.adtr_sample(0, 0, k) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn satr_equidistant_pair() {
        let mut s = ideal(presets::satr_drone());
        s.array = crate::scenario::ArraySpec::Ula {
            count: 2,
            tx_count: 1,
            spacing_wl: 0.5,
        };
        s.sweep.n_freq = 11;
        s.snapshots[0].targets[0] = TargetState::near_field(2.0, 0.0, 0.0, 0.0);
        let d = synth(&s, &s.snapshots[0].clone());
        assert_eq!(d.dims(), vec![1, 1, 1, 11]);
        // both path legs have equal length: the single cross entry equals the
        // on-axis response at every frequency
        let tau = 2.0 * 2.0 / crate::SPEED_OF_LIGHT;
        let g = crate::geometry::ArrayGeometry::build_split_ula(2, 0.5, 3.5e9, 1).unwrap();
        let lambda = g.wavelength();
        let p = 2.0 * PI / lambda * (2.0 - (4.0 + lambda * lambda / 16.0).sqrt());
        for (j, f) in s.sweep.baseband_offsets().iter().enumerate() {
            let expect = C64::from_polar(1.0, 2.0 * p + 2.0 * PI * f * tau);
            assert!((d.satr_sample(0, 0, 0, j) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn satr_rank_one_per_frequency() {
        let s = presets::satr_drone();
        let d = synth(&s, &s.snapshots[0]);
        assert_eq!(d.dims(), vec![1, 8, 8, 1001]);
        for j in [0, 500, 1000] {
            // rank one ⇔ every 2×2 minor vanishes
            let h = |r: usize, t: usize| d.satr_sample(0, r, t, j);
            for r in 1..8 {
                for t in 1..8 {
                    let minor = h(0, 0) * h(r, t) - h(0, t) * h(r, 0);
                    assert!(minor.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn satr_superposition() {
        let mut s = ideal(presets::satr_drone());
        s.sweep.n_freq = 33;
        s.snapshots[0].targets.push(TargetState::near_field(4.5, 0.0, -20.0, -6.0));
        let joint = synth(&s, &s.snapshots[0].clone());
        let mut sum = vec![C64::new(0.0, 0.0); joint.samples.len()];
        for t in s.snapshots[0].targets.clone() {
            let one = Snapshot {
                label: "x".into(),
                targets: vec![t],
            };
            for (a, b) in sum.iter_mut().zip(&synth(&s, &one).samples) {
                *a += b;
            }
        }
        for (a, b) in joint.samples.iter().zip(&sum) {
            assert!((a - b).norm() <= 1e-12 * 2.0);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = small_adtr();
        let (apm, mut units) = compile_adtr(&s, &s.snapshots[0]).unwrap();
        units.pop();
        assert!(matches!(synthesize_cfr_adtr(&apm, &units, &s.sweep), Err(Error::DimensionMismatch(_))));
        let (apm, mut units) = compile_adtr(&s, &s.snapshots[0]).unwrap();
        units[1].cir_sequence.pop();
        assert!(matches!(synthesize_cfr_adtr(&apm, &units, &s.sweep), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn noise_is_seeded() {
        let s = small_adtr();
        let clean = synth(&s, &s.snapshots[0]);
        let (mut a, mut b, mut c) = (clean.clone(), clean.clone(), clean.clone());
        add_noise(&mut a, 20.0, 7);
        add_noise(&mut b, 20.0, 7);
        add_noise(&mut c, 20.0, 8);
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
        let p_sig: f64 = clean.samples.iter().map(|v| v.norm_sqr()).sum();
        let p_noise: f64 = a.samples.iter().zip(&clean.samples).map(|(x, y)| (x - y).norm_sqr()).sum();
        let snr = 10.0 * (p_sig / p_noise).log10();
        assert!((snr - 20.0).abs() < 0.2, "{snr}");
    }
}
