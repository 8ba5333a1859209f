use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    None,
    #[default]
    Hanning,
}

impl FromStr for WindowKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "rect" | "rectangular" => Ok(WindowKind::None),
            "hanning" | "hann" => Ok(WindowKind::Hanning),
            other => Err(format!("unknown window '{other}' (expected none or hanning)")),
        }
    }
}

/// Symmetric taper weights; the Hanning window has zero endpoints,
/// `w[n] = 0.5 (1 - cos(2πn / (N - 1)))`.
pub fn window_weights(len: usize, kind: WindowKind) -> Vec<f64> {
    match kind {
        WindowKind::None => vec![1.0; len],
        WindowKind::Hanning if len <= 1 => vec![1.0; len],
        WindowKind::Hanning => {
            let m = (len - 1) as f64;
            (0..len).map(|n| 0.5 * (1.0 - (2.0 * PI * n as f64 / m).cos())).collect()
        }
    }
}

pub fn apply_window(v: &[C64], kind: WindowKind) -> Vec<C64> {
    v.iter().zip(window_weights(v.len(), kind)).map(|(x, w)| x * w).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn none_is_identity() {
        let v: Vec<C64> = (0..7).map(|i| C64::new(i as f64, -1.0)).collect();
        assert_eq!(apply_window(&v, WindowKind::None), v);
    }

    #[test]
    fn hanning_three() {
        let w = window_weights(3, WindowKind::Hanning);
        assert_abs_diff_eq!(w[0], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-16);
        assert_abs_diff_eq!(w[2], 0.0, epsilon = 1e-16);
        assert_eq!(window_weights(8, WindowKind::Hanning).len(), 8);
    }

    #[test]
    fn hanning_symmetric() {
        let w = window_weights(251, WindowKind::Hanning);
        for i in 0..251 {
            assert_abs_diff_eq!(w[i], w[250 - i], epsilon = 1e-15);
        }
    }

    #[test]
    fn parseval_ratio_matches_window_power() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let v: Vec<C64> = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let raw: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let win: f64 = apply_window(&v, WindowKind::Hanning).iter().map(|x| x.norm_sqr()).sum();
        let gain: f64 = window_weights(n, WindowKind::Hanning).iter().map(|w| w * w).sum::<f64>() / n as f64;
        // 0.375 for a long Hann window
        assert!((gain - 0.375).abs() < 1e-4);
        assert!((win / raw / gain - 1.0).abs() < 0.01);
    }

    #[test]
    fn parses_names() {
        assert_eq!("Hanning".parse::<WindowKind>().unwrap(), WindowKind::Hanning);
        assert_eq!("none".parse::<WindowKind>().unwrap(), WindowKind::None);
        assert!("kaiser".parse::<WindowKind>().is_err());
    }
}
