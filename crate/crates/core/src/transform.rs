//! Centered discrete Fourier transforms with continuum scaling.
//!
//! Forward: `F(ω_m) = Σ_n x_n e^{−iω_m t_n} · Δt` with `t_n = (n − K/2)Δt`
//! and `ω_m = (m − K/2)·2π/(KΔt)`. Inverse: `x_n = Σ_m F_m e^{iω_m t_n} · Δω/2π`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Angular-frequency step of the grid conjugate to `count` samples at `step`.
pub fn conjugate_step(count: usize, step: f64) -> f64 {
    TAU / (count as f64 * step)
}

fn check_pow2(count: usize) -> Result<()> {
    if count == 0 || !count.is_power_of_two() {
        return Err(Error::Size(format!("transform length {count} is not a power of two")));
    }
    Ok(())
}

/// `(−1)^{m + n + K/2}` style sign pattern that turns the zero-based FFT
/// into the centered transform above.
#[inline]
fn centered_sign(index: usize) -> f64 {
    if index % 2 == 0 { 1.0 } else { -1.0 }
}

fn centered(samples: &[C64], step_out: f64, inverse: bool) -> Vec<C64> {
    let k = samples.len();
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(k) } else { planner.plan_fft_forward(k) };
    let mut buf: Vec<C64> = samples.iter().enumerate().map(|(n, &x)| x * centered_sign(n)).collect();
    fft.process(&mut buf);
    // e^{∓iπK/2} = (−1)^{K/2} for even K; K = 1 needs no correction.
    let global = if k >= 2 { centered_sign(k / 2) } else { 1.0 };
    buf.iter_mut().enumerate().for_each(|(m, v)| *v *= centered_sign(m) * global * step_out);
    buf
}

/// Forward transform of centered time samples at spacing `step` (fs).
pub fn dft_time_to_freq(samples: &[C64], step: f64) -> Result<Vec<C64>> {
    check_pow2(samples.len())?;
    Ok(centered(samples, step, false))
}

/// Inverse of [`dft_time_to_freq`]; `time_step` is the original sample spacing.
pub fn dft_freq_to_time(spectrum: &[C64], time_step: f64) -> Result<Vec<C64>> {
    check_pow2(spectrum.len())?;
    let domega = conjugate_step(spectrum.len(), time_step);
    Ok(centered(spectrum, domega / TAU, true))
}

/// Cached forward/inverse plans for repeated transforms of one arbitrary
/// length. Unscaled, zero-based bin ordering (bin `j` ↔ `e^{−2πijn/L}`).
#[derive(Clone)]
pub struct RowFft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl RowFft {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        RowFft { forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len), len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    /// Inverse transform including the `1/L` factor.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    /// Signed angular frequency of bin `j` for samples at `step`.
    pub fn bin_omega(&self, j: usize, step: f64) -> f64 {
        let signed = if j <= self.len / 2 { j as f64 } else { j as f64 - self.len as f64 };
        signed * TAU / (self.len as f64 * step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct(samples: &[C64], step: f64) -> Vec<C64> {
        let k = samples.len();
        let dw = conjugate_step(k, step);
        (0..k)
            .map(|m| {
                let w = (m as f64 - (k / 2) as f64) * dw;
                samples
                    .iter()
                    .enumerate()
                    .map(|(n, &x)| {
                        let t = (n as f64 - (k / 2) as f64) * step;
                        x * C64::from_polar(step, -w * t)
                    })
                    .sum()
            })
            .collect()
    }

    fn random(k: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn matches_direct_sum() {
        for &k in &[8usize, 16, 64] {
            let x = random(k, k as u64);
            let fast = dft_time_to_freq(&x, 0.37).unwrap();
            let slow = direct(&x, 0.37);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_gives_dc_spike() {
        let k = 32;
        let step = 0.25;
        let x = vec![C64::new(1.0, 0.0); k];
        let f = dft_time_to_freq(&x, step).unwrap();
        for (m, v) in f.iter().enumerate() {
            if m == k / 2 {
                assert!((v - C64::new(k as f64 * step, 0.0)).norm() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip() {
        let x = random(256, 7);
        let back = dft_freq_to_time(&dft_time_to_freq(&x, 0.8).unwrap(), 0.8).unwrap();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn gaussian_matches_continuous_transform() {
        // ∫ e^{−t²/2s²} e^{−iωt} dt = s√(2π) e^{−ω²s²/2}
        let (k, step, s) = (256usize, 0.25, 3.0);
        let x: Vec<C64> = (0..k)
            .map(|n| {
                let t = (n as f64 - (k / 2) as f64) * step;
                C64::new((-t * t / (2.0 * s * s)).exp(), 0.0)
            })
            .collect();
        let f = dft_time_to_freq(&x, step).unwrap();
        let dw = conjugate_step(k, step);
        let peak = s * TAU.sqrt();
        assert!(((f[k / 2].re - peak) / peak).abs() < 1e-6);
        for m in (k / 2 - 10)..(k / 2 + 10) {
            let w = (m as f64 - (k / 2) as f64) * dw;
            let exact = peak * (-w * w * s * s / 2.0).exp();
            assert!((f[m] - C64::new(exact, 0.0)).norm() < 1e-6 * peak);
        }
    }

    #[test]
    fn parseval() {
        let x = random(512, 3);
        let step = 0.6;
        let f = dft_time_to_freq(&x, step).unwrap();
        let et: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>() * step;
        let ew: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() * conjugate_step(512, step) / TAU;
        assert!(((et - ew) / et).abs() < 1e-10);
    }

    #[test]
    fn non_power_of_two_is_size_error() {
        let x = vec![C64::new(0.0, 0.0); 12];
        assert!(matches!(dft_time_to_freq(&x, 1.0), Err(Error::Size(_))));
        assert!(matches!(dft_freq_to_time(&x, 1.0), Err(Error::Size(_))));
    }

    #[test]
    fn row_fft_round_trip_odd_length() {
        let plan = RowFft::new(4000);
        let x = random(4000, 11);
        let mut buf = x.clone();
        plan.forward(&mut buf);
        plan.inverse(&mut buf);
        let err = x.iter().zip(&buf).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        assert!(plan.bin_omega(3999, 1.0) < 0.0);
    }
}
