//! Coincidence model for a single photon interfering with a double-pulse
//! local oscillator, and simulation of rotated delay scans.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, ScanGrid};
use crate::state::{SpectralAmplitude, SpectralDensityMatrix};

/// Default threshold on `S` below which the double pulse is considered dark.
pub const DARK_PORT_THRESHOLD: f64 = 1e-6;

/// Source, local oscillator and detector parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    /// Photon probability per pulse from the source.
    pub f: f64,
    /// Photon probability per pulse in the local oscillator.
    pub l: f64,
    /// Detector quantum efficiency.
    pub eta: f64,
    pub rep_rate_hz: f64,
    /// Accidental coincidence probability per pulse.
    pub background: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams { f: 0.05, l: 0.1, eta: 0.5, rep_rate_hz: 300e3, background: 0.0 }
    }
}

impl ExperimentParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("f", self.f), ("l", self.l), ("eta", self.eta), ("background", self.background)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParam(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if !(self.rep_rate_hz.is_finite() && self.rep_rate_hz > 0.0) {
            return Err(Error::InvalidParam(format!("rep_rate_hz = {} must be > 0", self.rep_rate_hz)));
        }
        Ok(())
    }

    /// `f·l·η²/2`, the coincidence probability per pulse at `S(1 − Q) = 1`.
    pub fn pair_scale(&self) -> f64 {
        self.f * self.l * self.eta * self.eta / 2.0
    }

    /// Expected counts per point for `S(1 − Q) = 1` and no background.
    pub fn count_scale(&self, exposure_s: f64) -> f64 {
        self.pair_scale() * self.rep_rate_hz * exposure_s
    }
}

/// Michelson output normalization `S(Δt) = 1 + Re ∫|A(ω)|² e^{iωΔt} dω`.
pub fn michelson_s(master: &SpectralAmplitude, dt: f64) -> f64 {
    let g = &master.grid;
    let fringe: f64 = master
        .values
        .iter()
        .enumerate()
        .map(|(k, a)| a.norm_sqr() * (g.omega(k) * dt).cos())
        .sum();
    1.0 + fringe * g.step
}

/// Complex fringe `∫|A(ω)|² e^{−iωτ} dω`, the part of `S − 1` that lives in
/// the same sideband as `ρ̃`.
pub fn s_sideband(master: &SpectralAmplitude, tau: f64) -> C64 {
    let g = &master.grid;
    master
        .values
        .iter()
        .enumerate()
        .map(|(k, a)| C64::from_polar(a.norm_sqr(), -g.omega(k) * tau))
        .sum::<C64>()
        * g.step
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoPulsePair {
    pub master: SpectralAmplitude,
    pub t1: f64,
    pub t2: f64,
    /// `φ_LO(ω)`.
    pub amplitude: SpectralAmplitude,
    pub s_value: f64,
}

/// `φ_LO(ω) = A(ω)(e^{−iωt₁} + e^{−iωt₂})/√(2S(t₂ − t₁))`.
pub fn lo_amplitude(master: &SpectralAmplitude, t1: f64, t2: f64) -> Result<LoPulsePair> {
    lo_amplitude_with_threshold(master, t1, t2, DARK_PORT_THRESHOLD)
}

pub fn lo_amplitude_with_threshold(
    master: &SpectralAmplitude,
    t1: f64,
    t2: f64,
    threshold: f64,
) -> Result<LoPulsePair> {
    master.ensure_normalized("master amplitude")?;
    let s = michelson_s(master, t2 - t1);
    if s < threshold {
        return Err(Error::DarkPort(s));
    }
    let g = master.grid;
    let scale = 1.0 / (2.0 * s).sqrt();
    let values = master
        .values
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let w = g.omega(k);
            a * (C64::from_polar(1.0, -w * t1) + C64::from_polar(1.0, -w * t2)) * scale
        })
        .collect();
    Ok(LoPulsePair {
        master: master.clone(),
        t1,
        t2,
        amplitude: SpectralAmplitude::new(g, values)?,
        s_value: s,
    })
}

/// `A*(ω₁) ρ(ω₁, ω₂) A(ω₂)`.
pub fn shaped_matrix(master: &SpectralAmplitude, rho: &SpectralDensityMatrix) -> Result<Array2<C64>> {
    master.grid.ensure_matches(&rho.grid)?;
    let a = &master.values;
    Ok(Array2::from_shape_fn(rho.values.dim(), |(i, j)| a[i].conj() * rho.values[[i, j]] * a[j]))
}

/// `ρ̃(t₁, t₂) = ∬ dω₁dω₂ e^{iω₁t₁ − iω₂t₂} A*(ω₁) ρ(ω₁, ω₂) A(ω₂)` by direct
/// quadrature.
pub fn rho_tilde(master: &SpectralAmplitude, rho: &SpectralDensityMatrix, t1: f64, t2: f64) -> Result<C64> {
    let shaped = shaped_matrix(master, rho)?;
    Ok(rho_tilde_shaped(&master.grid, &shaped, t1, t2))
}

fn rho_tilde_shaped(grid: &FrequencyGrid, shaped: &Array2<C64>, t1: f64, t2: f64) -> C64 {
    let k = grid.count;
    let left: Vec<C64> = (0..k).map(|i| C64::from_polar(1.0, grid.omega(i) * t1)).collect();
    let right: Vec<C64> = (0..k).map(|j| C64::from_polar(1.0, -grid.omega(j) * t2)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..k {
        let row: C64 = (0..k).map(|j| shaped[[i, j]] * right[j]).sum();
        acc += left[i] * row;
    }
    acc * grid.step * grid.step
}

/// Hong-Ou-Mandel dip profile `D(t) = ρ̃(t, t)`.
pub fn dip_function(master: &SpectralAmplitude, rho: &SpectralDensityMatrix, t: f64) -> Result<f64> {
    Ok(rho_tilde(master, rho, t, t)?.re)
}

/// Overlap `Q = ∬ φ*_LO(ω) ρ(ω, ω′) φ_LO(ω′)` as a direct quadratic form.
pub fn overlap_q(lo: &LoPulsePair, rho: &SpectralDensityMatrix) -> Result<f64> {
    lo.amplitude.grid.ensure_matches(&rho.grid)?;
    let phi = &lo.amplitude.values;
    let k = phi.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..k {
        let row: C64 = (0..k).map(|j| rho.values[[i, j]] * phi[j]).sum();
        acc += phi[i].conj() * row;
    }
    let step = rho.grid.step;
    Ok(acc.re * step * step)
}

/// The same overlap assembled from the dip and the two-time transform,
/// `[D(t₁) + D(t₂) + 2 Re ρ̃(t₁, t₂)] / 2S(t₂ − t₁)`.
pub fn overlap_q_decomposed(lo: &LoPulsePair, rho: &SpectralDensityMatrix) -> Result<f64> {
    let shaped = shaped_matrix(&lo.master, rho)?;
    let g = &lo.master.grid;
    let d1 = rho_tilde_shaped(g, &shaped, lo.t1, lo.t1).re;
    let d2 = rho_tilde_shaped(g, &shaped, lo.t2, lo.t2).re;
    let cross = rho_tilde_shaped(g, &shaped, lo.t1, lo.t2).re;
    Ok((d1 + d2 + 2.0 * cross) / (2.0 * lo.s_value))
}

/// `p_c = f·l·S·(η²/2)·(1 − Q) + background`.
pub fn coincidence_from_overlap(s_value: f64, q: f64, params: &ExperimentParams) -> f64 {
    params.pair_scale() * s_value * (1.0 - q).max(0.0) + params.background
}

pub fn coincidence_probability(lo: &LoPulsePair, rho: &SpectralDensityMatrix, params: &ExperimentParams) -> Result<f64> {
    params.validate()?;
    let q = overlap_q(lo, rho)?;
    Ok(coincidence_from_overlap(lo.s_value, q, params))
}

/// Batched evaluation of `ρ̃`, `D` and `S` on whole scan rows.
///
/// Along a row of constant `T` the double sum collapses onto the `2K − 1`
/// distinct values of `(ω₁ + ω₂)/2`, so a row costs `O(K²)` once plus
/// `O(K)` per delay.
#[derive(Clone, Debug)]
pub struct TwoTimeEvaluator {
    grid: FrequencyGrid,
    shaped: Array2<C64>,
    /// `Σ_{k−l=j} a_kl` indexed by `j + K − 1`.
    diff_sums: Vec<C64>,
    intensity: Vec<f64>,
}

impl TwoTimeEvaluator {
    pub fn new(master: &SpectralAmplitude, rho: &SpectralDensityMatrix) -> Result<Self> {
        let shaped = shaped_matrix(master, rho)?;
        let k = master.grid.count;
        let mut diff_sums = vec![C64::new(0.0, 0.0); 2 * k - 1];
        for i in 0..k {
            for j in 0..k {
                diff_sums[i + k - 1 - j] += shaped[[i, j]];
            }
        }
        Ok(TwoTimeEvaluator { grid: master.grid, shaped, diff_sums, intensity: master.intensity() })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// `D(t)`.
    pub fn dip(&self, t: f64) -> f64 {
        let k = self.grid.count;
        let z = C64::from_polar(1.0, self.grid.step * t);
        // Σ_j d_j z^j for j = −(K−1)..(K−1), by Horner from the top.
        let mut acc = C64::new(0.0, 0.0);
        for d in self.diff_sums.iter().rev() {
            acc = acc * z + d;
        }
        let lead = C64::from_polar(1.0, -((k - 1) as f64) * self.grid.step * t);
        (acc * lead).re * self.grid.step * self.grid.step
    }

    /// `S(τ)`.
    pub fn s(&self, tau: f64) -> f64 {
        let fringe: f64 = self
            .intensity
            .iter()
            .enumerate()
            .map(|(k, i)| i * (self.grid.omega(k) * tau).cos())
            .sum();
        1.0 + fringe * self.grid.step
    }

    /// `ρ̃(T − τ/2, T + τ/2)` for every `τ` in `taus`.
    pub fn row(&self, t: f64, taus: &[f64]) -> Vec<C64> {
        let k = self.grid.count;
        let step = self.grid.step;
        // c_m = Σ_{i+j=m} a_ij e^{i(ω_i − ω_j)T}, where ω_i − ω_j = (2i − m)·step.
        let phase: Vec<C64> = (0..2 * k - 1)
            .map(|idx| C64::from_polar(1.0, (idx as f64 - (k - 1) as f64) * step * t))
            .collect();
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * k - 1];
        for (m, c) in coeffs.iter_mut().enumerate() {
            let lo = m.saturating_sub(k - 1);
            let hi = m.min(k - 1);
            let mut acc = C64::new(0.0, 0.0);
            for i in lo..=hi {
                let j = m - i;
                acc += self.shaped[[i, j]] * phase[2 * i + k - 1 - m];
            }
            *c = acc;
        }
        // Ω_m = center + (m − K)·step/2.
        let base = self.grid.center - k as f64 * step / 2.0;
        taus.iter()
            .map(|&tau| {
                let z = C64::from_polar(1.0, -step * tau / 2.0);
                let mut acc = C64::new(0.0, 0.0);
                for c in coeffs.iter().rev() {
                    acc = acc * z + c;
                }
                acc * C64::from_polar(step * step, -base * tau)
            })
            .collect()
    }
}

/// Coincidence counts on a rotated delay grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Interferogram {
    pub scan: ScanGrid,
    /// Row-major, T-major then τ. Integral when `seed` is set, otherwise
    /// the noiseless expectation.
    pub counts: Vec<f64>,
    pub exposure_s: f64,
    pub params: ExperimentParams,
    pub seed: Option<u64>,
}

impl Interferogram {
    pub fn new(scan: ScanGrid, counts: Vec<f64>, exposure_s: f64, params: ExperimentParams, seed: Option<u64>) -> Result<Self> {
        scan.validate()?;
        if counts.len() != scan.len() {
            return Err(Error::Size(format!("{} counts for a {}-point scan", counts.len(), scan.len())));
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidParam("counts must be finite and non-negative".into()));
        }
        Ok(Interferogram { scan, counts, exposure_s, params, seed })
    }

    pub fn row(&self, m: usize) -> &[f64] {
        let n = self.scan.tau_count;
        &self.counts[m * n..(m + 1) * n]
    }

    pub fn at(&self, m: usize, n: usize) -> f64 {
        self.counts[self.scan.index(m, n)]
    }

    /// `N = 2 / (f·l·η²/2 · rep_rate · exposure)` from the recorded parameters.
    pub fn nominal_n(&self) -> f64 {
        2.0 / self.params.count_scale(self.exposure_s)
    }

    pub fn mean_counts(&self) -> f64 {
        self.counts.iter().sum::<f64>() / self.counts.len() as f64
    }
}

/// Noiseless expected counts `μ = p_c · rep_rate · exposure` at every scan point.
pub fn expected_counts(
    master: &SpectralAmplitude,
    rho: &SpectralDensityMatrix,
    scan: &ScanGrid,
    params: &ExperimentParams,
    exposure_s: f64,
) -> Result<Vec<f64>> {
    params.validate()?;
    scan.validate()?;
    if !(exposure_s.is_finite() && exposure_s > 0.0) {
        return Err(Error::InvalidParam(format!("exposure {exposure_s} s must be > 0")));
    }
    master.ensure_normalized("master amplitude")?;
    scan.check_sampling(&master.grid)?;
    let eval = TwoTimeEvaluator::new(master, rho)?;
    let taus = scan.taus();
    let s_row: Vec<f64> = taus.iter().map(|&tau| eval.s(tau)).collect();
    let scale = params.rep_rate_hz * exposure_s;
    let pair = params.pair_scale();
    let rows: Vec<Vec<f64>> = (0..scan.t_count)
        .into_par_iter()
        .map(|m| {
            let t = scan.t(m);
            let cross = eval.row(t, &taus);
            taus.iter()
                .enumerate()
                .map(|(n, &tau)| {
                    let d1 = eval.dip(t - tau / 2.0);
                    let d2 = eval.dip(t + tau / 2.0);
                    // S(1 − Q) = S − (D₁ + D₂)/2 − Re ρ̃
                    let visible = (s_row[n] - (d1 + d2) / 2.0 - cross[n].re).max(0.0);
                    (pair * visible + params.background) * scale
                })
                .collect()
        })
        .collect();
    Ok(rows.concat())
}

/// Poisson draw per point from a ChaCha stream keyed by `(seed, index)`,
/// independent of evaluation order.
pub fn poisson_counts(expected: &[f64], seed: u64) -> Vec<f64> {
    expected
        .par_iter()
        .enumerate()
        .map(|(idx, &mu)| {
            if mu <= 0.0 {
                return 0.0;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            Poisson::new(mu).map(|p| p.sample(&mut rng)).unwrap_or(mu.round())
        })
        .collect()
}

/// Simulates a full scan. Without a seed the stored counts are the
/// noiseless expectation values.
pub fn simulate_scan(
    master: &SpectralAmplitude,
    rho: &SpectralDensityMatrix,
    scan: &ScanGrid,
    params: &ExperimentParams,
    exposure_s: f64,
    seed: Option<u64>,
) -> Result<Interferogram> {
    let expected = expected_counts(master, rho, scan, params, exposure_s)?;
    let counts = match seed {
        Some(s) => poisson_counts(&expected, s),
        None => expected,
    };
    Ok(Interferogram { scan: *scan, counts, exposure_s, params: *params, seed })
}
