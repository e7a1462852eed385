//! Inversion of a coincidence interferogram to the spectral density matrix.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`demodulate`]: every row of constant `T` is transformed along `τ` and
//!    only the `e^{−iω₀τ}` carrier sideband is kept. This rejects the
//!    baseband dip terms `D(t₁) + D(t₂)`, the background and the mirror
//!    sideband. What remains is `C·[s(τ) − ρ̃(T, τ)]/2`, where `s` is the
//!    complex fringe of `S` and `C` the count scale.
//! 2. [`estimate_s_and_n`]: rows far from `T = 0` contain no `ρ̃`; their mean
//!    is the `S` fringe, and its amplitude against the known master spectrum
//!    fixes `N = 2/C`.
//! 3. [`extract_rho_time`]: `ρ̃ = s − N·d` on the rotated grid.
//! 4. [`to_frequency`]: the rotated two-dimensional transform gives
//!    `A*(ω₁) ρ(ω₁, ω₂) A(ω₂)` on the frequency grid.
//! 5. [`deconvolve_amplitude`]: division by `A*(ω₁)A(ω₂)` above an amplitude
//!    floor, followed by hermitization, optional PSD projection and trace
//!    normalization.

use std::f64::consts::{PI, TAU};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::forward::{s_sideband, Interferogram};
use crate::grid::{FrequencyGrid, ScanGrid};
use crate::linalg;
use crate::state::{SpectralAmplitude, SpectralDensityMatrix};
use crate::transform::RowFft;

/// Fraction of the sideband half-width used by the smooth window edges.
const TAPER_FRACTION: f64 = 1.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionConfig {
    /// Sideband center, rad/fs. Defaults to the master grid center.
    pub carrier: Option<f64>,
    /// Sideband half-width, rad/fs. Defaults to 1.5× the master grid
    /// half-span, clipped to the Nyquist band.
    pub sideband_halfwidth: Option<f64>,
    /// Fraction of rows at each end of the `T` axis used as the far region.
    pub far_fraction: f64,
    /// Division threshold relative to `max |A|`.
    pub amp_floor: f64,
    pub psd_project: bool,
    /// Subtract the fringe computed from the master spectrum rather than the
    /// noisy far-row average.
    pub model_fringe: bool,
    /// Before division, drop eigencomponents of `A*ρA` that do not exceed
    /// the magnitude of its most negative eigenvalue. Only applies together
    /// with `psd_project`.
    pub noise_threshold: bool,
    /// Suppress the two-time function where its local power does not rise
    /// above the far-row noise floor.
    pub time_gate: bool,
    /// Largest excess spread between far rows, relative to the squared
    /// fringe peak, before the scan is declared too short.
    pub far_tolerance: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            carrier: None,
            sideband_halfwidth: None,
            far_fraction: 0.15,
            amp_floor: 0.1,
            psd_project: true,
            model_fringe: true,
            noise_threshold: true,
            time_gate: true,
            far_tolerance: 1e-3,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.far_fraction > 0.0 && self.far_fraction < 0.5) {
            return Err(Error::Config(format!("far_fraction = {} must lie in (0, 0.5)", self.far_fraction)));
        }
        if !(self.amp_floor > 0.0 && self.amp_floor < 1.0) {
            return Err(Error::Config(format!("amp_floor = {} must lie in (0, 1)", self.amp_floor)));
        }
        if !(self.far_tolerance > 0.0) {
            return Err(Error::Config(format!("far_tolerance = {} must be > 0", self.far_tolerance)));
        }
        for (name, v) in [("carrier", self.carrier), ("sideband_halfwidth", self.sideband_halfwidth)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!("{name} = {v} must be > 0")));
                }
            }
        }
        Ok(())
    }

    /// Sideband window `(carrier, half-width)` for `scan` and a master on `grid`.
    pub fn sideband(&self, grid: &FrequencyGrid, scan: &ScanGrid) -> Result<(f64, f64)> {
        self.validate()?;
        let carrier = self.carrier.unwrap_or(grid.center);
        let nyquist = scan.tau_nyquist();
        let halfwidth = match self.sideband_halfwidth {
            Some(h) => h,
            None => (1.5 * grid.half_span()).min(nyquist - carrier).min(0.9 * carrier),
        };
        if !(halfwidth > 0.0) || carrier + halfwidth > nyquist {
            return Err(Error::Config(format!(
                "sideband {carrier:.4} ± {halfwidth:.4} rad/fs exceeds the Nyquist frequency {nyquist:.4} rad/fs"
            )));
        }
        if carrier - halfwidth <= 0.0 {
            return Err(Error::Config(format!(
                "sideband {carrier:.4} ± {halfwidth:.4} rad/fs reaches zero frequency"
            )));
        }
        Ok((carrier, halfwidth))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    /// Normalization `N`, inverse counts.
    pub n_estimate: f64,
    /// Constant background, counts per point.
    pub background_estimate: f64,
    /// RMS of `N·d − s` over the far rows, in units of the fringe peak.
    pub residual_rms: f64,
    /// Fraction of grid frequencies below the amplitude floor.
    pub masked_fraction: f64,
    /// Smallest eigenvalue of the trace-normalized estimate before PSD
    /// projection.
    pub min_eigenvalue_raw: f64,
    /// Rows used at each end of the `T` axis.
    pub far_rows: usize,
}

/// Complex field sampled on a rotated scan grid, rows of constant `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotatedField {
    pub scan: ScanGrid,
    /// `t_count × tau_count`.
    pub values: Array2<C64>,
}

impl RotatedField {
    pub fn zeros(scan: ScanGrid) -> Self {
        RotatedField { scan, values: Array2::zeros((scan.t_count, scan.tau_count)) }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `S`-fringe profile along `τ`, in units where its peak is one.
#[derive(Clone, Debug, PartialEq)]
pub struct SProfile {
    pub values: Vec<C64>,
}

/// C∞ step rising from 0 at `x ≤ 0` to 1 at `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Window weight at distance `offset` from the sideband center.
fn sideband_weight(offset: f64, halfwidth: f64) -> f64 {
    let taper = TAPER_FRACTION * halfwidth;
    let flat = halfwidth - taper;
    let d = offset.abs();
    if d <= flat {
        1.0
    } else {
        1.0 - smooth_step((d - flat) / taper)
    }
}

/// Band-pass along `τ` around `−carrier`.
struct SidebandFilter {
    plan: RowFft,
    weights: Vec<f64>,
}

impl SidebandFilter {
    fn new(scan: &ScanGrid, carrier: f64, halfwidth: f64) -> Self {
        let plan = RowFft::new(scan.tau_count);
        let weights = (0..scan.tau_count)
            .map(|j| sideband_weight(plan.bin_omega(j, scan.tau_step) + carrier, halfwidth))
            .collect();
        SidebandFilter { plan, weights }
    }

    fn apply(&self, buf: &mut [C64]) {
        self.plan.forward(buf);
        buf.iter_mut().zip(&self.weights).for_each(|(v, w)| *v *= *w);
        self.plan.inverse(buf);
    }
}

/// Keeps the `e^{−iω₀τ}` sideband of each `T` row. The window is flat
/// within two thirds of `halfwidth` and rolls off smoothly to zero at
/// `halfwidth`.
pub fn demodulate(interferogram: &Interferogram, carrier: f64, halfwidth: f64) -> Result<RotatedField> {
    let scan = interferogram.scan;
    if carrier + halfwidth > scan.tau_nyquist() || carrier - halfwidth <= 0.0 || halfwidth <= 0.0 {
        return Err(Error::Config(format!(
            "sideband {carrier:.4} ± {halfwidth:.4} rad/fs does not fit in (0, {:.4})",
            scan.tau_nyquist()
        )));
    }
    let filter = SidebandFilter::new(&scan, carrier, halfwidth);
    let rows: Vec<Vec<C64>> = (0..scan.t_count)
        .into_par_iter()
        .map(|m| {
            let mut buf: Vec<C64> = interferogram.row(m).iter().map(|&c| C64::new(c, 0.0)).collect();
            filter.apply(&mut buf);
            buf
        })
        .collect();
    let values = Array2::from_shape_vec((scan.t_count, scan.tau_count), rows.concat())
        .map_err(|e| Error::Size(e.to_string()))?;
    Ok(RotatedField { scan, values })
}

fn far_row_indices(t_count: usize, far_fraction: f64) -> Result<Vec<usize>> {
    let per_end = ((far_fraction * t_count as f64).floor() as usize).max(1);
    if 2 * per_end >= t_count {
        return Err(Error::ScanTooShort(format!(
            "{t_count} rows leave no central region with {per_end} far rows at each end"
        )));
    }
    Ok((0..per_end).chain(t_count - per_end..t_count).collect())
}

/// Estimates the `S` fringe profile from the far rows, the normalization
/// `N`, the constant background, and the far-row subtraction residual.
pub fn estimate_s_and_n(
    demodulated: &RotatedField,
    interferogram: &Interferogram,
    master: &SpectralAmplitude,
    config: &ReconstructionConfig,
) -> Result<(SProfile, ReconstructionReport)> {
    config.validate()?;
    let scan = demodulated.scan;
    let far = far_row_indices(scan.t_count, config.far_fraction)?;
    let n_tau = scan.tau_count;
    let mut mean = vec![C64::new(0.0, 0.0); n_tau];
    for &m in &far {
        for (acc, v) in mean.iter_mut().zip(demodulated.values.row(m)) {
            *acc += v;
        }
    }
    let inv = 1.0 / far.len() as f64;
    mean.iter_mut().for_each(|v| *v *= inv);

    let peak = mean.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::DegenerateState("far rows carry no carrier fringe".into()));
    }

    // Far rows must agree with each other up to noise. The noise level is
    // read off the samples where the fringe has died out.
    let (mut inside, mut n_inside, mut outside, mut n_outside) = (0.0, 0usize, 0.0, 0usize);
    for &m in &far {
        for (n, v) in demodulated.values.row(m).iter().enumerate() {
            let dev = (v - mean[n]).norm_sqr();
            let level = mean[n].norm();
            if level >= 0.1 * peak {
                inside += dev;
                n_inside += 1;
            } else if level < 0.01 * peak {
                outside += dev;
                n_outside += 1;
            }
        }
    }
    let noise = if n_outside > 0 { outside / n_outside as f64 } else { 0.0 };
    // Shot noise alone scatters the inside mean by about noise·√(2/n), with n
    // counting independent samples: the sideband window keeps a fraction
    // 2h/(2π/Δτ) of the row bandwidth. Allow six of those on top of the
    // tolerance.
    let (carrier, halfwidth) = config.sideband(&master.grid, &scan)?;
    let independent = (n_inside as f64 * (halfwidth * scan.tau_step / PI).min(1.0)).max(1.0);
    let slack = 6.0 * noise * (2.0 / independent).sqrt() / (peak * peak);
    let excess = (inside / n_inside.max(1) as f64 - noise) / (peak * peak) - slack;
    if excess > config.far_tolerance {
        return Err(Error::ScanTooShort(format!(
            "far rows differ by {excess:.3e} of the squared fringe peak (limit {:.1e})",
            config.far_tolerance
        )));
    }

    // d_far = (C/2)·s(τ) with s(τ) = ∫|A|² e^{−iωτ} dω known from the master,
    // passed through the same sideband window as the data.
    let mut model: Vec<C64> = (0..n_tau).map(|n| s_sideband(master, scan.tau(n))).collect();
    SidebandFilter::new(&scan, carrier, halfwidth).apply(&mut model);
    let num: C64 = model.iter().zip(&mean).map(|(s, d)| s.conj() * d).sum();
    let den: f64 = model.iter().map(|s| s.norm_sqr()).sum();
    let half_scale = num.re / den;
    if !(half_scale > 0.0) {
        return Err(Error::DegenerateState(format!("fringe amplitude {half_scale:e} is not positive")));
    }
    let n_estimate = 1.0 / half_scale;
    let scale = 2.0 * half_scale;

    let profile: Vec<C64> =
        if config.model_fringe { model.clone() } else { mean.iter().map(|v| v * n_estimate).collect() };

    let mut residual = 0.0;
    for &m in &far {
        for (n, v) in demodulated.values.row(m).iter().enumerate() {
            residual += (v * n_estimate - profile[n]).norm_sqr();
        }
    }
    let residual_rms = (residual / (far.len() * n_tau) as f64).sqrt();

    // Floor left after removing C·S(τ), taken from the far-row quarter whose
    // delays t₁, t₂ both lie farthest from zero, clear of the dip stripes.
    let mut points: Vec<(f64, f64)> = far
        .iter()
        .flat_map(|&m| {
            let model = &model;
            interferogram.row(m).iter().enumerate().map(move |(n, &c)| {
                let (t1, t2) = scan.delays(m, n);
                (t1.abs().min(t2.abs()), c - scale * (1.0 + model[n].re))
            })
        })
        .collect();
    points.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut floor: Vec<f64> = points[..points.len().div_ceil(4)].iter().map(|p| p.1).collect();
    floor.sort_by(f64::total_cmp);
    let background_estimate = floor[floor.len() / 2];

    let report = ReconstructionReport {
        n_estimate,
        background_estimate,
        residual_rms,
        masked_fraction: 0.0,
        min_eigenvalue_raw: 0.0,
        far_rows: far.len() / 2,
    };
    Ok((SProfile { values: profile }, report))
}

/// Half-widths of the local power average along `τ` and `T`, fs.
const GATE_TAU_HALFWIDTH: f64 = 40.0;
const GATE_T_HALFWIDTH: f64 = 20.0;

/// Multiplies `field` by `max(0, 1 − σ²/P)` where `P` is the local mean
/// power over ±40 fs in `τ` and ±20 fs in `T` (at least one sample each
/// way), then smooths the gate the same way.
/// Returns the fraction of points left with a nonzero gate.
pub fn gate_noise(field: &mut RotatedField, noise_variance: f64) -> f64 {
    let (nt, ntau) = field.values.dim();
    if !(noise_variance > 0.0) {
        return 1.0;
    }
    let w = ((GATE_TAU_HALFWIDTH / field.scan.tau_step).ceil() as usize).max(1);
    let r = ((GATE_T_HALFWIDTH / field.scan.t_step).ceil() as usize).max(1);
    let power = field.values.mapv(|v| v.norm_sqr());
    let local = box_mean(&power, r, w);
    let raw = local.mapv(|p| if p > 0.0 { (1.0 - noise_variance / p).max(0.0) } else { 0.0 });
    let gate = box_mean(&raw, r, w);
    let kept = gate.iter().filter(|&&g| g > 0.0).count() as f64 / (nt * ntau) as f64;
    field.values.zip_mut_with(&gate, |v, g| *v *= *g);
    kept
}

/// Mean over a `(2·rows + 1) × (2·cols + 1)` box, truncated at the edges.
fn box_mean(x: &Array2<f64>, rows: usize, cols: usize) -> Array2<f64> {
    let (nr, nc) = x.dim();
    let mut along = Array2::<f64>::zeros((nr, nc));
    for r in 0..nr {
        let row = x.row(r);
        let mut prefix = vec![0.0; nc + 1];
        for c in 0..nc {
            prefix[c + 1] = prefix[c] + row[c];
        }
        for c in 0..nc {
            let (lo, hi) = (c.saturating_sub(cols), (c + cols + 1).min(nc));
            along[[r, c]] = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
        }
    }
    Array2::from_shape_fn((nr, nc), |(r, c)| {
        let (lo, hi) = (r.saturating_sub(rows), (r + rows + 1).min(nr));
        (lo..hi).map(|k| along[[k, c]]).sum::<f64>() / (hi - lo) as f64
    })
}

/// `ρ̃(T, τ) = s(τ) − N·d(T, τ)`.
pub fn extract_rho_time(demodulated: &RotatedField, s_profile: &SProfile, report: &ReconstructionReport) -> RotatedField {
    let n = report.n_estimate;
    let mut out = demodulated.clone();
    for mut row in out.values.rows_mut() {
        row.iter_mut().zip(&s_profile.values).for_each(|(v, s)| *v = s - *v * n);
    }
    out
}

/// Evaluates `(1/4π²) ∬ dt₁dt₂ e^{−iω₁t₁ + iω₂t₂} ρ̃(t₁, t₂)` on `grid × grid`.
///
/// In rotated coordinates the kernel is `e^{iΩτ − iδT}` with
/// `Ω = (ω₁ + ω₂)/2`, `δ = ω₁ − ω₂` and unit Jacobian, so the sum over `τ`
/// is taken once per distinct `Ω` and the sum over `T` once per entry.
pub fn to_frequency(field: &RotatedField, grid: &FrequencyGrid) -> Result<Array2<C64>> {
    let scan = field.scan;
    if grid.max_abs_omega() >= scan.tau_nyquist() {
        return Err(Error::Resolution(format!(
            "frequency grid reaches {:.4} rad/fs beyond the τ Nyquist frequency {:.4} rad/fs",
            grid.max_abs_omega(),
            scan.tau_nyquist()
        )));
    }
    let k = grid.count;
    let step = grid.step;
    let base = grid.center - k as f64 * step / 2.0;
    let taus = scan.taus();
    let lift: Vec<C64> = taus.iter().map(|&tau| C64::from_polar(1.0, base * tau)).collect();
    let ratio: Vec<C64> = taus.iter().map(|&tau| C64::from_polar(1.0, step * tau / 2.0)).collect();

    // partial[m][s] = Σ_n e^{iΩ_s τ_n} ρ̃(T_m, τ_n), Ω_s = base + s·step/2.
    let partial: Vec<Vec<C64>> = (0..scan.t_count)
        .into_par_iter()
        .map(|m| {
            let mut p: Vec<C64> = field.values.row(m).iter().zip(&lift).map(|(v, l)| v * l).collect();
            let mut out = Vec::with_capacity(2 * k - 1);
            for _ in 0..2 * k - 1 {
                out.push(p.iter().sum());
                p.iter_mut().zip(&ratio).for_each(|(v, r)| *v *= r);
            }
            out
        })
        .collect();

    let weight = scan.tau_step * scan.t_step / (TAU * TAU);
    let ts = scan.ts();
    // shift[m][j + K − 1] = e^{−i j·step·T_m}
    let shift: Vec<Vec<C64>> = ts
        .iter()
        .map(|&t| (0..2 * k - 1).map(|idx| C64::from_polar(1.0, -((idx as f64) - (k - 1) as f64) * step * t)).collect())
        .collect();
    let mut out = Array2::<C64>::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            let s = i + j;
            let d = i + k - 1 - j;
            let acc: C64 = (0..scan.t_count).map(|m| partial[m][s] * shift[m][d]).sum();
            out[[i, j]] = acc * weight;
        }
    }
    Ok(out)
}

/// Inverse of [`to_frequency`] by direct quadrature over the frequency grid:
/// `ρ̃(t₁, t₂) = ∬ dω₁dω₂ e^{iω₁t₁ − iω₂t₂} M(ω₁, ω₂)` on the scan points.
pub fn to_time(matrix: &Array2<C64>, grid: &FrequencyGrid, scan: &ScanGrid) -> Result<RotatedField> {
    let k = grid.count;
    if matrix.dim() != (k, k) {
        return Err(Error::Size(format!("matrix is {:?}, grid needs {k} × {k}", matrix.dim())));
    }
    let grid_rho = SpectralDensityMatrix::new(*grid, matrix.clone())?;
    let flat = SpectralAmplitude::new(*grid, vec![C64::new(1.0, 0.0); k])?;
    let eval = crate::forward::TwoTimeEvaluator::new(&flat, &grid_rho)?;
    let taus = scan.taus();
    let rows: Vec<Vec<C64>> = (0..scan.t_count).into_par_iter().map(|m| eval.row(scan.t(m), &taus)).collect();
    let values = Array2::from_shape_vec((scan.t_count, scan.tau_count), rows.concat())
        .map_err(|e| Error::Size(e.to_string()))?;
    Ok(RotatedField { scan: *scan, values })
}

/// The rotated transform on its native lattice: `Ω_p = p·2π/(N_τΔτ)` and
/// `δ_q = q·2π/(N_TΔT)` with signed FFT ordering. Exactly invertible.
#[derive(Clone, Debug, PartialEq)]
pub struct RotatedSpectrum {
    pub scan: ScanGrid,
    /// `t_count × tau_count`, rows indexed by `δ_q`, columns by `Ω_p`.
    pub values: Array2<C64>,
}

impl RotatedSpectrum {
    pub fn omega_sum(&self, p: usize) -> f64 {
        RowFft::new(self.scan.tau_count).bin_omega(p, self.scan.tau_step)
    }

    pub fn omega_diff(&self, q: usize) -> f64 {
        RowFft::new(self.scan.t_count).bin_omega(q, self.scan.t_step)
    }
}

/// Native-lattice version of [`to_frequency`] via FFTs along both axes.
pub fn rotated_fft(field: &RotatedField) -> RotatedSpectrum {
    let scan = field.scan;
    let (nt, ntau) = (scan.t_count, scan.tau_count);
    let tau_plan = RowFft::new(ntau);
    let t_plan = RowFft::new(nt);
    let (tau0, t0) = (scan.tau(0), scan.t(0));
    let mut values = field.values.clone();
    for mut row in values.rows_mut() {
        let mut buf = row.to_vec();
        // Σ_n x_n e^{+iΩ_p τ_n}: conjugate, forward FFT, conjugate back.
        buf.iter_mut().for_each(|v| *v = v.conj());
        tau_plan.forward(&mut buf);
        for (p, v) in buf.iter_mut().enumerate() {
            *v = v.conj() * C64::from_polar(1.0, tau_plan.bin_omega(p, scan.tau_step) * tau0);
        }
        row.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }
    for mut col in values.columns_mut() {
        let mut buf = col.to_vec();
        t_plan.forward(&mut buf);
        for (q, v) in buf.iter_mut().enumerate() {
            *v *= C64::from_polar(1.0, -t_plan.bin_omega(q, scan.t_step) * t0);
        }
        col.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }
    let weight = scan.tau_step * scan.t_step / (TAU * TAU);
    values.mapv_inplace(|v| v * weight);
    RotatedSpectrum { scan, values }
}

pub fn inverse_rotated_fft(spectrum: &RotatedSpectrum) -> RotatedField {
    let scan = spectrum.scan;
    let (nt, ntau) = (scan.t_count, scan.tau_count);
    let tau_plan = RowFft::new(ntau);
    let t_plan = RowFft::new(nt);
    let (tau0, t0) = (scan.tau(0), scan.t(0));
    let weight = scan.tau_step * scan.t_step / (TAU * TAU);
    let mut values = spectrum.values.mapv(|v| v / weight);
    for mut col in values.columns_mut() {
        let mut buf = col.to_vec();
        for (q, v) in buf.iter_mut().enumerate() {
            *v *= C64::from_polar(1.0, t_plan.bin_omega(q, scan.t_step) * t0);
        }
        t_plan.inverse(&mut buf);
        col.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }
    for mut row in values.rows_mut() {
        let mut buf = row.to_vec();
        for (p, v) in buf.iter_mut().enumerate() {
            *v = (*v * C64::from_polar(1.0, -tau_plan.bin_omega(p, scan.tau_step) * tau0)).conj();
        }
        tau_plan.inverse(&mut buf);
        buf.iter_mut().for_each(|v| *v = v.conj());
        row.iter_mut().zip(buf).for_each(|(d, s)| *d = s);
    }
    RotatedField { scan, values }
}

/// Mask of grid frequencies with `|A| ≥ amp_floor·max|A|`.
pub fn amplitude_mask(master: &SpectralAmplitude, amp_floor: f64) -> Vec<bool> {
    let cut = amp_floor * master.max_abs();
    master.values.iter().map(|a| a.norm() >= cut).collect()
}

/// Divides `A*(ω₁) ρ A(ω₂)` by the master amplitude on the masked support.
/// Returns the density matrix, the masked fraction and the smallest
/// eigenvalue before projection.
pub fn deconvolve_amplitude(
    freq_matrix: &Array2<C64>,
    master: &SpectralAmplitude,
    config: &ReconstructionConfig,
) -> Result<(SpectralDensityMatrix, f64, f64)> {
    config.validate()?;
    master.ensure_normalized("master amplitude")?;
    let k = master.grid.count;
    if freq_matrix.dim() != (k, k) {
        return Err(Error::GridMismatch(format!("matrix is {:?}, master grid has {k} points", freq_matrix.dim())));
    }
    let mask = amplitude_mask(master, config.amp_floor);
    let masked_fraction = mask.iter().filter(|&&m| !m).count() as f64 / k as f64;
    if masked_fraction > 0.9 {
        return Err(Error::InsufficientBandwidth(masked_fraction));
    }
    let a = &master.values;
    let divide = |m: &Array2<C64>| {
        Array2::from_shape_fn((k, k), |(i, j)| {
            if mask[i] && mask[j] {
                m[[i, j]] / (a[i].conj() * a[j])
            } else {
                C64::new(0.0, 0.0)
            }
        })
    };
    let raw = SpectralDensityMatrix::new(master.grid, divide(freq_matrix))?.with_mask(mask.clone())?.hermitize().normalized()?;
    let min_eig = raw.min_eigenvalue()?;
    let rho = match (config.psd_project, config.noise_threshold) {
        (true, true) => {
            // A*ρA is congruent to ρ, so positivity carries over and the noise
            // there is not yet amplified by the division.
            let on_mask = Array2::from_shape_fn((k, k), |(i, j)| {
                if mask[i] && mask[j] { freq_matrix[[i, j]] } else { C64::new(0.0, 0.0) }
            });
            let (filtered, kept) = linalg::mirror_threshold(&linalg::hermitize(&on_mask)?)?;
            if kept == 0 {
                return Err(Error::DegenerateState("no eigencomponent rises above the noise edge".into()));
            }
            SpectralDensityMatrix::new(master.grid, divide(&filtered))?.with_mask(mask)?.hermitize().project_psd()?
        }
        (true, false) => raw.project_psd()?,
        (false, _) => raw,
    };
    Ok((rho, masked_fraction, min_eig))
}

/// Full pipeline from interferogram to density matrix.
pub fn reconstruct(
    interferogram: &Interferogram,
    master: &SpectralAmplitude,
    config: &ReconstructionConfig,
) -> Result<(SpectralDensityMatrix, ReconstructionReport)> {
    let (carrier, halfwidth) = config.sideband(&master.grid, &interferogram.scan).map_err(Error::at(Stage::Demodulate))?;
    let demod = demodulate(interferogram, carrier, halfwidth).map_err(Error::at(Stage::Demodulate))?;
    let (profile, mut report) =
        estimate_s_and_n(&demod, interferogram, master, config).map_err(Error::at(Stage::EstimateS))?;
    let mut rho_time = extract_rho_time(&demod, &profile, &report);
    if config.time_gate {
        gate_noise(&mut rho_time, report.residual_rms.powi(2));
    }
    let freq = to_frequency(&rho_time, &master.grid).map_err(Error::at(Stage::ToFrequency))?;
    let (rho, masked, min_eig) = deconvolve_amplitude(&freq, master, config).map_err(Error::at(Stage::Deconvolve))?;
    report.masked_fraction = masked;
    report.min_eigenvalue_raw = min_eig;
    Ok((rho, report))
}
