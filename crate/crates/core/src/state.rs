//! Spectral amplitudes and single-photon spectral density matrices.
//!
//! All norms and traces carry the grid step as the integration weight, so
//! `Σ_k |A_k|² δω = 1` for a normalized amplitude and `Σ_k ρ_kk δω = 1`
//! for a normalized density matrix.

use std::f64::consts::LN_2;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;

const NORM_TOLERANCE: f64 = 1e-6;

/// Intensity rms bandwidth (rad/fs) of a transform-limited Gaussian pulse
/// with the given intensity FWHM duration.
pub fn sigma_from_duration(fwhm_fs: f64) -> f64 {
    // Δt·Δω = 4 ln 2 for intensity FWHMs; rms = FWHM / (2√(2 ln 2)).
    let fwhm_omega = 4.0 * LN_2 / fwhm_fs;
    fwhm_omega / (2.0 * (2.0 * LN_2).sqrt())
}

/// Intensity rms width from an intensity FWHM.
pub fn sigma_from_fwhm(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * LN_2).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralAmplitude {
    pub grid: FrequencyGrid,
    pub values: Vec<C64>,
}

impl SpectralAmplitude {
    pub fn new(grid: FrequencyGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::Size(format!(
                "amplitude has {} samples for a grid of {}",
                values.len(),
                grid.count
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("amplitude contains non-finite samples".into()));
        }
        Ok(SpectralAmplitude { grid, values })
    }

    /// Normalized Gaussian `exp(−(ω−ω_c)²/4σ² + i·gdd·(ω−ω_c)²/2)` where `σ`
    /// is the rms width of the intensity `|A|²` and `gdd` the group-delay
    /// dispersion in fs².
    pub fn gaussian(grid: FrequencyGrid, center: f64, sigma: f64, gdd: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParam(format!("gaussian width must be > 0, got {sigma}")));
        }
        let values = grid
            .omegas()
            .into_iter()
            .map(|w| {
                let d = w - center;
                C64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), gdd * d * d / 2.0)
            })
            .collect();
        SpectralAmplitude::new(grid, values)?.normalized()
    }

    /// `Σ_k |A_k|² δω`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-9
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::DegenerateState("amplitude has zero norm".into()));
        }
        let s = 1.0 / n.sqrt();
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(self)
    }

    pub(crate) fn ensure_normalized(&self, what: &str) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization(format!("{what} has norm {n}, expected 1")));
        }
        Ok(())
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `∫ A*(ω) B(ω) dω`.
    pub fn inner(&self, other: &SpectralAmplitude) -> Result<C64> {
        self.grid.ensure_matches(&other.grid)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<C64>() * self.grid.step)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Intensity-weighted mean frequency.
    pub fn mean_omega(&self) -> f64 {
        let w: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        self.values.iter().enumerate().map(|(k, v)| v.norm_sqr() * self.grid.omega(k)).sum::<f64>() / w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDensityMatrix {
    pub grid: FrequencyGrid,
    pub values: Array2<C64>,
    /// Frequencies where the matrix is meaningful.
    pub support_mask: Vec<bool>,
}

impl SpectralDensityMatrix {
    pub fn new(grid: FrequencyGrid, values: Array2<C64>) -> Result<Self> {
        let k = grid.count;
        if values.dim() != (k, k) {
            return Err(Error::Size(format!("matrix is {:?}, grid needs {k} × {k}", values.dim())));
        }
        Ok(SpectralDensityMatrix { grid, values, support_mask: vec![true; k] })
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.grid.count {
            return Err(Error::Size(format!("mask length {} for grid of {}", mask.len(), self.grid.count)));
        }
        self.support_mask = mask;
        Ok(self)
    }

    pub fn zeros(grid: FrequencyGrid) -> Self {
        let k = grid.count;
        SpectralDensityMatrix { grid, values: Array2::zeros((k, k)), support_mask: vec![true; k] }
    }

    /// `|φ⟩⟨φ|`, i.e. `ρ(ω, ω′) = φ(ω) φ*(ω′)`.
    pub fn pure(state: &SpectralAmplitude) -> Self {
        let k = state.grid.count;
        let v = &state.values;
        let values = Array2::from_shape_fn((k, k), |(i, j)| v[i] * v[j].conj());
        SpectralDensityMatrix { grid: state.grid, values, support_mask: vec![true; k] }
    }

    /// `Σ_r w_r |φ_r⟩⟨φ_r|`, trace-normalized.
    pub fn mixture(components: &[(f64, SpectralAmplitude)]) -> Result<Self> {
        let (_, first) = components
            .first()
            .ok_or_else(|| Error::DegenerateState("empty mixture".into()))?;
        let mut out = SpectralDensityMatrix::zeros(first.grid);
        for (w, amp) in components {
            if *w < 0.0 {
                return Err(Error::InvalidParam(format!("mixture weight {w} is negative")));
            }
            first.grid.ensure_matches(&amp.grid)?;
            out.values.scaled_add(C64::new(*w, 0.0), &SpectralDensityMatrix::pure(amp).values);
        }
        out.normalized()
    }

    pub fn dim(&self) -> usize {
        self.grid.count
    }

    /// `Σ_k ρ_kk δω`.
    pub fn trace(&self) -> f64 {
        self.values.diag().iter().map(|v| v.re).sum::<f64>() * self.grid.step
    }

    pub fn normalized(mut self) -> Result<Self> {
        let t = self.trace();
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::DegenerateState(format!("trace {t} cannot be normalized")));
        }
        self.values.mapv_inplace(|v| v / t);
        Ok(self)
    }

    pub(crate) fn ensure_normalized(&self) -> Result<()> {
        let t = self.trace();
        if (t - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization(format!("density matrix trace is {t}, expected 1")));
        }
        Ok(())
    }

    pub fn hermitize(&self) -> Self {
        SpectralDensityMatrix {
            grid: self.grid,
            values: linalg::hermitize(&self.values).expect("density matrices are square"),
            support_mask: self.support_mask.clone(),
        }
    }

    /// Clips negative eigenvalues and renormalizes the trace to one.
    pub fn project_psd(&self) -> Result<Self> {
        Ok(SpectralDensityMatrix {
            grid: self.grid,
            values: linalg::project_psd(&self.values, self.grid.step)?,
            support_mask: self.support_mask.clone(),
        })
    }

    /// Eigenvalues of `ρ·δω`, ascending; they sum to the trace.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let step = self.grid.step;
        Ok(linalg::eigvalsh(&self.values)?.into_iter().map(|v| v * step).collect())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    /// `tr ρ²` in continuum normalization.
    pub fn purity(&self) -> Result<f64> {
        self.ensure_normalized()?;
        Ok(trace_product(&self.values, &self.values) * self.grid.step * self.grid.step)
    }

    /// `tr(ρ_a ρ_b) / √(tr ρ_a² · tr ρ_b²)`.
    pub fn overlap_fidelity(&self, other: &SpectralDensityMatrix) -> Result<f64> {
        self.grid.ensure_matches(&other.grid)?;
        let pa = self.purity()?;
        let pb = other.purity()?;
        let cross = trace_product(&self.values, &other.values) * self.grid.step * self.grid.step;
        Ok(cross / (pa * pb).sqrt())
    }

    /// Zeroes rows and columns outside the support mask and renormalizes.
    pub fn restricted_to_support(&self) -> Result<Self> {
        let mask = &self.support_mask;
        let values = Array2::from_shape_fn(self.values.dim(), |(i, j)| {
            if mask[i] && mask[j] { self.values[[i, j]] } else { C64::new(0.0, 0.0) }
        });
        SpectralDensityMatrix { grid: self.grid, values, support_mask: mask.clone() }.normalized()
    }

    /// Copy of `self` carrying `mask`, restricted and renormalized on it.
    pub fn restricted_to(&self, mask: &[bool]) -> Result<Self> {
        self.clone().with_mask(mask.to_vec())?.restricted_to_support()
    }

    /// `‖ρ_a − ρ_b‖_F / ‖ρ_b‖_F` with `other` as the reference.
    pub fn relative_frobenius(&self, reference: &SpectralDensityMatrix) -> Result<f64> {
        self.grid.ensure_matches(&reference.grid)?;
        let diff: f64 = self.values.iter().zip(reference.values.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let norm: f64 = reference.values.iter().map(|b| b.norm_sqr()).sum();
        Ok((diff / norm).sqrt())
    }

    /// Largest `|ρ_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `Re tr(AB)` for square matrices of equal size.
fn trace_product(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    let (k, _) = a.dim();
    let mut acc = 0.0;
    for i in 0..k {
        for j in 0..k {
            acc += (a[[i, j]] * b[[j, i]]).re;
        }
    }
    acc
}
