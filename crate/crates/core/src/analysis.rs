//! Width, phase and distance measures for comparing density matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::wavelength_nm;
use crate::state::SpectralDensityMatrix;

/// Full width at half maximum of a sampled profile, in units of `step`.
/// Crossings are located by linear interpolation, walking outwards from the
/// peak. Returns `None` if the profile does not fall below half maximum on
/// both sides.
pub fn fwhm(values: &[f64], step: f64) -> Option<f64> {
    let (lo, hi) = half_max_crossings(values)?;
    Some((hi - lo) * step)
}

/// Fractional sample positions where `values` crosses half its maximum on
/// either side of the peak.
pub fn half_max_crossings(values: &[f64]) -> Option<(f64, f64)> {
    let (peak_idx, &peak) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(peak > 0.0) {
        return None;
    }
    let half = peak / 2.0;
    let mut lo = None;
    for i in (0..peak_idx).rev() {
        if values[i] < half {
            let t = (half - values[i]) / (values[i + 1] - values[i]);
            lo = Some(i as f64 + t);
            break;
        }
    }
    let mut hi = None;
    for i in peak_idx + 1..values.len() {
        if values[i] < half {
            let t = (values[i - 1] - half) / (values[i - 1] - values[i]);
            hi = Some((i - 1) as f64 + t);
            break;
        }
    }
    Some((lo?, hi?))
}

/// `|ρ(ω_k, ω_k)|`.
pub fn diagonal_profile(rho: &SpectralDensityMatrix) -> Vec<f64> {
    (0..rho.dim()).map(|k| rho.values[[k, k]].norm()).collect()
}

/// Index of the largest diagonal element.
pub fn diagonal_peak(rho: &SpectralDensityMatrix) -> usize {
    diagonal_profile(rho)
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0)
}

/// `|ρ(ω_c + δ, ω_c − δ)|` for `δ = j·step`, `j = −J..=J`, through the
/// diagonal element `center`. The profile is indexed by `j + J`.
pub fn antidiagonal_profile(rho: &SpectralDensityMatrix, center: usize) -> Vec<f64> {
    let k = rho.dim();
    let reach = center.min(k - 1 - center);
    (0..=2 * reach)
        .map(|idx| {
            let (i, j) = (center + idx - reach, center + reach - idx);
            rho.values[[i, j]].norm()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Widths {
    /// Along `ρ(ω, ω)`, rad/fs.
    pub diagonal: f64,
    /// Along `ρ(ω_c + δ, ω_c − δ)` in the `ω₁ = ω_c + δ` coordinate, rad/fs.
    pub antidiagonal: f64,
    pub diagonal_nm: f64,
    pub antidiagonal_nm: f64,
}

/// Diagonal and antidiagonal FWHM through the diagonal peak. Wavelength
/// widths map the half-maximum crossings through `λ = 2πc/ω`.
pub fn widths(rho: &SpectralDensityMatrix) -> Result<Widths> {
    let g = rho.grid;
    let diag = diagonal_profile(rho);
    let (dlo, dhi) = half_max_crossings(&diag)
        .ok_or_else(|| Error::DegenerateState("diagonal does not fall to half maximum inside the grid".into()))?;
    let omega_at = |x: f64| g.omega(0) + x * g.step;
    let center = diagonal_peak(rho);
    let anti = antidiagonal_profile(rho, center);
    let reach = (anti.len() - 1) / 2;
    let (alo, ahi) = half_max_crossings(&anti)
        .ok_or_else(|| Error::DegenerateState("antidiagonal does not fall to half maximum inside the grid".into()))?;
    let anti_omega = |x: f64| g.omega(center) + (x - reach as f64) * g.step;
    Ok(Widths {
        diagonal: (dhi - dlo) * g.step,
        antidiagonal: (ahi - alo) * g.step,
        diagonal_nm: wavelength_nm(omega_at(dlo)) - wavelength_nm(omega_at(dhi)),
        antidiagonal_nm: wavelength_nm(anti_omega(alo)) - wavelength_nm(anti_omega(ahi)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    /// Entries with `|ρ| ≥ level·max|ρ|`.
    pub count: usize,
    pub max_abs: f64,
    pub rms: f64,
}

/// Phase of `ρ` inside the `level·max|ρ|` contour.
pub fn phase_stats(rho: &SpectralDensityMatrix, level: f64) -> PhaseStats {
    let cut = level * rho.max_abs();
    let phases: Vec<f64> = rho.values.iter().filter(|v| v.norm() >= cut && cut > 0.0).map(|v| v.arg()).collect();
    let count = phases.len();
    let max_abs = phases.iter().map(|p| p.abs()).fold(0.0, f64::max);
    let rms = if count > 0 { (phases.iter().map(|p| p * p).sum::<f64>() / count as f64).sqrt() } else { 0.0 };
    PhaseStats { count, max_abs, rms }
}

/// Continuum Frobenius distance `(∬|ρ_a − ρ_b|² dω dω′)^{1/2}`.
pub fn frobenius_distance(a: &SpectralDensityMatrix, b: &SpectralDensityMatrix) -> Result<f64> {
    a.grid.ensure_matches(&b.grid)?;
    let sum: f64 = a.values.iter().zip(b.values.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
    Ok(sum.sqrt() * a.grid.step)
}

/// Everything `compare` reports for a pair of matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub fidelity: f64,
    pub frobenius: f64,
    pub relative_frobenius: f64,
    pub purity: (f64, f64),
    pub widths: (Option<Widths>, Option<Widths>),
    pub phase: (PhaseStats, PhaseStats),
}

/// Compares `a` against the reference `b`. Both must share a grid.
pub fn compare(a: &SpectralDensityMatrix, b: &SpectralDensityMatrix) -> Result<Comparison> {
    a.grid.ensure_matches(&b.grid)?;
    Ok(Comparison {
        fidelity: a.overlap_fidelity(b)?,
        frobenius: frobenius_distance(a, b)?,
        relative_frobenius: a.relative_frobenius(b)?,
        purity: (a.purity()?, b.purity()?),
        widths: (widths(a).ok(), widths(b).ok()),
        phase: (phase_stats(a, 0.25), phase_stats(b, 0.25)),
    })
}

fn sig(x: f64) -> String {
    format!("{x:.8e}")
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "overlap fidelity      {}", sig(self.fidelity))?;
        writeln!(f, "frobenius distance    {}", sig(self.frobenius))?;
        writeln!(f, "relative frobenius    {}", sig(self.relative_frobenius))?;
        writeln!(f, "purity                {}  {}", sig(self.purity.0), sig(self.purity.1))?;
        for (name, w) in [("A", self.widths.0), ("B", self.widths.1)] {
            match w {
                Some(w) => writeln!(
                    f,
                    "widths {name}  diagonal {} nm ({} rad/fs)  antidiagonal {} nm ({} rad/fs)",
                    sig(w.diagonal_nm),
                    sig(w.diagonal),
                    sig(w.antidiagonal_nm),
                    sig(w.antidiagonal)
                )?,
                None => writeln!(f, "widths {name}  not resolved on the grid")?,
            }
        }
        for (name, p) in [("A", self.phase.0), ("B", self.phase.1)] {
            writeln!(
                f,
                "phase {name}   inside 0.25 contour: {} entries, max |arg| {} rad, rms {} rad",
                p.count,
                sig(p.max_abs),
                sig(p.rms)
            )?;
        }
        Ok(())
    }
}
