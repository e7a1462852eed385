//! Dense complex matrix helpers on top of `nalgebra` decompositions.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

fn to_na(m: &Array2<C64>) -> DMatrix<C64> {
    let (r, c) = m.dim();
    DMatrix::from_fn(r, c, |i, j| m[[i, j]])
}

/// Copy scaled to unit peak modulus, and the scale that was divided out.
/// Entries below `FLOOR` (exact zeros included) are replaced by the real
/// value `FLOOR`: the Householder step takes the phase of a leading entry,
/// which is NaN for an exact complex zero.
fn to_na_scaled(m: &Array2<C64>) -> (DMatrix<C64>, f64) {
    const FLOOR: f64 = 1e-100;
    let peak = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return (to_na(m), 1.0);
    }
    let (r, c) = m.dim();
    let scaled = DMatrix::from_fn(r, c, |i, j| {
        let v = m[[i, j]] / peak;
        if v.norm() < FLOOR { C64::new(FLOOR, 0.0) } else { v }
    });
    (scaled, peak)
}

fn from_na(m: &DMatrix<C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

fn ensure_square(m: &Array2<C64>) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::Size(format!("expected a square matrix, got {r} × {c}")));
    }
    Ok(r)
}

/// `(M + M†)/2`.
pub fn hermitize(m: &Array2<C64>) -> Result<Array2<C64>> {
    let k = ensure_square(m)?;
    Ok(Array2::from_shape_fn((k, k), |(i, j)| {
        if i == j {
            C64::new(m[[i, i]].re, 0.0)
        } else {
            (m[[i, j]] + m[[j, i]].conj()) * 0.5
        }
    }))
}

/// Largest `|M − M†|` entry.
pub fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let (k, _) = m.dim();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix.
pub fn eigh(m: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    ensure_square(m)?;
    let (scaled, peak) = to_na_scaled(&hermitize(m)?);
    let eig = scaled.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i] * peak).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, from_na(&vectors)))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &Array2<C64>) -> Result<Vec<f64>> {
    ensure_square(m)?;
    let (scaled, peak) = to_na_scaled(&hermitize(m)?);
    let mut values: Vec<f64> = scaled.symmetric_eigenvalues().iter().map(|v| v * peak).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Singular values, descending.
pub fn singular_values(m: &Array2<C64>) -> Vec<f64> {
    let (scaled, peak) = to_na_scaled(m);
    let mut s: Vec<f64> = scaled.singular_values().iter().map(|v| v * peak).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Clips negative eigenvalues of a Hermitian matrix and rescales so that
/// `Σ_k M_kk · weight = 1`.
pub fn project_psd(m: &Array2<C64>, weight: f64) -> Result<Array2<C64>> {
    let k = ensure_square(m)?;
    let (values, vectors) = eigh(m)?;
    let kept: f64 = values.iter().map(|v| v.max(0.0)).sum();
    if kept * weight <= f64::MIN_POSITIVE || !kept.is_finite() {
        return Err(Error::DegenerateState("no positive eigenvalues left after clipping".into()));
    }
    let mut out = Array2::<C64>::zeros((k, k));
    for (r, &lambda) in values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let v = vectors.column(r);
        for i in 0..k {
            let vi = v[i] * lambda;
            for j in 0..k {
                out[[i, j]] += vi * v[j].conj();
            }
        }
    }
    let trace: f64 = (0..k).map(|i| out[[i, i]].re).sum::<f64>() * weight;
    out.mapv_inplace(|v| v / trace);
    hermitize(&out)
}

/// Keeps only eigencomponents of a Hermitian matrix that rise above the
/// magnitude of its most negative eigenvalue, the mirror image of the noise
/// edge. Returns the filtered matrix and the number of components kept.
pub fn mirror_threshold(m: &Array2<C64>) -> Result<(Array2<C64>, usize)> {
    let k = ensure_square(m)?;
    let (values, vectors) = eigh(m)?;
    let cut = (-values.first().copied().unwrap_or(0.0)).max(0.0);
    let mut out = Array2::<C64>::zeros((k, k));
    let mut kept = 0;
    for (r, &lambda) in values.iter().enumerate() {
        if lambda <= cut {
            continue;
        }
        kept += 1;
        let v = vectors.column(r);
        for i in 0..k {
            let vi = v[i] * lambda;
            for j in 0..k {
                out[[i, j]] += vi * v[j].conj();
            }
        }
    }
    Ok((hermitize(&out)?, kept))
}
