//! Static figures: PNG heatmaps of scans and SVG contour plots of density
//! matrices on wavelength axes.

use std::fmt::Write as _;
use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::forward::Interferogram;
use crate::grid::wavelength_nm;
use crate::io::write_atomic;
use crate::state::SpectralDensityMatrix;

/// Contour levels relative to `max |ρ|`.
pub const CONTOUR_LEVELS: [f64; 3] = [0.75, 0.5, 0.25];

const COLORS: [&str; 3] = ["#b2182b", "#2166ac", "#1b7837"];

/// Minimum heatmap height in pixels; short `T` axes are stretched.
const MIN_HEIGHT: u32 = 256;

fn ramp(x: f64) -> Rgb<u8> {
    // dark blue → teal → yellow
    let stops = [(0.0, [20.0, 20.0, 90.0]), (0.5, [30.0, 150.0, 140.0]), (1.0, [250.0, 230.0, 60.0])];
    let x = x.clamp(0.0, 1.0);
    let (a, b) = if x <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let t = (x - a.0) / (b.0 - a.0);
    let c = |k: usize| (a.1[k] + t * (b.1[k] - a.1[k])).round() as u8;
    Rgb([c(0), c(1), c(2)])
}

/// Counts as an image: `τ` along x, `T` along y (first row at the top).
pub fn scan_heatmap(scan: &Interferogram) -> Result<RgbImage> {
    let (lo, hi) = scan
        .counts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    if !(hi > lo) {
        return Err(Error::DegeneratePlot("scan counts are constant".into()));
    }
    let width = scan.scan.tau_count as u32;
    let rep = MIN_HEIGHT.div_ceil(scan.scan.t_count as u32).max(1);
    let height = scan.scan.t_count as u32 * rep;
    Ok(RgbImage::from_fn(width, height, |x, y| {
        let c = scan.at((y / rep) as usize, x as usize);
        ramp((c - lo) / (hi - lo))
    }))
}

pub fn write_scan_png(path: &Path, scan: &Interferogram) -> Result<()> {
    let img = scan_heatmap(scan)?;
    let mut bytes = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::Format(e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Line segments of the `level` iso-line of `field` (row-major, `rows ×
/// cols`), in fractional (row, col) coordinates.
pub fn iso_segments(field: &[f64], rows: usize, cols: usize, level: f64) -> Vec<[(f64, f64); 2]> {
    let at = |r: usize, c: usize| field[r * cols + c];
    let mut out = Vec::new();
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols.saturating_sub(1) {
            let v = [at(r, c), at(r, c + 1), at(r + 1, c + 1), at(r + 1, c)];
            let corners = [(r as f64, c as f64), (r as f64, c as f64 + 1.0), (r as f64 + 1.0, c as f64 + 1.0), (r as f64 + 1.0, c as f64)];
            let mut cuts = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (v[e], v[(e + 1) % 4]);
                if (a >= level) != (b >= level) {
                    let t = (level - a) / (b - a);
                    let (pa, pb) = (corners[e], corners[(e + 1) % 4]);
                    cuts.push((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)));
                }
            }
            match cuts.len() {
                2 => out.push([cuts[0], cuts[1]]),
                4 => {
                    // Saddle: pair edges according to the cell mean.
                    let mean = v.iter().sum::<f64>() / 4.0;
                    if (mean >= level) == (v[0] >= level) {
                        out.push([cuts[0], cuts[3]]);
                        out.push([cuts[1], cuts[2]]);
                    } else {
                        out.push([cuts[0], cuts[1]]);
                        out.push([cuts[2], cuts[3]]);
                    }
                }
                _ => {}
            }
        }
    }
    out
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

/// Contour plot of `|ρ(λ₁, λ₂)|` at [`CONTOUR_LEVELS`] with wavelength axes.
pub fn matrix_contour_svg(rho: &SpectralDensityMatrix) -> Result<String> {
    let peak = rho.max_abs();
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::DegeneratePlot("matrix is identically zero".into()));
    }
    let k = rho.dim();
    let field: Vec<f64> = rho.values.iter().map(|v| v.norm() / peak).collect();
    let lambdas: Vec<f64> = rho.grid.wavelengths();
    let (lmin, lmax) = (lambdas[k - 1], lambdas[0]);
    let (size, margin) = (480.0, 70.0);
    let lambda_at = |x: f64| {
        let i = x.floor().clamp(0.0, (k - 2) as f64) as usize;
        lambdas[i] + (x - i as f64) * (lambdas[i + 1] - lambdas[i])
    };
    let px = |lam: f64| margin + (lam - lmin) / (lmax - lmin) * size;
    let py = |lam: f64| margin + size - (lam - lmin) / (lmax - lmin) * size;

    let mut svg = String::new();
    let total = size + 2.0 * margin;
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}" font-family="sans-serif" font-size="12">"#).ok();
    writeln!(svg, r#"<rect x="{margin}" y="{margin}" width="{size}" height="{size}" fill="white" stroke="black"/>"#).ok();
    for t in nice_ticks(lmin, lmax, 5) {
        let (x, y) = (px(t), py(t));
        let bottom = margin + size;
        writeln!(svg, r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, bottom + 5.0).ok();
        writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#, bottom + 20.0).ok();
        writeln!(svg, r#"<line x1="{:.2}" y1="{y:.2}" x2="{margin}" y2="{y:.2}" stroke="black"/>"#, margin - 5.0).ok();
        writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{t}</text>"#, margin - 8.0, y + 4.0).ok();
    }
    writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">λ₂ (nm)</text>"#, margin + size / 2.0, total - 15.0).ok();
    writeln!(
        svg,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">λ₁ (nm)</text>"#,
        margin + size / 2.0,
        margin + size / 2.0
    )
    .ok();
    for (level, color) in CONTOUR_LEVELS.iter().zip(COLORS) {
        let mut d = String::new();
        for [(r0, c0), (r1, c1)] in iso_segments(&field, k, k, *level) {
            write!(d, "M{:.2} {:.2}L{:.2} {:.2}", px(lambda_at(c0)), py(lambda_at(r0)), px(lambda_at(c1)), py(lambda_at(r1))).ok();
        }
        writeln!(svg, r#"<path class="contour" data-level="{level}" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#).ok();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_matrix_svg(path: &Path, rho: &SpectralDensityMatrix) -> Result<()> {
    write_atomic(path, matrix_contour_svg(rho)?.as_bytes())
}

/// Wavelength range of the grid, nm, shortest first.
pub fn wavelength_span(rho: &SpectralDensityMatrix) -> (f64, f64) {
    let g = rho.grid;
    (wavelength_nm(g.omega(g.count - 1)), wavelength_nm(g.omega(0)))
}
