#![allow(dead_code)]

use homtomo::forward::{expected_counts, simulate_scan};
use homtomo::grid::{angular_frequency, FrequencyGrid, ScanGrid};
use homtomo::spdc::{build_jsa_on, pump_grid_for, trace_out_idler, CrystalConfig};
use homtomo::state::{sigma_from_duration, sigma_from_fwhm};
use homtomo::{
    ExperimentParams, Interferogram, ReconstructionConfig, SpectralAmplitude, SpectralDensityMatrix,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

pub const MASTER_NM: f64 = 774.0;
pub const MASTER_FWHM_FS: f64 = 30.0;

pub fn grid() -> FrequencyGrid {
    FrequencyGrid::new(angular_frequency(MASTER_NM), 0.0025, 128).unwrap()
}

pub fn master() -> SpectralAmplitude {
    let g = grid();
    SpectralAmplitude::gaussian(g, g.center, sigma_from_duration(MASTER_FWHM_FS), 0.0).unwrap()
}

pub fn master_sigma() -> f64 {
    sigma_from_duration(MASTER_FWHM_FS)
}

/// Pure Gaussian photon at the master center with `fraction` of its bandwidth.
pub fn gaussian_photon(fraction: f64, gdd: f64) -> SpectralDensityMatrix {
    let g = grid();
    SpectralDensityMatrix::pure(&SpectralAmplitude::gaussian(g, g.center, fraction * master_sigma(), gdd).unwrap())
}

/// Gaussian pump of the given wavelength FWHM on the pump grid of `g`.
pub fn gaussian_pump(g: &FrequencyGrid, fwhm_nm: f64) -> SpectralAmplitude {
    let pg = pump_grid_for(g).unwrap();
    let center_nm = homtomo::grid::wavelength_nm(pg.center);
    let sigma = sigma_from_fwhm(homtomo::grid::wavelength_width_to_omega(center_nm, fwhm_nm));
    SpectralAmplitude::gaussian(pg, pg.center, sigma, 0.0).unwrap()
}

/// Downconverted photon with purity ≈ 0.41 (1.3 nm pump, 10 nm filter, 40 nm
/// collection, degenerate at the master center).
pub fn spdc_photon() -> SpectralDensityMatrix {
    let g = grid();
    let crystal = CrystalConfig { filter_center_nm: homtomo::grid::wavelength_nm(g.center), ..CrystalConfig::default() };
    let jsa = build_jsa_on(&gaussian_pump(&g, 1.3), g, g, &crystal).unwrap();
    trace_out_idler(&jsa).unwrap()
}

/// 2048 × 128 at 1 fs × 7.5 fs: long enough in `T` that the outer rows are
/// clear of the photon.
pub fn long_scan() -> ScanGrid {
    ScanGrid::new(1.0, 2048, 7.5, 128).unwrap()
}

/// Settings for Poisson-limited scans: a higher amplitude floor and a
/// sideband window matched to the photon bandwidth.
pub fn noisy_config() -> ReconstructionConfig {
    ReconstructionConfig { amp_floor: 0.5, sideband_halfwidth: Some(0.05), ..ReconstructionConfig::default() }
}

/// Seeded scan with `far_mean` mean counts per point far from the dip, of
/// which `background_fraction` are accidentals.
pub fn noisy_scan(
    rho: &SpectralDensityMatrix,
    scan: &ScanGrid,
    far_mean: f64,
    background_fraction: f64,
    seed: u64,
) -> Interferogram {
    let a = master();
    let base = ExperimentParams::default();
    let signal = far_mean / (1.0 + background_fraction);
    // The dip covers few rows, so the scan mean stands in for the far mean.
    let unit = expected_counts(&a, rho, scan, &base, 1.0).unwrap();
    let far_unit = unit.iter().sum::<f64>() / unit.len() as f64;
    let exposure = signal / far_unit;
    let params = ExperimentParams {
        background: background_fraction * signal / (base.rep_rate_hz * exposure),
        ..base
    };
    simulate_scan(&a, rho, scan, &params, exposure, Some(seed)).unwrap()
}

pub fn noiseless_scan(rho: &SpectralDensityMatrix, scan: &ScanGrid) -> Interferogram {
    simulate_scan(&master(), rho, scan, &ExperimentParams::default(), 0.08, None).unwrap()
}

/// Random normalized state on `g`: a mixture of up to three Gaussian pure
/// states near the center, each no wider than `max_sigma`.
pub fn mixed_state(g: FrequencyGrid, max_sigma: f64) -> impl Strategy<Value = SpectralDensityMatrix> {
    let component = (-1.0f64..1.0, 0.3f64..1.0, -400.0f64..400.0, 0.05f64..1.0);
    proptest::collection::vec(component, 1..=3).prop_map(move |parts| {
        let comps: Vec<(f64, SpectralAmplitude)> = parts
            .into_iter()
            .map(|(shift, width, gdd, weight)| {
                let sigma = width * max_sigma;
                let amp = SpectralAmplitude::gaussian(g, g.center + shift * sigma, sigma, gdd).unwrap();
                (weight, amp)
            })
            .collect();
        let total: f64 = comps.iter().map(|c| c.0).sum();
        let comps: Vec<_> = comps.into_iter().map(|(w, a)| (w / total, a)).collect();
        SpectralDensityMatrix::mixture(&comps).unwrap()
    })
}

pub fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(r, i)| C64::new(r, i)), len)
}
