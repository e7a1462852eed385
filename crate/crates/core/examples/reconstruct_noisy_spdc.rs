//! Mixed downconverted photon under shot noise and accidental background,
//! reconstructed and compared against the model.

use homtomo::analysis::widths;
use homtomo::forward::{expected_counts, simulate_scan};
use homtomo::grid::{angular_frequency, wavelength_nm, wavelength_width_to_omega, FrequencyGrid};
use homtomo::reconstruct::amplitude_mask;
use homtomo::spdc::{build_jsa_on, pump_grid_for, trace_out_idler, CrystalConfig};
use homtomo::state::{sigma_from_duration, sigma_from_fwhm};
use homtomo::{reconstruct, ExperimentParams, ReconstructionConfig, ScanGrid, SpectralAmplitude};

fn main() -> homtomo::Result<()> {
    let grid = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 128)?;
    let master = SpectralAmplitude::gaussian(grid, grid.center, sigma_from_duration(30.0), 0.0)?;

    let pump_grid = pump_grid_for(&grid)?;
    let pump_sigma = sigma_from_fwhm(wavelength_width_to_omega(wavelength_nm(pump_grid.center), 1.3));
    let pump = SpectralAmplitude::gaussian(pump_grid, pump_grid.center, pump_sigma, 0.0)?;
    let crystal = CrystalConfig { filter_center_nm: 774.0, ..CrystalConfig::default() };
    let truth = trace_out_idler(&build_jsa_on(&pump, grid, grid, &crystal)?)?;
    println!("model purity {:.4}", truth.purity()?);

    // About 100 counts per point away from the dip, a tenth of them accidental.
    let scan = ScanGrid::new(1.0, 2048, 7.5, 128)?;
    let base = ExperimentParams::default();
    let unit = expected_counts(&master, &truth, &scan, &base, 1.0)?;
    let exposure = 100.0 / 1.1 / (unit.iter().sum::<f64>() / unit.len() as f64);
    let params = ExperimentParams { background: 0.1 * 100.0 / 1.1 / (base.rep_rate_hz * exposure), ..base };
    let ifg = simulate_scan(&master, &truth, &scan, &params, exposure, Some(3))?;

    let config = ReconstructionConfig { amp_floor: 0.5, sideband_halfwidth: Some(0.05), ..Default::default() };
    let (rho, report) = reconstruct(&ifg, &master, &config)?;
    let truth = truth.restricted_to(&amplitude_mask(&master, config.amp_floor))?;
    println!("background {:.2} counts/point, residual {:.3e}", report.background_estimate, report.residual_rms);
    println!("relative Frobenius error {:.4}", rho.relative_frobenius(&truth)?);
    println!("purity {:.4} (model on support {:.4})", rho.purity()?, truth.purity()?);
    let (a, b) = (widths(&rho)?, widths(&truth)?);
    println!("antidiagonal FWHM {:.3} nm (model {:.3} nm)", a.antidiagonal_nm, b.antidiagonal_nm);
    println!("diagonal FWHM     {:.3} nm (model {:.3} nm)", a.diagonal_nm, b.diagonal_nm);
    Ok(())
}
