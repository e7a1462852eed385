//! The reconstruction one stage at a time: sideband demodulation, fringe
//! normalization, two-time function, frequency matrix and deconvolution.

use homtomo::forward::{shaped_matrix, simulate_scan};
use homtomo::grid::{angular_frequency, FrequencyGrid};
use homtomo::reconstruct::{
    deconvolve_amplitude, demodulate, estimate_s_and_n, extract_rho_time, to_frequency, ReconstructionConfig,
};
use homtomo::state::sigma_from_duration;
use homtomo::{ExperimentParams, ScanGrid, SpectralAmplitude, SpectralDensityMatrix};

fn main() -> homtomo::Result<()> {
    let grid = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 128)?;
    let sigma = sigma_from_duration(30.0);
    let master = SpectralAmplitude::gaussian(grid, grid.center, sigma, 0.0)?;
    let photon = SpectralDensityMatrix::pure(&SpectralAmplitude::gaussian(grid, grid.center, 0.4 * sigma, 0.0)?);
    let scan = ScanGrid::desk();
    let ifg = simulate_scan(&master, &photon, &scan, &ExperimentParams::default(), 0.08, None)?;

    let config = ReconstructionConfig::default();
    let (carrier, halfwidth) = config.sideband(&grid, &scan)?;
    println!("sideband at {carrier:.4} rad/fs, half-width {halfwidth:.4} rad/fs");
    let demodulated = demodulate(&ifg, carrier, halfwidth)?;
    let (profile, report) = estimate_s_and_n(&demodulated, &ifg, &master, &config)?;
    println!("N {:.6e} from {} far rows per side", report.n_estimate, report.far_rows);

    let two_time = extract_rho_time(&demodulated, &profile, &report);
    println!("peak |two-time function| {:.4}", two_time.max_abs());
    let shaped = to_frequency(&two_time, &grid)?;
    let exact = shaped_matrix(&master, &photon)?;
    let err = (&shaped - &exact).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let peak = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    println!("frequency matrix deviation {:.2e} of peak", err / peak);

    let (rho, masked, min_eig) = deconvolve_amplitude(&shaped, &master, &config)?;
    println!("masked {:.1}% of the grid, raw minimum eigenvalue {min_eig:.2e}, purity {:.6}", 100.0 * masked, rho.purity()?);
    Ok(())
}
