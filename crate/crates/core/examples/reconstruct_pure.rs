//! Noiseless round trip: a chirped pure photon is recovered with its phase.

use homtomo::analysis::{compare, phase_stats};
use homtomo::forward::simulate_scan;
use homtomo::grid::{angular_frequency, FrequencyGrid};
use homtomo::reconstruct::amplitude_mask;
use homtomo::state::sigma_from_duration;
use homtomo::{reconstruct, ExperimentParams, ReconstructionConfig, ScanGrid, SpectralAmplitude, SpectralDensityMatrix};

fn main() -> homtomo::Result<()> {
    let grid = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 128)?;
    let sigma = sigma_from_duration(30.0);
    let master = SpectralAmplitude::gaussian(grid, grid.center, sigma, 0.0)?;
    let truth = SpectralDensityMatrix::pure(&SpectralAmplitude::gaussian(grid, grid.center, 0.4 * sigma, 600.0)?);

    let ifg = simulate_scan(&master, &truth, &ScanGrid::desk(), &ExperimentParams::default(), 0.08, None)?;
    let config = ReconstructionConfig::default();
    let (rho, report) = reconstruct(&ifg, &master, &config)?;
    println!("N = {:.6e} (nominal {:.6e}), masked {:.1}%", report.n_estimate, ifg.nominal_n(), 100.0 * report.masked_fraction);

    let truth = truth.restricted_to(&amplitude_mask(&master, config.amp_floor))?;
    print!("{}", compare(&rho, &truth)?);
    println!("phase spread inside the half-maximum contour: {:.3} rad", phase_stats(&rho, 0.5).max_abs);
    Ok(())
}
