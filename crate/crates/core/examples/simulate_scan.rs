//! Simulated two-dimensional scan with Poisson counts, written to disk and
//! rendered as a heatmap.

use homtomo::forward::simulate_scan;
use homtomo::grid::{angular_frequency, FrequencyGrid};
use homtomo::state::sigma_from_duration;
use homtomo::{io, plot, ExperimentParams, ScanGrid, SpectralAmplitude, SpectralDensityMatrix};

fn main() -> homtomo::Result<()> {
    let out = std::env::temp_dir().join("homtomo-examples");
    std::fs::create_dir_all(&out)?;

    let grid = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 128)?;
    let sigma = sigma_from_duration(30.0);
    let master = SpectralAmplitude::gaussian(grid, grid.center, sigma, 0.0)?;
    let photon = SpectralDensityMatrix::pure(&SpectralAmplitude::gaussian(grid, grid.center, 0.4 * sigma, 0.0)?);

    let scan = ScanGrid::desk();
    let ifg = simulate_scan(&master, &photon, &scan, &ExperimentParams::default(), 0.6, Some(2024))?;
    println!("{} points, mean {:.2} counts, N = {:.5}", ifg.counts.len(), ifg.mean_counts(), ifg.nominal_n());

    io::write_scan(&out.join("scan.json"), &ifg)?;
    plot::write_scan_png(&out.join("scan.png"), &ifg)?;
    println!("wrote {}", out.join("scan.png").display());
    Ok(())
}
