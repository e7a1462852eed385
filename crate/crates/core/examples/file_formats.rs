//! Scan and matrix files: a JSON header next to a raw little-endian payload,
//! and contour plots of matrices on wavelength axes.

use homtomo::forward::simulate_scan;
use homtomo::grid::{angular_frequency, FrequencyGrid};
use homtomo::io::{self, Provenance};
use homtomo::state::sigma_from_duration;
use homtomo::{plot, ExperimentParams, ScanGrid, SpectralAmplitude, SpectralDensityMatrix};

fn main() -> homtomo::Result<()> {
    let out = std::env::temp_dir().join("homtomo-examples");
    std::fs::create_dir_all(&out)?;

    let grid = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 128)?;
    let sigma = sigma_from_duration(30.0);
    let master = SpectralAmplitude::gaussian(grid, grid.center, sigma, 0.0)?;
    let photon = SpectralDensityMatrix::mixture(&[
        (0.5, SpectralAmplitude::gaussian(grid, grid.center - 0.4 * sigma, 0.3 * sigma, 0.0)?),
        (0.5, SpectralAmplitude::gaussian(grid, grid.center + 0.4 * sigma, 0.3 * sigma, 0.0)?),
    ])?;

    let matrix = out.join("mixture.json");
    io::write_matrix(&matrix, &photon, &Provenance::Source { description: "two-line mixture".into() })?;
    let (back, provenance) = io::read_matrix(&matrix)?;
    println!("matrix round trip exact: {}; provenance {provenance:?}", back.values == photon.values);

    let scan_path = out.join("mixture-scan.json");
    let ifg = simulate_scan(&master, &photon, &ScanGrid::new(1.0, 1024, 15.0, 16)?, &ExperimentParams::default(), 0.08, Some(9))?;
    io::write_scan(&scan_path, &ifg)?;
    println!("scan header tag {}", io::peek_format(&scan_path)?);
    println!("scan round trip exact: {}", io::read_scan(&scan_path)?.counts == ifg.counts);

    plot::write_matrix_svg(&out.join("mixture.svg"), &photon)?;
    println!("wrote {}", out.join("mixture.svg").display());
    Ok(())
}
