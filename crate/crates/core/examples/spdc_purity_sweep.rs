//! Heralded-photon purity and Schmidt number as the signal filter narrows,
//! with the pump taken as the second harmonic of the master pulse.

use homtomo::grid::{angular_frequency, FrequencyGrid};
use homtomo::spdc::{build_jsa, shg_pump, trace_out_idler, CrystalConfig};
use homtomo::state::sigma_from_duration;
use homtomo::SpectralAmplitude;

fn main() -> homtomo::Result<()> {
    let grid = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 128)?;
    let master = SpectralAmplitude::gaussian(grid, grid.center, sigma_from_duration(60.0), 0.0)?;
    let pump = shg_pump(&master)?;

    println!("{:>10}  {:>8}  {:>8}", "filter nm", "purity", "K");
    for filter in [40.0, 20.0, 10.0, 5.0, 2.5] {
        let crystal = CrystalConfig { filter_fwhm_nm: filter, filter_center_nm: 774.0, ..CrystalConfig::default() };
        let jsa = build_jsa(&pump, &crystal)?;
        let purity = trace_out_idler(&jsa)?.purity()?;
        let k = 1.0 / jsa.schmidt_coefficients().iter().map(|s| s.powi(4)).sum::<f64>();
        println!("{filter:>10.1}  {purity:>8.4}  {k:>8.3}");
    }
    Ok(())
}
