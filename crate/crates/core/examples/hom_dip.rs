//! Coincidence probability of a photon against the local oscillator: the
//! Hong-Ou-Mandel dip along t1 = t2 and the fringes across it.

use homtomo::forward::{dip_function, rho_tilde};
use homtomo::grid::{angular_frequency, FrequencyGrid};
use homtomo::state::sigma_from_duration;
use homtomo::{coincidence_probability, lo_amplitude, ExperimentParams, SpectralAmplitude, SpectralDensityMatrix};

fn main() -> homtomo::Result<()> {
    let grid = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 128)?;
    let sigma = sigma_from_duration(30.0);
    let master = SpectralAmplitude::gaussian(grid, grid.center, sigma, 0.0)?;
    let photon = SpectralDensityMatrix::pure(&SpectralAmplitude::gaussian(grid, grid.center, 0.4 * sigma, 800.0)?);
    let params = ExperimentParams::default();

    println!("{:>8}  {:>10}  {:>12}", "t (fs)", "D(t)", "p_c(t, t)");
    for t in [-150.0, -80.0, -40.0, -10.0, 0.0, 10.0, 40.0, 80.0, 150.0] {
        let lo = lo_amplitude(&master, t, t)?;
        let pc = coincidence_probability(&lo, &photon, &params)?;
        println!("{t:>8.1}  {:>10.6}  {pc:>12.6e}", dip_function(&master, &photon, t)?);
    }

    let z = rho_tilde(&master, &photon, -20.0, 20.0)?;
    println!("two-time function at (-20 fs, 20 fs): {:.6} {:+.6}i", z.re, z.im);
    Ok(())
}
