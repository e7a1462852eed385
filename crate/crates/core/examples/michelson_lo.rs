//! Normalization of the Michelson double pulse and the local-oscillator
//! amplitude it produces.

use homtomo::grid::{angular_frequency, FrequencyGrid};
use homtomo::state::sigma_from_duration;
use homtomo::{lo_amplitude, michelson_s, SpectralAmplitude};

fn main() -> homtomo::Result<()> {
    let grid = FrequencyGrid::new(angular_frequency(774.0), 0.0025, 256)?;
    let master = SpectralAmplitude::gaussian(grid, grid.center, sigma_from_duration(30.0), 0.0)?;

    println!("{:>8}  {:>12}", "dt (fs)", "S(dt)");
    for dt in [0.0, 0.64, 1.29, 10.0, 30.0, 60.0, 300.0] {
        println!("{dt:>8.2}  {:>12.9}", michelson_s(&master, dt));
    }

    let lo = lo_amplitude(&master, -40.0, 25.0)?;
    println!("LO at t1 = -40 fs, t2 = 25 fs: S = {:.6}, |phi|^2 = {:.12}", lo.s_value, lo.amplitude.norm_sqr());
    Ok(())
}
