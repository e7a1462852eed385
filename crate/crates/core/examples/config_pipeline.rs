//! The same pipeline the command-line tool runs, driven by a TOML file.
//!
//! `cargo run --example config_pipeline -- examples/configs/spdc.toml`

use std::path::PathBuf;

use homtomo::config::Config;
use homtomo::forward::simulate_scan;
use homtomo::reconstruct;

fn main() -> homtomo::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/gaussian.toml"));
    let cfg = Config::from_path(&path)?;
    let master = cfg.master_amplitude()?;
    let (truth, _) = cfg.source_state(&master)?;
    let scan = cfg.scan_grid(None)?;
    let ifg = simulate_scan(&master, &truth, &scan, &cfg.params()?, cfg.exposure()?, cfg.seed)?;
    let (rho, report) = reconstruct(&ifg, &master, &cfg.reconstruction)?;
    let truth = truth.restricted_to(&rho.support_mask)?;
    println!("{}: {} points, seed {:?}", path.display(), scan.len(), cfg.seed);
    println!("N {:.6e}, background {:.3e}", report.n_estimate, report.background_estimate);
    println!("fidelity {:.6}, relative Frobenius {:.4}", rho.overlap_fidelity(&truth)?, rho.relative_frobenius(&truth)?);
    Ok(())
}
