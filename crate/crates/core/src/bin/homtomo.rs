use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use homtomo::analysis::compare;
use homtomo::config::{Config, Preset, SourceSpec};
use homtomo::forward::{dip_function, simulate_scan};
use homtomo::io::{self, Provenance, MATRIX_FORMAT, SCAN_FORMAT};
use homtomo::reconstruct::{amplitude_mask, reconstruct};
use homtomo::{plot, Error, Result};

#[derive(Parser)]
#[command(name = "homtomo", version, about = "Single-photon spectral tomography from two-dimensional HOM scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a coincidence scan.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Also write the simulated source state as a matrix file.
        #[arg(long)]
        save_source: Option<PathBuf>,
    },
    /// Reconstruct a density matrix from a scan.
    Reconstruct {
        scan: PathBuf,
        /// Configuration holding the [master] and [grid] sections.
        #[arg(long)]
        master: Option<PathBuf>,
        /// Configuration holding the [reconstruction] section.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Reference matrix to report the fidelity against.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Density matrix of the downconversion model.
    Theory {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two matrix files.
    Compare { a: PathBuf, b: PathBuf },
    /// Heatmap (PNG) of a scan or contour plot (SVG) of a matrix.
    Plot {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn num(x: f64) -> String {
    format!("{x:.8e}")
}

fn simulate(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    preset: Option<Preset>,
    save_source: Option<&Path>,
) -> Result<()> {
    let cfg = Config::from_path(config)?;
    let master = cfg.master_amplitude()?;
    let (rho, provenance) = cfg.source_state(&master)?;
    if let Some(path) = save_source {
        io::write_matrix(path, &rho, &provenance)?;
    }
    let scan = cfg.scan_grid(preset)?;
    let seed = seed.or(cfg.seed);
    let ifg = simulate_scan(&master, &rho, &scan, &cfg.params()?, cfg.exposure()?, seed)?;
    io::write_scan(out, &ifg)?;
    println!("points       {}", scan.len());
    println!("mean counts  {}", num(ifg.mean_counts()));
    println!("dip depth    {}", num(dip_function(&master, &rho, 0.0)?));
    println!("seed         {}", seed.map_or("none (noiseless)".to_string(), |s| s.to_string()));
    Ok(())
}

fn reconstruct_cmd(
    scan: &Path,
    master: Option<&Path>,
    config: Option<&Path>,
    out: &Path,
    truth: Option<&Path>,
) -> Result<()> {
    let recon_cfg = match config {
        Some(p) => Some(Config::from_path(p)?),
        None => None,
    };
    let master_cfg = match (master, &recon_cfg) {
        (Some(p), _) => Config::from_path(p)?,
        (None, Some(c)) => c.clone(),
        (None, None) => return Err(Error::Config("reconstruct needs --master or --config with a [master] section".into())),
    };
    let master = master_cfg.master_amplitude()?;
    let settings = recon_cfg.as_ref().unwrap_or(&master_cfg).reconstruction;
    let ifg = io::read_scan(scan)?;
    let (rho, report) = reconstruct(&ifg, &master, &settings)?;
    io::write_matrix(out, &rho, &Provenance::Reconstruction { report })?;
    println!("n_estimate          {}", num(report.n_estimate));
    println!("nominal n           {}", num(ifg.nominal_n()));
    println!("background          {}", num(report.background_estimate));
    println!("residual rms        {}", num(report.residual_rms));
    println!("masked fraction     {}", num(report.masked_fraction));
    println!("min eigenvalue raw  {}", num(report.min_eigenvalue_raw));
    println!("purity              {}", num(rho.purity()?));
    if let Some(t) = truth {
        let (reference, _) = io::read_matrix(t)?;
        let reference = reference.restricted_to(&amplitude_mask(&master, settings.amp_floor))?;
        println!("fidelity            {}", num(rho.overlap_fidelity(&reference)?));
        println!("relative frobenius  {}", num(rho.relative_frobenius(&reference)?));
    }
    Ok(())
}

fn theory(config: &Path, out: &Path) -> Result<()> {
    let cfg = Config::from_path(config)?;
    let master = cfg.master_amplitude()?;
    let (crystal, pump) = match &cfg.source {
        Some(SourceSpec::Spdc { crystal, pump }) => (*crystal, pump.clone()),
        _ => return Err(Error::Config("theory needs a [source] section with kind = \"spdc\"".into())),
    };
    let (rho, prov) = cfg.theory_state(&master, &crystal, &pump)?;
    io::write_matrix(out, &rho, &prov)?;
    if let Provenance::Theory { purity, schmidt_number, .. } = &prov {
        println!("purity          {}", num(*purity));
        println!("schmidt number  {}", num(*schmidt_number));
    }
    if let Some(sweep) = &cfg.sweep {
        println!("filter_fwhm_nm  purity");
        for &w in &sweep.filter_fwhm_nm {
            let c = homtomo::spdc::CrystalConfig { filter_fwhm_nm: w, ..crystal };
            let (r, _) = cfg.theory_state(&master, &c, &pump)?;
            println!("{w:<15} {}", num(r.purity()?));
        }
    }
    Ok(())
}

fn compare_cmd(a: &Path, b: &Path) -> Result<()> {
    let (ra, _) = io::read_matrix(a)?;
    let (rb, _) = io::read_matrix(b)?;
    print!("{}", compare(&ra, &rb)?);
    Ok(())
}

fn plot_cmd(input: &Path, out: &Path) -> Result<()> {
    match io::peek_format(input)?.as_str() {
        SCAN_FORMAT => plot::write_scan_png(out, &io::read_scan(input)?),
        MATRIX_FORMAT => plot::write_matrix_svg(out, &io::read_matrix(input)?.0),
        other => Err(Error::Format(format!("{}: unknown format tag {other:?}", input.display()))),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, seed, preset, save_source } => {
            simulate(&config, &out, seed, preset, save_source.as_deref())
        }
        Command::Reconstruct { scan, master, config, out, truth } => {
            reconstruct_cmd(&scan, master.as_deref(), config.as_deref(), &out, truth.as_deref())
        }
        Command::Theory { config, out } => theory(&config, &out),
        Command::Compare { a, b } => compare_cmd(&a, &b),
        Command::Plot { input, out } => plot_cmd(&input, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
