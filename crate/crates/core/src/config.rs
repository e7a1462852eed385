//! TOML run configuration shared by the command-line tool and examples.
//!
//! ```toml
//! preset = "desk"
//! exposure_s = 0.08
//! seed = 7
//!
//! [master]
//! kind = "gaussian"
//! center_nm = 774.0
//! duration_fs = 30.0
//!
//! [source]
//! kind = "spdc"
//! pump = { kind = "gaussian", bandwidth_nm = 1.3 }
//! crystal = { filter_fwhm_nm = 10.0 }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::ExperimentParams;
use crate::grid::{angular_frequency, wavelength_width_to_omega, FrequencyGrid, ScanGrid};
use crate::io::{read_matrix, Provenance};
use crate::reconstruct::ReconstructionConfig;
use crate::spdc::{build_jsa_on, pump_grid_for, shg_pump, trace_out_idler, CrystalConfig};
use crate::state::{sigma_from_duration, sigma_from_fwhm, SpectralAmplitude, SpectralDensityMatrix};

pub const DEFAULT_GRID_STEP: f64 = 0.0025;
pub const DEFAULT_GRID_COUNT: usize = 128;
pub const DEFAULT_EXPOSURE_S: f64 = 0.08;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 4000 × 25 points at 0.233 fs × 66 fs.
    Paper,
    /// 2048 × 32 points at 1 fs × 15 fs.
    Desk,
}

impl Preset {
    pub fn scan(self) -> ScanGrid {
        match self {
            Preset::Paper => ScanGrid::paper(),
            Preset::Desk => ScanGrid::desk(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Grid center as a wavelength; defaults to the master center.
    pub center_nm: Option<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_step() -> f64 {
    DEFAULT_GRID_STEP
}

fn default_count() -> usize {
    DEFAULT_GRID_COUNT
}

/// Master pulse spectral amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MasterSpec {
    /// Gaussian with either a transform-limited duration or an intensity
    /// FWHM bandwidth, and optional group-delay dispersion.
    Gaussian {
        center_nm: f64,
        duration_fs: Option<f64>,
        bandwidth_nm: Option<f64>,
        #[serde(default)]
        gdd_fs2: f64,
    },
    /// Complex spectrum sampled at ascending angular frequencies (rad/fs),
    /// linearly interpolated onto the grid and zero outside.
    Tabulated { omega: Vec<f64>, re: Vec<f64>, im: Vec<f64> },
}

impl MasterSpec {
    /// Carrier used when no grid center is configured.
    pub fn center(&self) -> Result<f64> {
        match self {
            MasterSpec::Gaussian { center_nm, .. } => positive("master.center_nm", *center_nm).map(angular_frequency),
            MasterSpec::Tabulated { omega, re, im } => {
                check_table(omega, re, im)?;
                let (mut num, mut den) = (0.0, 0.0);
                for ((w, r), i) in omega.iter().zip(re).zip(im) {
                    let p = r * r + i * i;
                    num += w * p;
                    den += p;
                }
                if !(den > 0.0) {
                    return Err(Error::Config("master table is identically zero".into()));
                }
                Ok(num / den)
            }
        }
    }

    pub fn amplitude(&self, grid: &FrequencyGrid) -> Result<SpectralAmplitude> {
        match self {
            MasterSpec::Gaussian { center_nm, duration_fs, bandwidth_nm, gdd_fs2 } => {
                let center_nm = positive("master.center_nm", *center_nm)?;
                let sigma = match (duration_fs, bandwidth_nm) {
                    (Some(d), None) => sigma_from_duration(positive("master.duration_fs", *d)?),
                    (None, Some(b)) => {
                        sigma_from_fwhm(wavelength_width_to_omega(center_nm, positive("master.bandwidth_nm", *b)?))
                    }
                    _ => {
                        return Err(Error::Config(
                            "master: give exactly one of duration_fs and bandwidth_nm".into(),
                        ))
                    }
                };
                SpectralAmplitude::gaussian(*grid, angular_frequency(center_nm), sigma, *gdd_fs2)
            }
            MasterSpec::Tabulated { omega, re, im } => {
                check_table(omega, re, im)?;
                let values = grid.omegas().iter().map(|&w| interpolate(omega, re, im, w)).collect();
                SpectralAmplitude::new(*grid, values)?
                    .normalized()
                    .map_err(|_| Error::Config("master table does not overlap the frequency grid".into()))
            }
        }
    }
}

fn check_table(omega: &[f64], re: &[f64], im: &[f64]) -> Result<()> {
    if omega.len() < 2 || omega.len() != re.len() || omega.len() != im.len() {
        return Err(Error::Config(format!(
            "master.omega, master.re and master.im need equal lengths ≥ 2, got {}, {}, {}",
            omega.len(),
            re.len(),
            im.len()
        )));
    }
    if omega.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("master.omega must be strictly ascending".into()));
    }
    Ok(())
}

fn interpolate(omega: &[f64], re: &[f64], im: &[f64], w: f64) -> C64 {
    if w < omega[0] || w > omega[omega.len() - 1] {
        return C64::new(0.0, 0.0);
    }
    let hi = omega.partition_point(|&x| x < w).max(1);
    let lo = hi - 1;
    let t = (w - omega[lo]) / (omega[hi] - omega[lo]);
    C64::new(re[lo] + t * (re[hi] - re[lo]), im[lo] + t * (im[hi] - im[lo]))
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("{field} = {v} must be > 0")))
    }
}

/// UV pump for the downconversion source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PumpSpec {
    /// Second harmonic of the master pulse.
    Shg,
    /// Gaussian with intensity FWHM `bandwidth_nm`; centered at twice the
    /// grid center unless `center_nm` is given.
    Gaussian {
        center_nm: Option<f64>,
        bandwidth_nm: f64,
        #[serde(default)]
        gdd_fs2: f64,
    },
}

/// The state fed into the interferometer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Pure Gaussian photon. The width is either a fraction of the master
    /// intensity rms bandwidth or an intensity FWHM in nm.
    Gaussian {
        center_nm: Option<f64>,
        bandwidth_fraction: Option<f64>,
        bandwidth_nm: Option<f64>,
        #[serde(default)]
        gdd_fs2: f64,
    },
    /// Matrix file, path relative to the configuration file.
    Matrix { path: PathBuf },
    Spdc {
        #[serde(default)]
        crystal: CrystalConfig,
        pump: PumpSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub filter_fwhm_nm: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub preset: Option<Preset>,
    pub scan: Option<ScanGrid>,
    pub grid: Option<GridSpec>,
    pub master: Option<MasterSpec>,
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub params: ExperimentParams,
    pub exposure_s: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub reconstruction: ReconstructionConfig,
    pub sweep: Option<SweepSpec>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn master_spec(&self) -> Result<&MasterSpec> {
        self.master.as_ref().ok_or_else(|| Error::Config("missing [master] section".into()))
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        let master_center = self.master_spec()?.center()?;
        let (center, step, count) = match &self.grid {
            Some(g) => {
                let center = match g.center_nm {
                    Some(nm) => angular_frequency(positive("grid.center_nm", nm)?),
                    None => master_center,
                };
                (center, positive("grid.step", g.step)?, g.count)
            }
            None => (master_center, DEFAULT_GRID_STEP, DEFAULT_GRID_COUNT),
        };
        FrequencyGrid::new(center, step, count).map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn master_amplitude(&self) -> Result<SpectralAmplitude> {
        self.master_spec()?.amplitude(&self.frequency_grid()?)
    }

    /// Explicit `[scan]` table, else the preset (command-line override
    /// first), else the desk preset.
    pub fn scan_grid(&self, preset: Option<Preset>) -> Result<ScanGrid> {
        let scan = match (preset, &self.scan, self.preset) {
            (Some(p), _, _) => p.scan(),
            (None, Some(s), _) => *s,
            (None, None, Some(p)) => p.scan(),
            (None, None, None) => ScanGrid::desk(),
        };
        scan.validate().map_err(|e| Error::Config(format!("scan: {e}")))?;
        Ok(scan)
    }

    pub fn exposure(&self) -> Result<f64> {
        positive("exposure_s", self.exposure_s.unwrap_or(DEFAULT_EXPOSURE_S))
    }

    pub fn params(&self) -> Result<ExperimentParams> {
        self.params.validate().map_err(|e| Error::Config(format!("params: {e}")))?;
        Ok(self.params)
    }

    /// Density matrix of the configured source on the master grid.
    pub fn source_state(&self, master: &SpectralAmplitude) -> Result<(SpectralDensityMatrix, Provenance)> {
        let source = self.source.as_ref().ok_or_else(|| Error::Config("missing [source] section".into()))?;
        let grid = master.grid;
        match source {
            SourceSpec::Gaussian { center_nm, bandwidth_fraction, bandwidth_nm, gdd_fs2 } => {
                let center = match center_nm {
                    Some(nm) => angular_frequency(positive("source.center_nm", *nm)?),
                    None => grid.center,
                };
                let sigma = match (bandwidth_fraction, bandwidth_nm) {
                    (Some(f), None) => positive("source.bandwidth_fraction", *f)? * intensity_rms(master),
                    (None, Some(b)) => sigma_from_fwhm(wavelength_width_to_omega(
                        crate::grid::wavelength_nm(center),
                        positive("source.bandwidth_nm", *b)?,
                    )),
                    _ => {
                        return Err(Error::Config(
                            "source: give exactly one of bandwidth_fraction and bandwidth_nm".into(),
                        ))
                    }
                };
                let photon = SpectralAmplitude::gaussian(grid, center, sigma, *gdd_fs2)?;
                let description = format!("gaussian photon, center {center:.6} rad/fs, rms {sigma:.6} rad/fs, gdd {gdd_fs2} fs^2");
                Ok((SpectralDensityMatrix::pure(&photon), Provenance::Source { description }))
            }
            SourceSpec::Matrix { path } => {
                let full = self.base_dir.join(path);
                let (rho, prov) = read_matrix(&full)?;
                grid.ensure_matches(&rho.grid)?;
                Ok((rho, prov))
            }
            SourceSpec::Spdc { crystal, pump } => self.theory_state(master, crystal, pump),
        }
    }

    /// Reduced signal state of the downconversion model on the master grid.
    pub fn theory_state(
        &self,
        master: &SpectralAmplitude,
        crystal: &CrystalConfig,
        pump: &PumpSpec,
    ) -> Result<(SpectralDensityMatrix, Provenance)> {
        crystal.validate().map_err(|e| Error::Config(format!("source.crystal: {e}")))?;
        let grid = master.grid;
        let (pump_amp, pump_desc) = match pump {
            PumpSpec::Shg => (shg_pump(master)?, "second harmonic of the master".to_string()),
            PumpSpec::Gaussian { center_nm, bandwidth_nm, gdd_fs2 } => {
                let pg = pump_grid_for(&grid)?;
                let center = match center_nm {
                    Some(nm) => angular_frequency(positive("source.pump.center_nm", *nm)?),
                    None => pg.center,
                };
                let width = wavelength_width_to_omega(
                    crate::grid::wavelength_nm(center),
                    positive("source.pump.bandwidth_nm", *bandwidth_nm)?,
                );
                (
                    SpectralAmplitude::gaussian(pg, center, sigma_from_fwhm(width), *gdd_fs2)?,
                    format!("gaussian, center {center:.6} rad/fs, FWHM {bandwidth_nm} nm, gdd {gdd_fs2} fs^2"),
                )
            }
        };
        let jsa = build_jsa_on(&pump_amp, grid, grid, crystal)?;
        let schmidt = jsa.schmidt_coefficients();
        let rho = trace_out_idler(&jsa)?;
        let purity = rho.purity()?;
        let schmidt_number = 1.0 / schmidt.iter().map(|s| s.powi(4)).sum::<f64>();
        Ok((rho, Provenance::Theory { crystal: *crystal, pump: pump_desc, purity, schmidt_number }))
    }
}

/// Intensity rms bandwidth of an amplitude, rad/fs.
pub fn intensity_rms(a: &SpectralAmplitude) -> f64 {
    let mean = a.mean_omega();
    let var: f64 = a
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| v.norm_sqr() * (a.grid.omega(k) - mean).powi(2))
        .sum::<f64>()
        * a.grid.step;
    var.sqrt()
}
