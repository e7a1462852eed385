//! On-disk formats: a JSON header next to a little-endian `f64` payload.
//!
//! `scan.homscan` holds the header and `scan.homscan.bin` the payload; the
//! header records the payload file name. Both files are written to a
//! temporary name first and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{ExperimentParams, Interferogram};
use crate::grid::{FrequencyGrid, ScanGrid};
use crate::reconstruct::ReconstructionReport;
use crate::spdc::CrystalConfig;
use crate::state::SpectralDensityMatrix;

pub const SCAN_FORMAT: &str = "HOMSCAN/1";
pub const MATRIX_FORMAT: &str = "HOMRHO/1";

fn creator() -> String {
    format!("homtomo {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanHeader {
    pub format: String,
    pub payload: String,
    pub scan: ScanGrid,
    pub exposure_s: f64,
    pub params: ExperimentParams,
    pub seed: Option<u64>,
    pub noiseless: bool,
    pub creator: String,
}

/// Where a density matrix came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Reconstruction { report: ReconstructionReport },
    Theory { crystal: CrystalConfig, pump: String, purity: f64, schmidt_number: f64 },
    Source { description: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub format: String,
    pub payload: String,
    pub grid: FrequencyGrid,
    pub support_mask: Vec<bool>,
    pub provenance: Provenance,
    pub creator: String,
}

/// Sidecar payload path for a header at `path`.
pub fn payload_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".bin");
    path.with_file_name(name)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn encode(values: impl Iterator<Item = f64>) -> Vec<u8> {
    values.flat_map(f64::to_le_bytes).collect()
}

fn decode(bytes: &[u8], expected: usize, what: &Path) -> Result<Vec<f64>> {
    if bytes.len() != 8 * expected {
        return Err(Error::Format(format!(
            "payload {} holds {} bytes, expected {} ({} values)",
            what.display(),
            bytes.len(),
            8 * expected,
            expected
        )));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
}

fn header_json<T: Serialize>(header: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(header).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

#[derive(Deserialize)]
struct FormatTag {
    format: String,
}

/// Format tag of the header at `path`.
pub fn peek_format(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Error::Format(format!("{}: not a text header", path.display())))?;
    let tag: FormatTag =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    Ok(tag.format)
}

fn read_header<T: for<'de> Deserialize<'de>>(path: &Path, format: &str) -> Result<T> {
    let found = peek_format(path)?;
    if found != format {
        return Err(Error::Format(format!("{}: format tag {found:?}, expected {format:?}", path.display())));
    }
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn payload_name(path: &Path) -> String {
    payload_path(path).file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn write_scan(path: &Path, scan: &Interferogram) -> Result<()> {
    let header = ScanHeader {
        format: SCAN_FORMAT.into(),
        payload: payload_name(path),
        scan: scan.scan,
        exposure_s: scan.exposure_s,
        params: scan.params,
        seed: scan.seed,
        noiseless: scan.seed.is_none(),
        creator: creator(),
    };
    write_atomic(&payload_path(path), &encode(scan.counts.iter().copied()))?;
    write_atomic(path, &header_json(&header)?)
}

pub fn read_scan(path: &Path) -> Result<Interferogram> {
    let header: ScanHeader = read_header(path, SCAN_FORMAT)?;
    let payload = path.with_file_name(&header.payload);
    let counts = decode(&fs::read(&payload)?, header.scan.len(), &payload)?;
    Interferogram::new(header.scan, counts, header.exposure_s, header.params, header.seed)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, rho: &SpectralDensityMatrix, provenance: &Provenance) -> Result<()> {
    let header = MatrixHeader {
        format: MATRIX_FORMAT.into(),
        payload: payload_name(path),
        grid: rho.grid,
        support_mask: rho.support_mask.clone(),
        provenance: provenance.clone(),
        creator: creator(),
    };
    write_atomic(&payload_path(path), &encode(rho.values.iter().flat_map(|v| [v.re, v.im])))?;
    write_atomic(path, &header_json(&header)?)
}

pub fn read_matrix(path: &Path) -> Result<(SpectralDensityMatrix, Provenance)> {
    let header: MatrixHeader = read_header(path, MATRIX_FORMAT)?;
    let k = header.grid.count;
    FrequencyGrid::new(header.grid.center, header.grid.step, k)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if header.support_mask.len() != k {
        return Err(Error::Format(format!(
            "{}: support mask has {} entries for a grid of {k}",
            path.display(),
            header.support_mask.len()
        )));
    }
    let payload = path.with_file_name(&header.payload);
    let raw = decode(&fs::read(&payload)?, 2 * k * k, &payload)?;
    let values = Array2::from_shape_vec((k, k), raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
        .map_err(|e| Error::Format(e.to_string()))?;
    let rho = SpectralDensityMatrix::new(header.grid, values)?.with_mask(header.support_mask)?;
    Ok((rho, header.provenance))
}
