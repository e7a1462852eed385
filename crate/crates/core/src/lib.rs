//! Spectral density matrix of single photons from two-dimensional
//! Hong-Ou-Mandel interferograms.
//!
//! A photon of unknown spectral state `ρ(ω, ω′)` interferes on a 50/50
//! beamsplitter with a weak double pulse derived from a master laser of known
//! amplitude `A(ω)`. Recording coincidences as a function of the two pulselet
//! delays `(t₁, t₂)` gives an interferogram whose carrier sideband is the
//! two-time transform of `A*(ω₁) ρ(ω₁, ω₂) A(ω₂)`.
//!
//! * [`forward`] evaluates the coincidence model and simulates scans.
//! * [`reconstruct`] inverts a scan back to `ρ`.
//! * [`spdc`] builds reference states from a type-I downconversion model.
//! * [`io`] and [`plot`] read and write scans and matrices.

pub mod analysis;
pub mod config;
pub mod error;
pub mod forward;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod plot;
pub mod reconstruct;
pub mod spdc;
pub mod state;
pub mod transform;

pub use error::{Error, Result, Stage};
pub use forward::{
    coincidence_probability, dip_function, lo_amplitude, michelson_s, overlap_q, rho_tilde, simulate_scan,
    ExperimentParams, Interferogram, LoPulsePair,
};
pub use grid::{FrequencyGrid, ScanGrid};
pub use reconstruct::{reconstruct, ReconstructionConfig, ReconstructionReport};
pub use state::{SpectralAmplitude, SpectralDensityMatrix};
