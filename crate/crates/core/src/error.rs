use std::fmt;

/// Pipeline stage tag attached to reconstruction failures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Demodulate,
    EstimateS,
    ExtractRhoTime,
    ToFrequency,
    Deconvolve,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Demodulate => "demodulate",
            Stage::EstimateS => "estimate_s_and_n",
            Stage::ExtractRhoTime => "extract_rho_time",
            Stage::ToFrequency => "to_frequency",
            Stage::Deconvolve => "deconvolve_amplitude",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("dark port: S = {0:e} is below the interference threshold")]
    DarkPort(f64),
    #[error("aliasing: {0}")]
    Aliasing(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("scan too short: {0}")]
    ScanTooShort(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("insufficient bandwidth: {0:.3} of the grid falls below the amplitude floor")]
    InsufficientBandwidth(f64),
    #[error("grid coverage: {0}")]
    Coverage(String),
    #[error("format: {0}")]
    Format(String),
    #[error("degenerate plot: {0}")]
    DegeneratePlot(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(stage: Stage) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage { stage, source: Box::new(e) }
    }

    /// Process exit code used by the command-line tool: 2 for data and
    /// format problems, 3 for numerical guards.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Size(_)
            | Error::InvalidGrid(_)
            | Error::GridMismatch(_)
            | Error::InvalidParam(_)
            | Error::Config(_)
            | Error::Format(_)
            | Error::Io(_) => 2,
            Error::DegenerateState(_)
            | Error::Normalization(_)
            | Error::DarkPort(_)
            | Error::Aliasing(_)
            | Error::ScanTooShort(_)
            | Error::Resolution(_)
            | Error::InsufficientBandwidth(_)
            | Error::Coverage(_)
            | Error::DegeneratePlot(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
