use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spin system: {0}")]
    InvalidSystem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("full-space oracle refused: N = {n} exceeds the memory guard of {max} satellites")]
    OracleTooLarge { n: usize, max: usize },

    #[error("state is not representable in the collective basis: {0}")]
    NonCollective(String),

    #[error("coherence order l = {0} is not present in the series")]
    UnknownLine(u32),

    #[error("line-shape fit did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    FitDidNotConverge {
        iterations: usize,
        best_residual: f64,
    },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("degenerate calibration: {0}")]
    DegenerateCalibration(String),

    #[error("unphysical estimate: {0}")]
    Unphysical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
}

impl Error {
    /// True for failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::FitDidNotConverge { .. }
                | Error::DegenerateSpectrum(_)
                | Error::Unphysical(_)
                | Error::NonCollective(_)
        )
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
