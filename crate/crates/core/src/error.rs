use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Missing or wrong header, malformed manifest line, bad spec file.
    #[error("format error: {0}")]
    Format(String),

    /// A field could not be parsed as a number. `row` is the 1-based line
    /// number in the source, counting the header as line 1.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("value out of range at row {row}: {message}")]
    Range { row: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("series is empty")]
    EmptySeries,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),

    #[error("no valid scale for component counts {c_min}..={c_max}")]
    NoValidScale { c_min: usize, c_max: usize },

    #[error("scale estimate has {0} components, need at least 2")]
    InsufficientComponents(usize),

    #[error("regressor is constant")]
    DegenerateRegressor,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable name, used in error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Format(_) => "FormatError",
            Error::Parse { .. } => "ParseError",
            Error::Range { .. } => "RangeError",
            Error::Domain(_) => "DomainError",
            Error::EmptyCorpus => "EmptyCorpusError",
            Error::EmptySeries => "EmptySeriesError",
            Error::InsufficientData(_) => "InsufficientDataError",
            Error::DegenerateFit(_) => "DegenerateFitError",
            Error::InvalidClustering(_) => "InvalidClusteringError",
            Error::NoValidScale { .. } => "NoValidScaleError",
            Error::InsufficientComponents(_) => "InsufficientComponentsError",
            Error::DegenerateRegressor => "DegenerateRegressorError",
            Error::Config(_) => "ConfigError",
            Error::Io { .. } => "IoError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
