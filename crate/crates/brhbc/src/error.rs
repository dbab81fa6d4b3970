use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("frequency {f} Hz outside tabulated range [{lo}, {hi}] Hz")]
    OutOfRange { f: f64, lo: f64, hi: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("unknown tissue `{0}`")]
    UnknownTissue(String),
    #[error("singular network at {0} Hz")]
    Singular(f64),
    #[error("empty band")]
    EmptyBand,
    #[error("zero capacity")]
    ZeroCapacity,
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("no exposure limit covers {0} Hz")]
    MissingLimit(f64),
    #[error("correction table does not cover {0} Hz")]
    CoverageGap(f64),
    #[error("fit not identifiable: {0}")]
    NonIdentifiable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}
