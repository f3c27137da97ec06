use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid truncation {n}: {reason}")]
    InvalidTruncation { n: usize, reason: String },

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("formula not applicable: {0}")]
    FormulaInapplicable(String),

    #[error("unsupported pair: {0}")]
    UnsupportedPair(String),

    #[error("undefined limit: {0}")]
    UndefinedLimit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable short tag used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidTruncation { .. } => "invalid-truncation",
            Error::TruncationTooSmall(_) => "truncation-too-small",
            Error::Contract(_) => "contract-violation",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Domain(_) => "domain",
            Error::FormulaInapplicable(_) => "formula-inapplicable",
            Error::UnsupportedPair(_) => "unsupported-pair",
            Error::UndefinedLimit(_) => "undefined-limit",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
