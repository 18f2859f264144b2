use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radicand {0} is a perfect square; the value would be rational")]
    PerfectSquare(u64),

    #[error("denominator must be nonzero")]
    ZeroDenominator,

    #[error("radicand must be positive")]
    ZeroRadicand,

    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange { what: &'static str, value: String, range: &'static str },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("counts may exceed the exact range of the modular transform: {0}")]
    CapacityExceeded(String),

    #[error("error audit failed: bound {bound:e} exceeds tolerance {tol:e}")]
    AuditFailure { bound: f64, tol: f64 },

    #[error("invalid cup geometry: {0}")]
    InvalidGeometry(String),

    #[error("symmetric sum left an imaginary residue of {0:e}")]
    ImaginaryResidue(f64),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
