use thiserror::Error;

/// Errors produced by the laboratory.
///
/// `Config` covers every rejected input (bad grid sizes, unknown model names,
/// malformed tables). `Internal` marks conditions that cannot occur on a valid
/// finite strongly connected graph; seeing one means a solver invariant broke.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("momentum range exhausted: supremum attained on the boundary of [-{range}, {range}]")]
    RangeExhausted { range: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linear program is {0}")]
    LpStatus(&'static str),

    #[error("strict subsolution check failed: {0}")]
    NotStrict(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
