use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: n = {n} outside the supported range 1..={limit}")]
    Size {
        what: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("exact arithmetic overflow while computing g at mask {mask:#b}")]
    Overflow { mask: u64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("level error: {0}")]
    Level(String),
    #[error("invalid weight table: {0}")]
    InvalidTable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("bound breach: |g| = {value} exceeds sqrt(n)^n = {bound} at n = {n}")]
    BoundBreach { n: usize, value: f64, bound: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn size(what: &'static str, n: usize, limit: usize) -> Self {
        Error::Size { what, n, limit }
    }
}

/// Rejects `n = 0` and `n > limit`.
pub(crate) fn check_n(what: &'static str, n: usize, limit: usize) -> Result<()> {
    if n == 0 || n > limit {
        Err(Error::size(what, n, limit))
    } else {
        Ok(())
    }
}
