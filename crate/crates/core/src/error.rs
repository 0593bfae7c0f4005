use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point lies outside the domain where a function is defined.
    #[error("outside domain: {0}")]
    Domain(String),

    #[error("{what} = {actual} exceeds the cap of {cap}")]
    SizeCap { what: &'static str, actual: usize, cap: usize },

    #[error("tau diverges at alpha={alpha}, beta={beta}, d={d}")]
    TauDiverges { alpha: f64, beta: f64, d: u32 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
