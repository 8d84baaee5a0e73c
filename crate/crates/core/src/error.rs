use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("no table for {host} in degree {degree}")]
    UnsupportedTable { host: String, degree: i32 },
    #[error("unknown composite: {morph} after {gen}")]
    UnknownComposite { morph: String, gen: String },
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),
    #[error("flag mismatch: {0}")]
    FlagMismatch(String),
    #[error("no carrier: {0}")]
    NoCarrier(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        pos,
        msg: msg.into(),
    })
}
