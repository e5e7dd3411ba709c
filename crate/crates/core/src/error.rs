use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {0} is below the modulus domain start {1}")]
    Domain(String, f64),
    #[error("value {0} lies outside the range of the modulus")]
    Range(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("direction search exhausted at stage {stage}: {detail}")]
    SearchExhausted { stage: usize, detail: String },
    #[error("profile `{0}` violates the nonzero-integral condition")]
    DegenerateProfile(String),
    #[error("every mode was dropped; the trimmed spectrum is empty")]
    EmptySpectrum,
    #[error("geometry rejected: {0}")]
    Geometry(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
