use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("law places mass {mass} at the origin")]
    AtomAtZero { mass: f64 },
    #[error("atom {index} has non-positive probability {prob}")]
    NonPositiveProb { index: usize, prob: f64 },
    #[error("atom positions are not strictly increasing at index {index}")]
    UnsortedAtoms { index: usize },
    #[error("atom probabilities sum to {total}, expected 1")]
    MassNotOne { total: f64 },
    #[error("quantization left no mass on the grid")]
    EmptyLaw,
    #[error("law is not centered (mean {mean})")]
    NotCentered { mean: f64 },
    #[error("invalid law specification: {0}")]
    InvalidSpec(String),

    #[error("kernel domain error: {0}")]
    DomainError(String),
    #[error("image series did not converge within {terms} terms")]
    SeriesNotConverged { terms: usize },

    #[error("target probability {target} exceeds available mass {available}")]
    TargetExceedsMass { target: f64, available: f64 },
    #[error("both barrier levels became infinite at step {step}")]
    BothSidesInfinite { step: usize },
    #[error("could not bracket the time increment for target {target}")]
    RootNotBracketed { target: f64 },
    #[error("law support does not match the requested solver ({0})")]
    WrongSupport(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed barrier: {0}")]
    InvalidBarrier(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AtomAtZero { .. } => "AtomAtZero",
            Error::NonPositiveProb { .. } => "NonPositiveProb",
            Error::UnsortedAtoms { .. } => "UnsortedAtoms",
            Error::MassNotOne { .. } => "MassNotOne",
            Error::EmptyLaw => "EmptyLaw",
            Error::NotCentered { .. } => "NotCentered",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::DomainError(_) => "DomainError",
            Error::SeriesNotConverged { .. } => "SeriesNotConverged",
            Error::TargetExceedsMass { .. } => "TargetExceedsMass",
            Error::BothSidesInfinite { .. } => "BothSidesInfinite",
            Error::RootNotBracketed { .. } => "RootNotBracketed",
            Error::WrongSupport(_) => "WrongSupport",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidBarrier(_) => "InvalidBarrier",
            Error::Numerical(_) => "Numerical",
        }
    }
}
