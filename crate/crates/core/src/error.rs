use thiserror::Error;

/// Errors surfaced by every layer of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid epsilon split: {0}")]
    InvalidSplit(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("region is empty: {0}")]
    EmptyRegion(String),

    #[error("feasible set unbounded along basis axis {0}")]
    UnboundedAxis(usize),

    #[error("sampler chain stalled: {0}")]
    ChainStall(String),

    #[error("posterior weights degenerate: {0}")]
    DegenerateWeights(String),

    #[error("linear program certificate check failed: {0}")]
    LpCertificate(String),

    #[error("mesh export requires a qubit (d = 2), got d = {0}")]
    NonQubit(usize),

    #[error("degenerate region: {0}")]
    DegenerateMesh(String),
}

/// Machine-readable error kind, stable across releases; used by the CLI
/// error channel.
impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "InvalidDimension",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidState(_) => "InvalidState",
            Error::InvalidPovm(_) => "InvalidPovm",
            Error::DomainError(_) => "DomainError",
            Error::InvalidSplit(_) => "InvalidSplit",
            Error::InvalidGroup(_) => "InvalidGroup",
            Error::BasisMismatch(_) => "BasisMismatch",
            Error::EmptyRegion(_) => "EmptyRegion",
            Error::UnboundedAxis(_) => "UnboundedAxis",
            Error::ChainStall(_) => "ChainStall",
            Error::DegenerateWeights(_) => "DegenerateWeights",
            Error::LpCertificate(_) => "LpCertificate",
            Error::NonQubit(_) => "NonQubit",
            Error::DegenerateMesh(_) => "DegenerateMesh",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
