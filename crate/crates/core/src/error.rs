use thiserror::Error;

/// Errors raised by validation and the numerical pipelines.
///
/// Numeric payloads are reported as `f64` regardless of the working precision.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("trace is {0} instead of 1")]
    TraceNotOne(f64),
    #[error("outcome {label} is not a projection (defect {defect:.3e})")]
    NotProjection { label: String, defect: f64 },
    #[error("outcomes {first} and {second} are not orthogonal (overlap {overlap:.3e})")]
    NotOrthogonal {
        first: String,
        second: String,
        overlap: f64,
    },
    #[error("projections do not sum to the identity (defect {0:.3e})")]
    NotComplete(f64),
    #[error("empty measurement")]
    EmptyPvm,
    #[error("label count {labels} does not match projection count {projections}")]
    LabelMismatch { labels: usize, projections: usize },
    #[error("duplicate outcome label {0}")]
    DuplicateLabel(String),
    #[error("state is not pure (purity {0})")]
    NotPure(f64),
    #[error("probe spectrum could not be split unambiguously after {0} attempts")]
    DegenerateSplit(usize),
    #[error("numerical rank is ambiguous: {0}")]
    NumericalRankAmbiguity(String),
    #[error("post-verification failed (defect {0:.3e})")]
    VerificationFailed(f64),
    #[error("algebra is the full matrix algebra")]
    NotProper,
    #[error("block index {index} out of range for {blocks} blocks")]
    BadBlock { index: usize, blocks: usize },
    #[error("invalid memory state: {0}")]
    InvalidSigma(String),
    #[error("state is not an A-ZUS (homomorphism defect {hom_defect:.3e}, commutant defect {commutant_defect:.3e})")]
    NotAZus {
        hom_defect: f64,
        commutant_defect: f64,
    },
    #[error("reduced state does not have the commutant block form (defect {0:.3e})")]
    BlockStructureDefect(f64),
    #[error("not perfectly distinguishable: {0}")]
    NotPerfect(String),
    #[error("unknown setting {0}")]
    UnknownSetting(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("problem file: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimMismatch(_) => "DimMismatch",
            Error::NonFinite => "NonFinite",
            Error::NotHermitian(_) => "NotHermitian",
            Error::NotPsd(_) => "NotPsd",
            Error::TraceNotOne(_) => "TraceNotOne",
            Error::NotProjection { .. } => "NotProjection",
            Error::NotOrthogonal { .. } => "NotOrthogonal",
            Error::NotComplete(_) => "NotComplete",
            Error::EmptyPvm => "EmptyPvm",
            Error::LabelMismatch { .. } => "LabelMismatch",
            Error::DuplicateLabel(_) => "DuplicateLabel",
            Error::NotPure(_) => "NotPure",
            Error::DegenerateSplit(_) => "DegenerateSplit",
            Error::NumericalRankAmbiguity(_) => "NumericalRankAmbiguity",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::NotProper => "NotProper",
            Error::BadBlock { .. } => "BadBlock",
            Error::InvalidSigma(_) => "InvalidSigma",
            Error::NotAZus { .. } => "NotAZus",
            Error::BlockStructureDefect(_) => "BlockStructureDefect",
            Error::NotPerfect(_) => "NotPerfect",
            Error::UnknownSetting(_) => "UnknownSetting",
            Error::InvalidStructure(_) => "InvalidStructure",
            Error::Schema(_) => "Schema",
        }
    }
}
