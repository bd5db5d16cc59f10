use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("series diverges: {0}")]
    DivergentSeries(String),
    #[error("operation undefined on the zero element")]
    ZeroValue,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("invalid level ({i},{j}): {reason}")]
    InvalidLevel { i: i32, j: i32, reason: String },
    #[error("coset budget exceeded: {needed} cosets needed, budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("sets are not equal; witness: {witness}")]
    NotEqualSets { witness: String },
    #[error("presentation is not reduced: component {0} is of the form B \\ B")]
    NotReduced(usize),
    #[error("right translate leaves the ring of measurable sets: {0}")]
    NotRepresentable(String),
    #[error("unsupported support for convolution: {0}")]
    UnsupportedSupport(String),
    #[error("invalid set presentation: {0}")]
    InvalidPresentation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// The variant name, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::DivergentSeries(_) => "DivergentSeries",
            Error::ZeroValue => "ZeroValue",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::NotInvertible => "NotInvertible",
            Error::InvalidLevel { .. } => "InvalidLevel",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::NotEqualSets { .. } => "NotEqualSets",
            Error::NotReduced(_) => "NotReduced",
            Error::NotRepresentable(_) => "NotRepresentable",
            Error::UnsupportedSupport(_) => "UnsupportedSupport",
            Error::InvalidPresentation(_) => "InvalidPresentation",
            Error::Parse(_) => "Parse",
            Error::UnknownName(_) => "UnknownName",
            Error::Internal(_) => "Internal",
        }
    }
}
