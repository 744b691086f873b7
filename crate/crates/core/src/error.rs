use thiserror::Error;

/// Errors raised anywhere in the engine.
///
/// Every variant carries a stable machine-readable code (see [`Error::code`])
/// that the command-line front end serializes into its reports.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("division by an identically zero expression")]
    DivisionByZero,
    #[error("variable `{0}` has no assigned value")]
    UnassignedVariable(String),
    #[error("real variable `{0}` was assigned a non-real value")]
    NonRealAssignment(String),
    #[error("variable `{name}` is already declared as {existing}")]
    VariableKindConflict { name: String, existing: &'static str },
    #[error("wedge product exceeds top bidegree ({p},{q}) for n = {n}")]
    DegreeOverflow { p: usize, q: usize, n: usize },
    #[error("bidegree mismatch: expected {expected}, found {found}")]
    BidegreeMismatch { expected: String, found: String },
    #[error("Jacobi identity fails: d(d e{generator}) = {residue}")]
    JacobiFailure { generator: usize, residue: String },
    #[error("complex structure is not integrable: (0,2) part of d e{generator} is {residue}")]
    IntegrabilityFailure { generator: usize, residue: String },
    #[error("constraint `{0}` has no solvable leading monomial")]
    NonReducibleConstraint(String),
    #[error("metric matrix is singular")]
    SingularMetric,
    #[error("metric is not Hermitian: entry ({row},{col})")]
    NonHermitianMetric { row: usize, col: usize },
    #[error("metric is not positive definite at the sampled point (leading minor {minor})")]
    NotPositiveDefinite { minor: usize },
    #[error("symbolic rank is ambiguous: pivot `{0}` vanishes on the constraint variety; supply a numeric point")]
    RankAmbiguous(String),
    #[error("precondition failed: {0}")]
    PreconditionFailure(String),
    #[error("deformed coframe is not invertible (determinant {0})")]
    NonInvertibleFrame(String),
    #[error("endomorphism is singular (determinant {0})")]
    SingularEndomorphism(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown parameter `{name}` at {line}:{col}")]
    UnknownParameter { name: String, line: usize, col: usize },
    #[error("dimension mismatch at {line}:{col}: {msg}")]
    DimensionMismatch { line: usize, col: usize, msg: String },
    #[error("fixture is missing a `{0}` block")]
    MissingBlock(&'static str),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::UnassignedVariable(_) => "UnassignedVariable",
            Error::NonRealAssignment(_) => "NonRealAssignment",
            Error::VariableKindConflict { .. } => "VariableKindConflict",
            Error::DegreeOverflow { .. } => "DegreeOverflow",
            Error::BidegreeMismatch { .. } => "BidegreeMismatch",
            Error::JacobiFailure { .. } => "JacobiFailure",
            Error::IntegrabilityFailure { .. } => "IntegrabilityFailure",
            Error::NonReducibleConstraint(_) => "NonReducibleConstraint",
            Error::SingularMetric => "SingularMetric",
            Error::NonHermitianMetric { .. } => "NonHermitianMetric",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::RankAmbiguous(_) => "RankAmbiguous",
            Error::PreconditionFailure(_) => "PreconditionFailure",
            Error::NonInvertibleFrame(_) => "NonInvertibleFrame",
            Error::SingularEndomorphism(_) => "SingularEndomorphism",
            Error::Parse { .. } => "ParseError",
            Error::UnknownParameter { .. } => "UnknownParameter",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::MissingBlock(_) => "MissingBlock",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
