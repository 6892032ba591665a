use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("rational coordinate outside the double-precision range")]
    Range,
    #[error("cannot parse rational `{0}`")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("words belong to different presentations")]
    PresentationMismatch,
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("generator index {0} out of range")]
    UnknownGenerator(usize),
    #[error("enumeration exceeded the cap of {0} words")]
    ResourceLimit(usize),
    #[error("cannot parse word `{0}`")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("operator acts on {op} cosets but the vector uses coset {coset}")]
    CosetMismatch { op: usize, coset: usize },
    #[error("infinite geometric string needs |ratio| < 1")]
    DivergentString,
    #[error("non-convergent overlap in inner product")]
    NonConvergent,
    #[error("pivot norm² {0} has no square root in the field; needs numeric fallback")]
    NeedsNumericFallback(String),
    #[error("cyclic window must be at least 2, got {0}")]
    Window(i64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelationError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("observable is not a self-adjoint unitary (S² ≠ I)")]
    NotInvolution,
    #[error("observable does not satisfy V³ = I")]
    NotOrder3,
    #[error("vector family is not orthonormal")]
    NotOrthonormal,
    #[error("matrix is not an isometry (deviation {0:.3e})")]
    NotIsometry(f64),
    #[error("invalid PVM: {0}")]
    InvalidPvm(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("marginal depends on the other party's input: {0}")]
    Marginal(String),
    #[error("witness self-test failed: {0}")]
    SelfTest(String),
    #[error("malformed table: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptimizerError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
