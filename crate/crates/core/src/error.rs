use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("evaluation at z = 0 of a matrix with negative powers")]
    NegativePowerAtZero,
    #[error("determinant is identically zero")]
    ZeroDeterminant,
    #[error("determinantal root on the unit circle (|z| = {modulus})")]
    UnitCircleRoot { modulus: f64 },
    #[error("inside/outside split of det b(z) is not rational; exact factorisation unavailable")]
    IrrationalSplit,
    #[error("negative powers did not cancel in a product expected to be polynomial")]
    NotPolynomial,
    #[error("complex zero {re}+{im}i: real-coefficient mirroring of conjugate pairs is not supported")]
    ComplexRoot { re: f64, im: f64 },
    #[error("no determinantal zero at {0}")]
    NotARoot(f64),
    #[error("kernel of b(alpha) has dimension {0} > 1")]
    KernelDimension(usize),
    #[error("leading block of p0 singular even after row pivoting")]
    SingularLeadingBlock,
    #[error("inadmissible density parameters: {0}")]
    InadmissibleDensity(String),
    #[error("infeasible partial indices (kappa={kappa}, k={k}) for n={n}, q={q}")]
    InfeasibleIndices { kappa: usize, k: usize, n: usize, q: usize },
    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterLength { expected: usize, got: usize },
    #[error("restriction violated at tau entry {index}: residual {residual}")]
    RestrictionViolated { index: usize, residual: f64 },
    #[error("unstable autoregressive polynomial")]
    Unstable,
    #[error("identification scheme not defined for this B: {0}")]
    SchemeUndefined(&'static str),
    #[error("data has {got} columns, model has dimension {expected}")]
    DataShape { expected: usize, got: usize },
    #[error("sample too short: T={t}, need more than {needed}")]
    SampleTooShort { t: usize, needed: usize },
    #[error("bordered information matrix is singular (near non-identifiability)")]
    NearNonIdentifiable,
    #[error("series has zero variance")]
    ConstantSeries,
    #[error("target entry is structurally zero for every rotation")]
    StructurallyZero,
    #[error("no start produced a finite objective")]
    NoValidStart,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
