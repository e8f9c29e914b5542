use thiserror::Error;

/// Errors raised by kernel construction, evaluation and certification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("non-finite value {0} is not admitted")]
    NonFinite(String),
    #[error("point {value} lies outside the {domain} domain")]
    OutsideDomain { value: String, domain: String },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("series diverges at |t| = {modulus} (radius of convergence {radius})")]
    SeriesDivergence { modulus: f64, radius: f64 },
    #[error("point set must be nonempty")]
    EmptyPointSet,
    #[error("point set contains duplicate points at indices {0} and {1}")]
    DuplicatePoints(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("coefficient {index} is nonzero but the kernel coefficient vanishes: not in RKHS")]
    NotInRkhs { index: usize },
    #[error("truncation bound unavailable: {0}")]
    BoundUnavailable(String),
    #[error("unsupported index {0}: kernel coefficient vanishes")]
    UnsupportedIndex(usize),
    #[error("chain premise 1 <= K fails (min eigenvalue {min_eigenvalue:e})")]
    ChainPremise { min_eigenvalue: f64 },
    #[error("sup-condition violated: diagonal grows by factor {growth:e} over {terms} terms at point {point}")]
    SupConditionViolated { growth: f64, terms: usize, point: usize },
    #[error("divergent frame sum at probe point {0}")]
    DivergentFrame(String),
    #[error("support mismatch at index {0}: coefficient of K is positive where L vanishes")]
    SupportMismatch(usize),
    #[error("depth {0} exceeds the supported maximum of {1}")]
    DepthOverflow(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, KernelError>;
