use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian: entry ({row},{col}) differs from the conjugate of ({col},{row}) by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("operator is not an effect: eigenvalue {eigenvalue:e} lies outside [0,1]")]
    NotEffect { eigenvalue: f64 },

    #[error("operator is not a density operator: trace {trace:e} differs from 1")]
    NotDensity { trace: f64 },

    #[error("operator is not a projector: max |P^2 - P| = {deviation:e}")]
    NotProjector { deviation: f64 },

    #[error("not a POVM: {0}")]
    NotPovm(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("family of {size} operators is not a frame: numerical rank {rank} < {required}")]
    NotAFrame { size: usize, rank: usize, required: usize },

    #[error("ill-conditioned {what}: condition number {condition:e} exceeds {limit:e}")]
    IllConditioned { what: String, condition: f64, limit: f64 },

    #[error("division by zero in GF({0})")]
    DivisionByZero(usize),

    #[error("field basis is linearly dependent over Z_{p}: rank {rank} < {n}")]
    DependentBasis { p: u32, rank: usize, n: usize },

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("family {family} does not support dimension {dim}: {rule}")]
    FamilyMismatch { family: String, dim: usize, rule: String },

    #[error("fiducial quality: residual {residual:e} exceeds {limit:e}")]
    FiducialQuality { residual: f64, limit: f64 },

    #[error("Kraus operators are not trace preserving: max |sum K^dag K - 1| = {deviation:e}")]
    NotCptp { deviation: f64 },

    #[error("ontic space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("distribution kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
