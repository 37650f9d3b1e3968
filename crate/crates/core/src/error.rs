use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Pauli label {label:?}: {reason}")]
    InvalidPauli { label: String, reason: &'static str },
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is near singular (smallest eigenvalue {min_eigenvalue:.3e})")]
    NearSingular { min_eigenvalue: f64 },
    #[error("frame parameter is rank deficient (sigma_min {sigma_min:.3e})")]
    RankDeficient { sigma_min: f64 },
    #[error("stabilizer generators {a} and {b} anticommute")]
    AnticommutingGenerators { a: String, b: String },
    #[error("stabilizer group contains -I")]
    MinusIdentityInGroup,
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("too many samples: requested {requested}, only {available} available")]
    TooManySamples { requested: usize, available: usize },
    #[error("index {index} out of range 0..{bound}")]
    OutOfRange { index: usize, bound: usize },
    #[error("parameter {name} = {value} outside domain {domain}")]
    OutOfDomain { name: String, value: f64, domain: String },
    #[error("unknown family id {0:?}")]
    UnknownFamily(String),
    #[error("missing parameter {0:?}")]
    MissingParameter(String),
    #[error("invalid rank allocation: {0}")]
    InvalidAllocation(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("unknown study id {0:?}")]
    UnknownStudy(String),
    #[error("malformed data: {0}")]
    Data(String),
}
