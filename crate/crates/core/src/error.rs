use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown standard lattice `{0}`")]
    UnknownLattice(String),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lattice is not negative definite")]
    NotNegativeDefinite,
    #[error("target norm must be negative, got {0}")]
    NonNegativeTarget(i64),
    #[error("vector is not a root: norm {0}, expected -2")]
    NotARoot(i64),
    #[error("zero vector")]
    ZeroVector,
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("vector has norm {0}, expected a negative norm")]
    NonNegativeNorm(i64),
    #[error("sublattice has rank {rank}, ambient rank is {ambient}")]
    NotFullRank { rank: usize, ambient: usize },
    #[error("no admissible vector in coefficient box of radius {bound}")]
    SearchExhausted { bound: i64 },
    #[error("no class pairs to 1 with the fibre class: {0}")]
    NoSectionClass(String),
    #[error("invalid affine action: {0}")]
    InvalidAction(String),
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("index {index} out of range for {len} multisections")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("torsion test needs two distinct indices, got {0} twice")]
    SameIndex(usize),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("invalid fibration model: {0}")]
    InvalidModel(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("inconsistent scenario: {0}")]
    InconsistentScenario(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
