use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("occupation {0:?} is not in the basis")]
    OccupationNotInBasis(Vec<u32>),

    #[error("state has zero norm")]
    ZeroVector,

    #[error("transmissivity {0} outside [0, 1]")]
    InvalidEta(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bound matrix is singular (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("phase mode {0} carries no photons")]
    NoPhotons(usize),

    #[error("{d} phases do not divide {n} photons evenly")]
    Indivisible { d: u32, n: u32 },

    #[error("not a density operator: {0}")]
    NotDensityOperator(String),

    #[error("photon number {n} exceeds the dense cap {cap}")]
    DenseCapExceeded { n: u32, cap: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
