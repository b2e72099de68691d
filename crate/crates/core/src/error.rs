use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("a lattice needs at least one coefficient")]
    EmptyLattice,
    #[error("coefficients must be positive integers, got {0}")]
    NonPositiveCoefficient(i128),
    #[error("coefficient {value} exceeds the configured maximum {max}")]
    CoefficientTooLarge { value: u64, max: u64 },
    #[error("index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("rank {rank} is too small, need at least {needed}")]
    RankTooSmall { rank: usize, needed: usize },
    #[error("lattice {0} is not primitive")]
    NotPrimitive(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("zero has no square class")]
    ZeroInput,
    #[error("local representation table at p={p} did not stabilize below threshold {cap}")]
    StabilityNotReached { p: u64, cap: u32 },
    #[error("binary representation test at p={p} disagrees between precision {low} and {high}")]
    PrecisionUnstable { p: u64, low: u32, high: u32 },
    #[error("binary target <{b1},{b2}> at p={p} needs at least one p-adic unit entry")]
    NonUnitBinary { p: u64, b1: i64, b2: i64 },
    #[error("bound {bound} exceeds the sieve budget {max}")]
    BoundTooLarge { bound: u64, max: u64 },
    #[error("Watson case {case} does not apply to {lattice}")]
    CaseMismatch { case: String, lattice: String },
    #[error("psi exceeded the safeguard bound {0}")]
    PsiUnbounded(u64),
    #[error("probe {0} is not represented by the lattice")]
    ProbeNotRepresented(u64),
    #[error("invalid input: {0}")]
    Parse(String),
    #[error("sieve cache: {0}")]
    Cache(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
