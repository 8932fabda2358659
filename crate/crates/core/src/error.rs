use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,

    #[error("log {p}/log {q} is rational: both are powers of {root}")]
    DependentPair { p: u64, q: u64, root: u64 },

    #[error("multiplier must be at least 2, got {0}")]
    MultiplierTooSmall(u64),

    #[error("precision exhausted: need {required} bits, have {available}")]
    PrecisionExhausted { required: u64, available: u32 },

    #[error("mantissa does not fit in {0} bits")]
    MantissaOverflow(u32),

    #[error("random points need at least 64 bits, got {0}")]
    TooFewBits(u32),

    #[error("empty point set")]
    Empty,

    #[error("interval [{a}, {b}) is not a subinterval of [0, 1] with a < b")]
    BadInterval { a: String, b: String },

    #[error("requested {requested} points but only {available} available")]
    NotEnoughPoints { requested: usize, available: usize },

    #[error("frequency must be nonzero")]
    ZeroFrequency,

    #[error("modulus {modulus} is not coprime to {p}·{q}")]
    ModulusNotCoprime { modulus: u64, p: u64, q: u64 },

    #[error("residue {residue} out of range for modulus {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },

    #[error("modulus does not fit in 64 bits")]
    ModulusTooLarge,

    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(String),

    #[error("grid needs at least one interval")]
    EmptyGrid,

    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("samples are flat after projection, cannot anchor")]
    FlatSamples,

    #[error("initial function must be nondecreasing with f(0)=0 and f(1)=1")]
    InfeasibleStart,

    #[error("grid not commensurate: {k} is not divisible by {pq}")]
    GridNotCommensurate { k: usize, pq: u64 },

    #[error("operator index must be at least 2, got {0}")]
    OperatorIndex(u64),

    #[error("not a distribution function: {0}")]
    NotDistribution(String),

    #[error("parse error: {0}")]
    Parse(String),
}
