use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected (n={n}, s={s}), got (n={got_n}, s={got_s})")]
    DimensionMismatch {
        n: usize,
        s: u32,
        got_n: usize,
        got_s: u32,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {0} outside the unit interval")]
    OutOfRange(String),

    #[error("ambient space of dimension n*s = {0} exceeds the supported maximum of 128")]
    AmbientTooLarge(usize),

    #[error("enumeration of 2^{dim} elements exceeds the cap of 2^{cap_log2}; raise the cap to at least 2^{dim}")]
    EnumerationCap { dim: usize, cap_log2: u32 },

    #[error("the RT weight of the zero subspace is undefined")]
    UndefinedWeight,

    #[error("generator map is not injective: rank {rank} < s = {s}")]
    NotInjective { rank: usize, s: u32 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown builtin net '{0}'")]
    UnknownNet(String),

    #[error("point count {count} is not a power of two")]
    NotPowerOfTwo { count: usize },

    #[error("rescaling to N={count} failed: {msg}")]
    RescaleFailure { count: usize, msg: String },

    #[error("route unavailable: {0}")]
    RouteUnavailable(String),

    #[error("no representative: the group for profile {0:?} is empty")]
    EmptyGroup(Vec<u32>),

    #[error("identity violated: {0}")]
    IdentityViolation(String),

    #[error("zero samples requested")]
    ZeroSamples,

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
