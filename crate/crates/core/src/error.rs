use thiserror::Error;

/// Errors raised by the ring, scheme, threshold, planner and harness layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ring parameters of the operands differ")]
    ParamsMismatch,

    #[error("operands are in different representations (coefficient vs NTT)")]
    DomainMismatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no NTT-friendly primes found for {bits} bits at n = {n}")]
    NoPrimesFound { bits: u32, n: usize },

    #[error("bound violated: {inequality} (short by {deficit_bits:.2} bits)")]
    BoundViolation {
        inequality: String,
        deficit_bits: f64,
    },

    #[error("plaintext coefficient {index} is out of range: {detail}")]
    PlaintextOutOfRange { index: usize, detail: String },

    #[error("homomorphic capacity exceeded: {needed} additions requested, capacity is {capacity}")]
    CapacityExceeded { needed: u64, capacity: u64 },

    #[error("fixed-point encoding may wrap: {0}")]
    OverflowRisk(String),

    #[error("scheme mismatch: expected {expected}, got {got}")]
    SchemeMismatch { expected: String, got: String },

    #[error("missing share: expected {expected} parties, got {got}")]
    MissingShare { expected: usize, got: usize },

    #[error("duplicate or out-of-range party index {0}")]
    DuplicateIndex(u16),

    #[error("smudging bound too large for q: {0}")]
    BoundTooLargeForQ(String),

    #[error("ring degree {0} is not in the security table and no override was given")]
    UnknownRingDegree(usize),

    #[error("modulus of {log2_q} bits exceeds the {max_bits}-bit limit for n = {n}")]
    InsecureModulus { n: usize, log2_q: u64, max_bits: u64 },

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("malformed encoding: {0}")]
    Decode(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that stem from rejected configuration or bounds,
    /// as opposed to failures while a protocol is running.
    pub fn is_config_rejection(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::NoPrimesFound { .. }
                | Error::BoundViolation { .. }
                | Error::OverflowRisk(_)
                | Error::BoundTooLargeForQ(_)
                | Error::UnknownRingDegree(_)
                | Error::InsecureModulus { .. }
                | Error::EmptyRange(_)
                | Error::Config(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
