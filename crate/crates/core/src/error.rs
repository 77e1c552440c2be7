use thiserror::Error;

/// Why a sequence failed chain validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// An element occurs twice; the index points at the second occurrence.
    Duplicate,
    /// Neither neighbour divides the other; the index points at the left
    /// element of the offending pair.
    NonAdjacent,
}

/// First violation found while validating a sequence as a finite chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainViolation {
    pub kind: ViolationKind,
    pub index: usize,
}

impl std::fmt::Display for ChainViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ViolationKind::Duplicate => write!(f, "duplicate element at index {}", self.index),
            ViolationKind::NonAdjacent => {
                write!(f, "non-adjacent pair starting at index {}", self.index)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A checked arithmetic operation exceeded the 64-bit range. Wrapping
    /// would fabricate chain elements, so every overflow aborts loudly.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// A precondition on the input domain was violated.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("chain violation: {0}")]
    Chain(ChainViolation),

    /// The gamma builder could not produce a contract-satisfying chain.
    #[error("no valid chain found for p={p}: {reason}")]
    GammaSearch { p: u64, reason: String },

    /// The configured work budget was exhausted while building a chain.
    #[error("work budget exceeded while building chain for p={p}")]
    BudgetExceeded { p: u64 },

    /// An enumeration guard was exceeded in the brute-force oracle.
    #[error("oracle guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A cache or checkpoint file did not match its expected format.
    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: String, reason: String },
}

impl From<ChainViolation> for Error {
    fn from(v: ChainViolation) -> Self {
        Error::Chain(v)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
