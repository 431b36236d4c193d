use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,

    #[error("invalid character {ch:?} at position {position}")]
    InvalidCharacter { ch: char, position: usize },

    #[error("mixed alphabets: '+'/'-' and '1'/'0' in the same sequence (position {position})")]
    MixedAlphabet { position: usize },

    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("duplicate sequence in family")]
    DuplicateMember,

    #[error("duplicate seed {0}")]
    DuplicateSeed(u64),

    #[error("family size {size} exceeds the number of sequences of length {length}")]
    FamilyTooLarge { length: usize, size: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inadmissible window/shift pattern: {0}")]
    Inadmissible(String),

    #[error("no admissible shift pattern exists")]
    NoAdmissiblePattern,

    #[error("exact enumeration needs {count} configurations, budget is {budget}")]
    BudgetExceeded { count: u64, budget: u64 },

    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("{0}")]
    Io(String),

    #[error("malformed record: {0}")]
    Record(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Refusals caused by instance size rather than malformed input.
    pub fn is_feasibility(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::InstanceTooLarge(_)
        )
    }
}
