use std::fmt;

/// Named computation guards. Exceeding one yields [`Error::GuardExceeded`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    /// `(k!)^m` covers for exhaustive enumeration.
    CoverEnumeration,
    /// `k^n` transversals for exact counting.
    TransversalCount,
    /// Vertex count for the exhaustive density oracle.
    BruteForceVertices,
    /// Monte Carlo trial count.
    Trials,
}

impl Guard {
    pub fn limit(self) -> u64 {
        match self {
            Guard::CoverEnumeration => crate::cover::ENUMERATION_GUARD,
            Guard::TransversalCount => crate::transversal::COUNT_GUARD,
            Guard::BruteForceVertices => crate::density::BRUTE_FORCE_MAX_VERTICES as u64,
            Guard::Trials => crate::experiment::MAX_TRIALS,
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Guard::CoverEnumeration => "ENUMERATION_GUARD",
            Guard::TransversalCount => "COUNT_GUARD",
            Guard::BruteForceVertices => "BRUTE_FORCE_MAX_VERTICES",
            Guard::Trials => "MAX_TRIALS",
        };
        write!(f, "{name}={}", self.limit())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("guard exceeded ({guard}): {detail}")]
    GuardExceeded { guard: Guard, detail: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn guard(guard: Guard, detail: impl Into<String>) -> Self {
        Error::GuardExceeded {
            guard,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
