use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("run length k must be at least 1, got {0}")]
    InvalidK(i64),

    #[error("number of runs r must be at least 1, got {0}")]
    InvalidR(i64),

    #[error("success probability must lie strictly between 0 and 1: {0}")]
    InvalidP(String),

    #[error("table of {requested} entries exceeds the cap of {cap}")]
    TableTooLarge { requested: u64, cap: u64 },

    #[error("n_max = {n_max} lies below the support minimum kr = {support_min}")]
    RangeTooSmall { n_max: u64, support_min: u64 },

    #[error("oracle enumeration needs {count} tuples, cap is {cap}")]
    InfeasibleEnumeration { count: u128, cap: u128 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("simulation exceeded {cap} trials without completing")]
    SimulationCapExceeded { cap: u64 },

    #[error("identity {identity} violated at v = {v}")]
    IdentityViolation { identity: &'static str, v: u64 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
}

impl Error {
    /// True for errors raised because a configured size or work cap was hit.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(
            self,
            Error::TableTooLarge { .. }
                | Error::InfeasibleEnumeration { .. }
                | Error::SimulationCapExceeded { .. }
                | Error::Overflow(_)
        )
    }
}
