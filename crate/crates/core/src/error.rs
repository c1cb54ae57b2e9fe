use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed source: {0}")]
    MalformedSource(String),

    #[error("unknown user id {0}")]
    UnknownUser(u32),

    #[error("arguments must be disjoint")]
    Overlap,

    #[error("{op} supports at most {limit} elements, got {size}")]
    TooLarge {
        op: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("infeasible lattice: forced-in and forced-out sets must be disjoint subsets of the ground set")]
    InfeasibleLattice,

    #[error("weight for user {user} must be positive")]
    NonPositiveWeight { user: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("initial point is not in the core: {0}")]
    NotInCore(String),

    #[error("initial point is off the 1/{k} grid at user {user}")]
    OffGrid { user: u32, k: u64 },

    #[error("permutation list is empty")]
    EmptyPermutations,

    #[error("rate of user {user} times {k} is not an integer; smallest valid K is {minimal_k}")]
    NonIntegralSplit { user: u32, k: u64, minimal_k: u64 },

    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
