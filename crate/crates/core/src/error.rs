use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: String },

    #[error("invalid weights: {0}")]
    Weight(String),

    #[error("`{0}` is reserved and cannot be used as a channel here")]
    ReservedName(String),

    #[error("substituted term for `{0}` is not closed")]
    OpenSubstituent(String),

    #[error("term is not a process (free variables: {0})")]
    OpenTerm(String),

    #[error("recursion unfolded more than {0} times while deriving a single step")]
    UnguardedRecursion(usize),

    #[error("invalid activation: {0}")]
    InvalidActivation(String),

    #[error("invalid transition sequence: {0}")]
    InvalidSequence(String),

    #[error("state space exceeded the configured cap of {0}")]
    Explosion(usize),

    #[error("state `{0}` is outside the explored universe")]
    UnknownState(String),

    #[error("channel `{0}` is not fresh")]
    Freshness(String),

    #[error("term contains probabilistic choice: {0}")]
    NotClassical(String),

    #[error("target mentions classes outside the explored universe: {0}")]
    InfeasibleStructure(String),

    #[error("partition is not stable under strong bisimulation refinement")]
    UnstablePartition,

    #[error("linear system is singular")]
    Singular,

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
