use alloc::string::String;
use alloc::vec::Vec;

use crate::rational::Rational;

pub type Result<T> = core::result::Result<T, Error>;

/// Coarse error classes; the CLI maps them onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    CapExceeded,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("distributions are defined over different state spaces")]
    SpaceMismatch,
    #[error("distribution is not normalized: total mass {0}")]
    NotNormalized(Rational),
    #[error("negative mass {mass} at state index {index}")]
    NegativeMass { index: u64, mass: Rational },
    #[error("state index {0} is outside the state space")]
    StateOutOfRange(u64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("group action {action} does not act on this state space")]
    ActionSpaceMismatch { action: String },
    #[error("state space has {states} states, exceeding the enumeration cap of {cap}")]
    CapExceeded { states: u128, cap: u64 },
    #[error("urn {urn}: {draws} draws exceed urn size {size}")]
    DrawsExceedSize { urn: usize, draws: usize, size: usize },
    #[error("urn system needs at least one urn with positive size and matching draw vector")]
    InvalidUrnSystem,
    #[error("distribution is not exchangeable under its coordinate permutations")]
    NotExchangeable,
    #[error("distribution is not invariant: P({state:?}) and P({image:?}) differ by {difference}")]
    NotInvariant {
        state: State,
        image: State,
        difference: Rational,
    },
    #[error("unknown orbit id {0}")]
    UnknownOrbit(usize),
    #[error("mixture grid must contain at least two points per axis, got {0}")]
    EmptyGrid(usize),
    #[error("sample set is empty")]
    EmptySamples,
    #[error("unsupported state space for this operation: {0}")]
    UnsupportedSpace(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular values are degenerate or too close to separate")]
    DegenerateSingularValues,
    #[error("sampler produced {degenerate} degenerate matrices out of {total} draws")]
    SamplerUnsuitable { degenerate: usize, total: usize },
    #[error("linear program failure: {0}")]
    Lp(String),
}

type State = Vec<u32>;

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::CapExceeded { .. } => ErrorKind::CapExceeded,
            Error::Lp(_) | Error::DegenerateSingularValues | Error::SamplerUnsuitable { .. } => {
                ErrorKind::Numeric
            }
            _ => ErrorKind::Validation,
        }
    }
}
