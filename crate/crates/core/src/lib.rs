//! Exact computations around finite exchangeability.
//!
//! The crate works over enumerated finite state spaces and keeps every
//! probability as an exact [`Rational`]. It covers
//!
//! * total-variation distances in both the L1 and the sup-over-events norm,
//! * symmetric-group actions on sequences, arrays and blocked sequences,
//!   with orbit tables, canonical forms and orbit averaging,
//! * with/without-replacement sampling from several urns and the sharp
//!   bound between them,
//! * empirical de Finetti mixtures, extendibility and mixture-gap linear
//!   programs over exact rationals,
//! * a randomized-sign SVD used to check that array exchangeability carries
//!   over to the rows of the singular vector matrices,
//! * the orbit-averaged empirical estimator and two Monte Carlo tests built
//!   on it.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line front end live in the `exch` crate.

#![no_std]

extern crate alloc;

pub mod array;
pub mod dist;
pub mod error;
pub mod exch;
pub mod group;
pub mod lp;
pub mod rational;
pub mod space;
pub mod stats;
pub mod urn;

pub use dist::{tv_l1, tv_sup, FiniteDistribution};
pub use error::{Error, ErrorKind, Result};
pub use group::{ActionKind, GroupAction, GroupElement, OrbitTable, Permutation};
pub use rational::Rational;
pub use space::{Alphabet, Block, State, StateSpace, DEFAULT_MAX_STATES};
pub use urn::UrnSystem;
