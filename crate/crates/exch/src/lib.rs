//! File formats and command-line plumbing over `exch-core`.

pub mod cli;
pub mod format;
