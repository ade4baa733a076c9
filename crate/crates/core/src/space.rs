//! Enumerable finite state spaces.
//!
//! A state is the vector of its cells, each cell holding the position of
//! its symbol in the alphabet. States are numbered in mixed radix with the
//! first cell most significant, so index order is exactly the lexicographic
//! order of the row-major cell vector under the alphabet order.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Default cap on enumerated state-space size.
pub const DEFAULT_MAX_STATES: u64 = 1 << 24;

/// Cells of a state, as alphabet positions.
pub type State = Vec<u32>;

/// A finite ordered set of integer symbols, stored ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    symbols: Vec<i64>,
}

impl Alphabet {
    /// Symbols must be distinct; they are sorted into ascending order.
    pub fn new(mut symbols: Vec<i64>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        symbols.sort_unstable();
        if symbols.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAlphabet(alloc::format!("repeated symbol in {symbols:?}")));
        }
        if symbols.len() > u32::MAX as usize {
            return Err(Error::InvalidAlphabet("alphabet too large".into()));
        }
        Ok(Self { symbols })
    }

    /// `{0, 1, …, size-1}`.
    pub fn range(size: usize) -> Self {
        Self { symbols: (0..size as i64).collect() }
    }

    pub fn binary() -> Self {
        Self::range(2)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[i64] {
        &self.symbols
    }

    pub fn symbol(&self, position: u32) -> i64 {
        self.symbols[position as usize]
    }

    pub fn position(&self, symbol: i64) -> Option<u32> {
        self.symbols.binary_search(&symbol).ok().map(|p| p as u32)
    }
}

/// One block of a blocked space: a sequence of `length` cells over `alphabet`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub length: usize,
    pub alphabet: Alphabet,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateSpace {
    Sequence { length: usize, alphabet: Alphabet },
    /// Row-major `rows × cols` arrays.
    Array { rows: usize, cols: usize, alphabet: Alphabet },
    /// Concatenation of independent sequence blocks.
    Blocked { blocks: Vec<Block> },
}

impl StateSpace {
    pub fn sequence(length: usize, alphabet: Alphabet) -> Self {
        StateSpace::Sequence { length, alphabet }
    }

    pub fn array(rows: usize, cols: usize, alphabet: Alphabet) -> Self {
        StateSpace::Array { rows, cols, alphabet }
    }

    pub fn blocked(blocks: Vec<Block>) -> Self {
        StateSpace::Blocked { blocks }
    }

    pub fn cell_count(&self) -> usize {
        match self {
            StateSpace::Sequence { length, .. } => *length,
            StateSpace::Array { rows, cols, .. } => rows * cols,
            StateSpace::Blocked { blocks } => blocks.iter().map(|b| b.length).sum(),
        }
    }

    /// Alphabet governing `cell`.
    pub fn alphabet_of(&self, cell: usize) -> &Alphabet {
        match self {
            StateSpace::Sequence { alphabet, .. } | StateSpace::Array { alphabet, .. } => alphabet,
            StateSpace::Blocked { blocks } => {
                let mut start = 0;
                for b in blocks {
                    if cell < start + b.length {
                        return &b.alphabet;
                    }
                    start += b.length;
                }
                panic!("cell {cell} out of range")
            }
        }
    }

    /// Per-cell radix (alphabet size).
    pub fn radices(&self) -> Vec<u64> {
        (0..self.cell_count()).map(|c| self.alphabet_of(c).len() as u64).collect()
    }

    /// Sequence view: `(length, alphabet)` per block. Sequences are a single
    /// block; arrays have no block structure.
    pub fn blocks(&self) -> Option<Vec<Block>> {
        match self {
            StateSpace::Sequence { length, alphabet } => {
                Some(alloc::vec![Block { length: *length, alphabet: alphabet.clone() }])
            }
            StateSpace::Blocked { blocks } => Some(blocks.clone()),
            StateSpace::Array { .. } => None,
        }
    }

    /// Same kind of space with new block lengths.
    pub fn with_block_lengths(&self, lengths: &[usize]) -> Result<Self> {
        match self {
            StateSpace::Sequence { alphabet, .. } => {
                if lengths.len() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, found: lengths.len() });
                }
                Ok(StateSpace::sequence(lengths[0], alphabet.clone()))
            }
            StateSpace::Blocked { blocks } => {
                if lengths.len() != blocks.len() {
                    return Err(Error::DimensionMismatch { expected: blocks.len(), found: lengths.len() });
                }
                Ok(StateSpace::blocked(
                    blocks
                        .iter()
                        .zip(lengths)
                        .map(|(b, &length)| Block { length, alphabet: b.alphabet.clone() })
                        .collect(),
                ))
            }
            StateSpace::Array { .. } => Err(Error::UnsupportedSpace("arrays have no block lengths")),
        }
    }

    /// Exact number of states, or `None` when it overflows `u128`.
    pub fn size(&self) -> Option<u128> {
        self.radices().iter().try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
    }

    /// Number of states, failing if it exceeds `cap`.
    pub fn checked_size(&self, cap: u64) -> Result<u64> {
        match self.size() {
            Some(s) if s <= cap as u128 => Ok(s as u64),
            Some(s) => Err(Error::CapExceeded { states: s, cap }),
            None => Err(Error::CapExceeded { states: u128::MAX, cap }),
        }
    }

    pub fn validate(&self, state: &[u32]) -> Result<()> {
        if state.len() != self.cell_count() {
            return Err(Error::DimensionMismatch { expected: self.cell_count(), found: state.len() });
        }
        for (cell, &s) in state.iter().enumerate() {
            if s as usize >= self.alphabet_of(cell).len() {
                return Err(Error::InvalidState(alloc::format!("cell {cell} holds position {s}")));
            }
        }
        Ok(())
    }

    /// Mixed-radix index of a state. The space must have fewer than 2^64
    /// states.
    pub fn index_of(&self, state: &[u32]) -> Result<u64> {
        self.validate(state)?;
        let mut index: u64 = 0;
        for (cell, &s) in state.iter().enumerate() {
            let r = self.alphabet_of(cell).len() as u64;
            index = index
                .checked_mul(r)
                .and_then(|i| i.checked_add(s as u64))
                .ok_or(Error::CapExceeded { states: self.size().unwrap_or(u128::MAX), cap: u64::MAX })?;
        }
        Ok(index)
    }

    pub fn state_at(&self, index: u64) -> Result<State> {
        let radices = self.radices();
        let mut state = alloc::vec![0u32; radices.len()];
        let mut rest = index;
        for (cell, &r) in radices.iter().enumerate().rev() {
            state[cell] = (rest % r) as u32;
            rest /= r;
        }
        if rest != 0 {
            return Err(Error::StateOutOfRange(index));
        }
        Ok(state)
    }

    /// Iterates all states in index order, after checking the size cap.
    pub fn states(&self, cap: u64) -> Result<StateIter> {
        let total = self.checked_size(cap)?;
        Ok(StateIter { radices: self.radices(), next: Some(alloc::vec![0; self.cell_count()]), remaining: total })
    }

    /// Symbols of a state (alphabet values rather than positions).
    pub fn symbols_of(&self, state: &[u32]) -> Vec<i64> {
        state.iter().enumerate().map(|(c, &s)| self.alphabet_of(c).symbol(s)).collect()
    }

    /// Positions of a symbol vector.
    pub fn state_from_symbols(&self, symbols: &[i64]) -> Result<State> {
        if symbols.len() != self.cell_count() {
            return Err(Error::DimensionMismatch { expected: self.cell_count(), found: symbols.len() });
        }
        symbols
            .iter()
            .enumerate()
            .map(|(c, &sym)| {
                self.alphabet_of(c)
                    .position(sym)
                    .ok_or_else(|| Error::InvalidState(alloc::format!("symbol {sym} not in alphabet of cell {c}")))
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        alloc::format!("{self}")
    }
}

impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpace::Sequence { length, alphabet } => write!(f, "sequence[{length}] over {:?}", alphabet.symbols()),
            StateSpace::Array { rows, cols, alphabet } => {
                write!(f, "array[{rows}x{cols}] over {:?}", alphabet.symbols())
            }
            StateSpace::Blocked { blocks } => {
                write!(f, "blocked[")?;
                for (i, b) in blocks.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{} over {:?}", b.length, b.alphabet.symbols())?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Odometer over all states of a space, in index order.
pub struct StateIter {
    radices: Vec<u64>,
    next: Option<State>,
    remaining: u64,
}

impl Iterator for StateIter {
    type Item = State;

    fn next(&mut self) -> Option<State> {
        if self.remaining == 0 {
            return None;
        }
        let current = self.next.take()?;
        self.remaining -= 1;
        if self.remaining > 0 {
            let mut succ = current.clone();
            for cell in (0..succ.len()).rev() {
                if (succ[cell] as u64) + 1 < self.radices[cell] {
                    succ[cell] += 1;
                    break;
                }
                succ[cell] = 0;
            }
            self.next = Some(succ);
        }
        Some(current)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_is_lexicographic_and_invertible() {
        let space = StateSpace::blocked(alloc::vec![
            Block { length: 2, alphabet: Alphabet::range(3) },
            Block { length: 1, alphabet: Alphabet::binary() },
        ]);
        assert_eq!(space.size(), Some(18));
        let states: Vec<State> = space.states(DEFAULT_MAX_STATES).unwrap().collect();
        assert_eq!(states.len(), 18);
        for (i, s) in states.iter().enumerate() {
            assert_eq!(space.index_of(s).unwrap(), i as u64);
            assert_eq!(&space.state_at(i as u64).unwrap(), s);
        }
        assert!(states.windows(2).all(|w| w[0] < w[1]));
        assert!(space.state_at(18).is_err());
    }

    #[test]
    fn empty_space_has_one_state() {
        let space = StateSpace::sequence(0, Alphabet::binary());
        let states: Vec<State> = space.states(10).unwrap().collect();
        assert_eq!(states, alloc::vec![Vec::<u32>::new()]);
    }

    #[test]
    fn cap_is_enforced() {
        let space = StateSpace::sequence(30, Alphabet::binary());
        match space.states(DEFAULT_MAX_STATES) {
            Err(Error::CapExceeded { states, cap }) => {
                assert_eq!(states, 1 << 30);
                assert_eq!(cap, DEFAULT_MAX_STATES);
            }
            _ => panic!("expected cap error"),
        }
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert!(Alphabet::new(alloc::vec![1, 0, 1]).is_err());
        let a = Alphabet::new(alloc::vec![5, -1]).unwrap();
        assert_eq!(a.symbols(), &[-1, 5]);
        assert_eq!(a.position(5), Some(1));
    }
}
