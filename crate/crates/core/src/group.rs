//! Symmetric-group actions on state spaces and the orbit machinery.
//!
//! Every action is given by generators (adjacent transpositions of each
//! symmetric factor). Orbits are closures under the generators; full group
//! enumeration is only used for the Burnside count.
//!
//! A group element moves cells: if cell `c` is sent to `π(c)`, then
//! `(g·x)[π(c)] = x[c]`. For arrays under the joint action this is
//! `(gX)[g(i), g(j)] = X[i, j]`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};

use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{Alphabet, Block, State, StateSpace};

/// Bijection of `{0, …, m-1}`; `image[i] = g(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || seen[i] {
                return Err(Error::InvalidPermutation(image));
            }
            seen[i] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(m: usize) -> Self {
        Self { image: (0..m).collect() }
    }

    /// Swaps `a` and `b`.
    pub fn transposition(m: usize, a: usize, b: usize) -> Result<Self> {
        if a >= m || b >= m {
            return Err(Error::InvalidPermutation(vec![a, b]));
        }
        let mut image: Vec<usize> = (0..m).collect();
        image.swap(a, b);
        Ok(Self { image })
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DimensionMismatch { expected: self.degree(), found: other.degree() });
        }
        Ok(Permutation { image: other.image.iter().map(|&i| self.image[i]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.image.len()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        cycles(&self.image).len()
    }

    /// All `m!` permutations of degree `m`, lexicographic.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..m).collect();
        loop {
            out.push(Permutation { image: current.clone() });
            // next lexicographic permutation
            let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }
}

fn cycles(image: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; image.len()];
    let mut out = Vec::new();
    for start in 0..image.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i);
            i = image[i];
        }
        out.push(cycle);
    }
    out
}

/// The four symmetric-group actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActionKind {
    /// `S_m` permuting the positions of a length-`m` sequence.
    Sequence { m: usize },
    /// `S_m` permuting rows and columns of an `m × m` array simultaneously.
    JointRowCol { m: usize },
    /// `S_m × S_n` permuting rows and columns of an `m × n` array independently.
    SeparateRowCol { m: usize, n: usize },
    /// `S_{n_1} × … × S_{n_d}`, each factor permuting one block.
    BlockedSequences { ns: Vec<usize> },
}

impl ActionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ActionKind::Sequence { .. } => "sequence",
            ActionKind::JointRowCol { .. } => "joint_row_col",
            ActionKind::SeparateRowCol { .. } => "separate_row_col",
            ActionKind::BlockedSequences { .. } => "blocked_sequences",
        }
    }

    /// Degrees of the symmetric factors.
    pub fn factor_degrees(&self) -> Vec<usize> {
        match self {
            ActionKind::Sequence { m } | ActionKind::JointRowCol { m } => vec![*m],
            ActionKind::SeparateRowCol { m, n } => vec![*m, *n],
            ActionKind::BlockedSequences { ns } => ns.clone(),
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionKind::Sequence { m } => write!(f, "sequence(m={m})"),
            ActionKind::JointRowCol { m } => write!(f, "joint_row_col(m={m})"),
            ActionKind::SeparateRowCol { m, n } => write!(f, "separate_row_col(m={m}, n={n})"),
            ActionKind::BlockedSequences { ns } => write!(f, "blocked_sequences(ns={ns:?})"),
        }
    }
}

/// One element of a product of symmetric groups, one permutation per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub factors: Vec<Permutation>,
}

impl GroupElement {
    pub fn new(factors: Vec<Permutation>) -> Self {
        Self { factors }
    }

    pub fn single(p: Permutation) -> Self {
        Self { factors: vec![p] }
    }

    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.factors.len() != other.factors.len() {
            return Err(Error::DimensionMismatch { expected: self.factors.len(), found: other.factors.len() });
        }
        let factors =
            self.factors.iter().zip(&other.factors).map(|(a, b)| a.compose(b)).collect::<Result<Vec<_>>>()?;
        Ok(GroupElement { factors })
    }
}

/// A symmetric-group action bound to the state space it acts on.
#[derive(Debug, Clone)]
pub struct GroupAction {
    kind: ActionKind,
    space: StateSpace,
    generators: Vec<GroupElement>,
    generator_cells: Vec<Vec<usize>>,
}

impl GroupAction {
    pub fn new(kind: ActionKind, space: StateSpace) -> Result<Self> {
        let compatible = match (&kind, &space) {
            (ActionKind::Sequence { m }, StateSpace::Sequence { length, .. }) => m == length,
            (ActionKind::JointRowCol { m }, StateSpace::Array { rows, cols, .. }) => m == rows && m == cols,
            (ActionKind::SeparateRowCol { m, n }, StateSpace::Array { rows, cols, .. }) => m == rows && n == cols,
            (ActionKind::BlockedSequences { ns }, StateSpace::Blocked { blocks }) => {
                ns.len() == blocks.len() && ns.iter().zip(blocks).all(|(n, b)| *n == b.length)
            }
            _ => false,
        };
        if !compatible {
            return Err(Error::ActionSpaceMismatch { action: alloc::format!("{kind} on {space}") });
        }
        let degrees = kind.factor_degrees();
        let mut generators = Vec::new();
        for (f, &m) in degrees.iter().enumerate() {
            for i in 0..m.saturating_sub(1) {
                let factors = degrees
                    .iter()
                    .enumerate()
                    .map(|(g, &d)| {
                        if g == f {
                            Permutation::transposition(d, i, i + 1).expect("in range")
                        } else {
                            Permutation::identity(d)
                        }
                    })
                    .collect();
                generators.push(GroupElement { factors });
            }
        }
        let mut action = Self { kind, space, generators, generator_cells: Vec::new() };
        action.generator_cells = action.generators.iter().map(|g| action.cell_map(g)).collect();
        Ok(action)
    }

    pub fn sequence(m: usize, alphabet: Alphabet) -> Self {
        Self::new(ActionKind::Sequence { m }, StateSpace::sequence(m, alphabet)).expect("compatible")
    }

    pub fn joint_row_col(m: usize, alphabet: Alphabet) -> Self {
        Self::new(ActionKind::JointRowCol { m }, StateSpace::array(m, m, alphabet)).expect("compatible")
    }

    pub fn separate_row_col(m: usize, n: usize, alphabet: Alphabet) -> Self {
        Self::new(ActionKind::SeparateRowCol { m, n }, StateSpace::array(m, n, alphabet)).expect("compatible")
    }

    pub fn blocked(blocks: Vec<Block>) -> Self {
        let ns = blocks.iter().map(|b| b.length).collect();
        Self::new(ActionKind::BlockedSequences { ns }, StateSpace::blocked(blocks)).expect("compatible")
    }

    /// Coordinate permutations of a sequence or blocked space.
    pub fn coordinate_permutations(space: &StateSpace) -> Result<Self> {
        match space {
            StateSpace::Sequence { length, .. } => Self::new(ActionKind::Sequence { m: *length }, space.clone()),
            StateSpace::Blocked { blocks } => Self::new(
                ActionKind::BlockedSequences { ns: blocks.iter().map(|b| b.length).collect() },
                space.clone(),
            ),
            StateSpace::Array { .. } => Err(Error::UnsupportedSpace("arrays have no coordinate-permutation group")),
        }
    }

    pub fn kind(&self) -> &ActionKind {
        &self.kind
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { factors: self.kind.factor_degrees().into_iter().map(Permutation::identity).collect() }
    }

    /// `|G|` as a product of factorials, or `None` on overflow.
    pub fn order(&self) -> Option<u128> {
        self.kind
            .factor_degrees()
            .iter()
            .try_fold(1u128, |acc, &m| (1..=m as u128).try_fold(acc, |a, j| a.checked_mul(j)))
    }

    fn check_element(&self, g: &GroupElement) -> Result<()> {
        let degrees = self.kind.factor_degrees();
        if g.factors.len() != degrees.len() {
            return Err(Error::DimensionMismatch { expected: degrees.len(), found: g.factors.len() });
        }
        for (p, &d) in g.factors.iter().zip(&degrees) {
            if p.degree() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.degree() });
            }
        }
        Ok(())
    }

    /// Destination of each cell under `g` (assumes `g` was checked).
    fn cell_map(&self, g: &GroupElement) -> Vec<usize> {
        match &self.kind {
            ActionKind::Sequence { .. } => g.factors[0].image.clone(),
            ActionKind::JointRowCol { m } => {
                let p = &g.factors[0];
                let mut out = vec![0; m * m];
                for i in 0..*m {
                    for j in 0..*m {
                        out[i * m + j] = p.apply(i) * m + p.apply(j);
                    }
                }
                out
            }
            ActionKind::SeparateRowCol { m, n } => {
                let (r, c) = (&g.factors[0], &g.factors[1]);
                let mut out = vec![0; m * n];
                for i in 0..*m {
                    for j in 0..*n {
                        out[i * n + j] = r.apply(i) * n + c.apply(j);
                    }
                }
                out
            }
            ActionKind::BlockedSequences { ns } => {
                let mut out = Vec::with_capacity(ns.iter().sum());
                let mut offset = 0;
                for (p, &n) in g.factors.iter().zip(ns) {
                    out.extend((0..n).map(|i| offset + p.apply(i)));
                    offset += n;
                }
                out
            }
        }
    }

    /// Permutation of cells induced by `g`.
    pub fn cell_permutation(&self, g: &GroupElement) -> Result<Permutation> {
        self.check_element(g)?;
        Ok(Permutation { image: self.cell_map(g) })
    }

    /// `g · x`.
    pub fn act(&self, g: &GroupElement, x: &[u32]) -> Result<State> {
        self.check_element(g)?;
        self.space.validate(x)?;
        Ok(permute_cells(&self.cell_map(g), x))
    }

    /// States reachable from `x` under the generators, ascending by index.
    pub fn orbit_indices(&self, x: &[u32]) -> Result<Vec<u64>> {
        let start = self.space.index_of(x)?;
        let mut seen = BTreeSet::new();
        seen.insert(start);
        let mut queue = VecDeque::new();
        queue.push_back(x.to_vec());
        while let Some(s) = queue.pop_front() {
            for cells in &self.generator_cells {
                let t = permute_cells(cells, &s);
                let ti = self.space.index_of(&t)?;
                if seen.insert(ti) {
                    queue.push_back(t);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Lexicographically minimal member of the orbit of `x`.
    pub fn canonical(&self, x: &[u32]) -> Result<State> {
        let orbit = self.orbit_indices(x)?;
        self.space.state_at(orbit[0])
    }

    /// Full orbit partition of the space, ids in order of first encounter
    /// during an index-order scan.
    pub fn orbits(&self, cap: u64) -> Result<OrbitTable> {
        let total = self.space.checked_size(cap)?;
        let mut orbit_of = vec![u32::MAX; total as usize];
        let mut members: Vec<Vec<u64>> = Vec::new();
        let radices = self.space.radices();
        let mut state = vec![0u32; radices.len()];
        let mut image = state.clone();
        let mut queue: Vec<u64> = Vec::new();
        for start in 0..total {
            if orbit_of[start as usize] != u32::MAX {
                continue;
            }
            let id = members.len() as u32;
            orbit_of[start as usize] = id;
            let mut list = vec![start];
            queue.clear();
            queue.push(start);
            while let Some(i) = queue.pop() {
                decode(&radices, i, &mut state);
                for cells in &self.generator_cells {
                    for (c, &d) in cells.iter().enumerate() {
                        image[d] = state[c];
                    }
                    let j = encode(&radices, &image);
                    if orbit_of[j as usize] == u32::MAX {
                        orbit_of[j as usize] = id;
                        list.push(j);
                        queue.push(j);
                    }
                }
            }
            list.sort_unstable();
            members.push(list);
        }
        Ok(OrbitTable { space: self.space.clone(), orbit_of, members })
    }

    /// Orbit count by Burnside's lemma, `(1/|G|) Σ_g |Fix(g)|`, iterating the
    /// full group. Fixed points of `g` are the colorings constant on each
    /// cycle of its cell permutation. Refuses groups larger than
    /// `max_order`.
    pub fn burnside_orbit_count(&self, max_order: u128) -> Result<u128> {
        let order = self.order().unwrap_or(u128::MAX);
        if order > max_order {
            return Err(Error::InvalidArgument(alloc::format!(
                "group order {order} exceeds the Burnside limit {max_order}"
            )));
        }
        let per_factor: Vec<Vec<Permutation>> =
            self.kind.factor_degrees().into_iter().map(Permutation::all).collect();
        let mut total: u128 = 0;
        let mut idx = vec![0usize; per_factor.len()];
        loop {
            let g = GroupElement { factors: idx.iter().zip(&per_factor).map(|(&i, f)| f[i].clone()).collect() };
            let cells = self.cell_map(&g);
            let mut fixed: u128 = 1;
            for cycle in cycles(&cells) {
                fixed = fixed
                    .checked_mul(self.space.alphabet_of(cycle[0]).len() as u128)
                    .ok_or(Error::InvalidArgument("fixed-point count overflows".into()))?;
            }
            total += fixed;
            // advance the mixed-radix counter over factors
            let mut f = per_factor.len();
            loop {
                if f == 0 {
                    return Ok(total / order);
                }
                f -= 1;
                idx[f] += 1;
                if idx[f] < per_factor[f].len() {
                    break;
                }
                idx[f] = 0;
            }
        }
    }

    /// Largest generator discrepancy `|P(x) − P(gx)|` over the support, if any.
    pub fn invariance_violation(&self, p: &FiniteDistribution) -> Result<Option<(State, State, Rational)>> {
        if p.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        let mut worst: Option<(State, State, Rational)> = None;
        for (x, px) in p.iter_states() {
            for cells in &self.generator_cells {
                let gx = permute_cells(cells, &x);
                let diff = (px - p.prob(self.space.index_of(&gx)?)).abs();
                if !diff.is_zero() && worst.as_ref().is_none_or(|w| diff > w.2) {
                    worst = Some((x.clone(), gx, diff));
                }
            }
        }
        Ok(worst)
    }

    /// Exact invariance under the generators (hence under the group).
    pub fn is_invariant(&self, p: &FiniteDistribution) -> Result<bool> {
        Ok(self.invariance_violation(p)?.is_none())
    }

    /// Orbit averaging: `P_G(x) = P(orbit(x)) / |orbit(x)|`.
    pub fn reynolds(&self, p: &FiniteDistribution) -> Result<FiniteDistribution> {
        if p.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        let mut out: BTreeMap<u64, Rational> = BTreeMap::new();
        for (x, _) in p.iter_states() {
            let xi = self.space.index_of(&x)?;
            if out.contains_key(&xi) {
                continue;
            }
            let orbit = self.orbit_indices(&x)?;
            let orbit_mass = orbit.iter().fold(Rational::zero(), |acc, &i| acc + p.prob(i));
            let share = orbit_mass / rational::int(orbit.len() as i64);
            for i in orbit {
                out.insert(i, share.clone());
            }
        }
        FiniteDistribution::new(self.space.clone(), out)
    }

    /// Weights of an invariant `P` on the extreme (orbit-uniform) measures.
    /// Fails with the largest generator violation when `P` is not invariant.
    pub fn decompose_invariant(&self, p: &FiniteDistribution) -> Result<Vec<OrbitWeight>> {
        if let Some((state, image, difference)) = self.invariance_violation(p)? {
            return Err(Error::NotInvariant { state, image, difference });
        }
        let mut done = BTreeSet::new();
        let mut out = Vec::new();
        for (x, _) in p.iter_states() {
            let xi = self.space.index_of(&x)?;
            if done.contains(&xi) {
                continue;
            }
            let orbit = self.orbit_indices(&x)?;
            let weight = orbit.iter().fold(Rational::zero(), |acc, &i| acc + p.prob(i));
            done.extend(orbit.iter().copied());
            out.push(OrbitWeight { representative: orbit[0], size: orbit.len(), weight });
        }
        out.sort_by_key(|w| w.representative);
        Ok(out)
    }

    /// Uniform distribution on the orbit of `x`.
    pub fn extreme_measure_of(&self, x: &[u32]) -> Result<FiniteDistribution> {
        let orbit = self.orbit_indices(x)?;
        let w = rational::ratio(1, orbit.len() as i64);
        FiniteDistribution::new(self.space.clone(), orbit.into_iter().map(|i| (i, w.clone())).collect())
    }

    /// `Σ_o w_o · e_o`.
    pub fn recompose(&self, weights: &[OrbitWeight]) -> Result<FiniteDistribution> {
        let mut out = BTreeMap::new();
        for w in weights {
            let x = self.space.state_at(w.representative)?;
            let orbit = self.orbit_indices(&x)?;
            let share = &w.weight / rational::int(orbit.len() as i64);
            for i in orbit {
                out.insert(i, share.clone());
            }
        }
        FiniteDistribution::new(self.space.clone(), out)
    }

    pub fn describe(&self) -> String {
        alloc::format!("{} on {}", self.kind, self.space)
    }
}

fn permute_cells(cells: &[usize], x: &[u32]) -> State {
    let mut y = vec![0u32; x.len()];
    for (c, &d) in cells.iter().enumerate() {
        y[d] = x[c];
    }
    y
}

fn decode(radices: &[u64], mut index: u64, out: &mut [u32]) {
    for c in (0..radices.len()).rev() {
        out[c] = (index % radices[c]) as u32;
        index /= radices[c];
    }
}

fn encode(radices: &[u64], state: &[u32]) -> u64 {
    state.iter().zip(radices).fold(0u64, |acc, (&s, &r)| acc * r + s as u64)
}

/// Weight of one orbit in the extreme-point decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitWeight {
    /// Index of the lexicographically minimal member.
    pub representative: u64,
    pub size: usize,
    pub weight: Rational,
}

/// Orbit partition of a whole state space.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    space: StateSpace,
    orbit_of: Vec<u32>,
    members: Vec<Vec<u64>>,
}

impl OrbitTable {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn orbit_of(&self, index: u64) -> usize {
        self.orbit_of[index as usize] as usize
    }

    /// Member indices of an orbit, ascending.
    pub fn members(&self, orbit: usize) -> &[u64] {
        &self.members[orbit]
    }

    pub fn representative(&self, orbit: usize) -> u64 {
        self.members[orbit][0]
    }

    pub fn size(&self, orbit: usize) -> usize {
        self.members[orbit].len()
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(Vec::len)
    }

    /// Uniform measure on one orbit.
    pub fn extreme_measure(&self, orbit: usize) -> Result<FiniteDistribution> {
        let members = self.members.get(orbit).ok_or(Error::UnknownOrbit(orbit))?;
        let w = rational::ratio(1, members.len() as i64);
        FiniteDistribution::new(self.space.clone(), members.iter().map(|&i| (i, w.clone())).collect())
    }

    /// Mass of each orbit under `p`.
    pub fn orbit_masses(&self, p: &FiniteDistribution) -> Result<Vec<Rational>> {
        if p.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        let mut out = vec![Rational::zero(); self.len()];
        for (&i, m) in p.mass() {
            out[self.orbit_of(i)] += m;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::space::DEFAULT_MAX_STATES;

    fn transposition() -> GroupElement {
        GroupElement::single(Permutation::transposition(3, 0, 1).unwrap())
    }

    #[test]
    fn act_on_sequence_and_identity() {
        let a = GroupAction::sequence(3, Alphabet::binary());
        assert_eq!(a.act(&transposition(), &[1, 0, 0]).unwrap(), vec![0, 1, 0]);
        assert_eq!(a.act(&a.identity(), &[1, 1, 0]).unwrap(), vec![1, 1, 0]);
        let wrong = GroupElement::single(Permutation::identity(2));
        assert!(matches!(a.act(&wrong, &[1, 0, 0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.act(&a.identity(), &[1, 0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn joint_swap_moves_off_diagonal_entry() {
        let a = GroupAction::joint_row_col(2, Alphabet::binary());
        let swap = GroupElement::single(Permutation::transposition(2, 0, 1).unwrap());
        assert_eq!(a.act(&swap, &[0, 1, 0, 0]).unwrap(), vec![0, 0, 1, 0]);
    }

    #[test]
    fn action_composes() {
        let a = GroupAction::separate_row_col(3, 2, Alphabet::range(3));
        let g = GroupElement::new(vec![Permutation::new(vec![1, 2, 0]).unwrap(), Permutation::transposition(2, 0, 1).unwrap()]);
        let h = GroupElement::new(vec![Permutation::transposition(3, 0, 2).unwrap(), Permutation::identity(2)]);
        let x = vec![0, 1, 2, 2, 1, 0];
        let lhs = a.act(&g, &a.act(&h, &x).unwrap()).unwrap();
        let rhs = a.act(&g.compose(&h).unwrap(), &x).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn orbit_counts() {
        let seq = GroupAction::sequence(3, Alphabet::binary());
        assert_eq!(seq.orbits(DEFAULT_MAX_STATES).unwrap().len(), 4);
        let joint = GroupAction::joint_row_col(2, Alphabet::binary());
        assert_eq!(joint.orbits(DEFAULT_MAX_STATES).unwrap().len(), 10);
        assert_eq!(joint.burnside_orbit_count(1000).unwrap(), 10);
        let sep = GroupAction::separate_row_col(2, 2, Alphabet::binary());
        assert_eq!(sep.orbits(DEFAULT_MAX_STATES).unwrap().len(), 7);
        assert_eq!(sep.burnside_orbit_count(1000).unwrap(), 7);
    }

    #[test]
    fn orbit_table_cap() {
        let a = GroupAction::sequence(30, Alphabet::binary());
        assert!(matches!(a.orbits(DEFAULT_MAX_STATES), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn canonical_forms() {
        let seq = GroupAction::sequence(3, Alphabet::binary());
        assert_eq!(seq.canonical(&[0, 1, 0]).unwrap(), vec![0, 0, 1]);
        let joint = GroupAction::joint_row_col(2, Alphabet::binary());
        assert_eq!(joint.canonical(&[0, 1, 0, 0]).unwrap(), vec![0, 0, 1, 0]);
        assert_eq!(joint.canonical(&[1, 0, 0, 1]).unwrap(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn extreme_measures() {
        let seq = GroupAction::sequence(3, Alphabet::binary());
        let table = seq.orbits(DEFAULT_MAX_STATES).unwrap();
        let space = seq.space();
        let o = table.orbit_of(space.index_of(&[1, 0, 0]).unwrap());
        let e = table.extreme_measure(o).unwrap();
        assert_eq!(e.support_len(), 3);
        for s in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            assert_eq!(e.prob_of(&s).unwrap(), ratio(1, 3));
        }
        let zero = table.orbit_of(0);
        assert_eq!(table.extreme_measure(zero).unwrap().support_len(), 1);
        assert_eq!(table.extreme_measure(99), Err(Error::UnknownOrbit(99)));

        let joint = GroupAction::joint_row_col(2, Alphabet::binary());
        let e = joint.extreme_measure_of(&[0, 1, 0, 0]).unwrap();
        assert_eq!(e.prob_of(&[0, 0, 1, 0]).unwrap(), ratio(1, 2));
        assert_eq!(e.prob_of(&[0, 1, 0, 0]).unwrap(), ratio(1, 2));
    }

    #[test]
    fn reynolds_examples() {
        let seq = GroupAction::sequence(3, Alphabet::binary());
        let point = FiniteDistribution::point_mass(seq.space().clone(), &[1, 0, 0]).unwrap();
        let avg = seq.reynolds(&point).unwrap();
        assert_eq!(avg, seq.extreme_measure_of(&[1, 0, 0]).unwrap());
        assert_eq!(seq.reynolds(&avg).unwrap(), avg);

        let pair = GroupAction::sequence(2, Alphabet::binary());
        let p = FiniteDistribution::from_states(
            pair.space().clone(),
            [(vec![0, 0], ratio(1, 2)), (vec![0, 1], ratio(1, 2))],
        )
        .unwrap();
        let avg = pair.reynolds(&p).unwrap();
        assert_eq!(avg.prob_of(&[0, 0]).unwrap(), ratio(1, 2));
        assert_eq!(avg.prob_of(&[0, 1]).unwrap(), ratio(1, 4));
        assert_eq!(avg.prob_of(&[1, 0]).unwrap(), ratio(1, 4));
    }

    #[test]
    fn decomposition_examples() {
        let pair = GroupAction::sequence(2, Alphabet::binary());
        let u = FiniteDistribution::uniform(pair.space().clone(), DEFAULT_MAX_STATES).unwrap();
        let w = pair.decompose_invariant(&u).unwrap();
        let weights: Vec<Rational> = w.iter().map(|o| o.weight.clone()).collect();
        assert_eq!(weights, vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]);
        assert_eq!(pair.recompose(&w).unwrap(), u);

        let e = pair.extreme_measure_of(&[0, 1]).unwrap();
        let w = pair.decompose_invariant(&e).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].weight, rational::one());

        let skew = FiniteDistribution::from_states(
            pair.space().clone(),
            [(vec![0, 1], ratio(3, 4)), (vec![1, 0], ratio(1, 4))],
        )
        .unwrap();
        match pair.decompose_invariant(&skew) {
            Err(Error::NotInvariant { difference, .. }) => assert_eq!(difference, ratio(1, 2)),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn all_permutations() {
        let all = Permutation::all(4);
        assert_eq!(all.len(), 24);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Permutation::all(0).len(), 1);
        assert!(Permutation::new(vec![0, 0]).is_err());
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert!(p.compose(&p.inverse()).unwrap().is_identity());
        assert_eq!(p.cycle_count(), 1);
    }
}
