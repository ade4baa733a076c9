//! Exchangeable distributions on sequences and blocked sequences.
//!
//! Sequence spaces are handled as blocked spaces with a single block, so
//! every operation here has one code path for both. Blocks are exchangeable
//! separately: the symmetry group is the product of the symmetric groups of
//! the blocks.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::dist::{tv_l1, FiniteDistribution};
use crate::error::{Error, Result};
use crate::group::{GroupAction, OrbitTable};
use crate::lp::{LinearProgram, LpSolution};
use crate::rational::{self, Rational};
use crate::space::{Block, StateSpace};
use crate::urn::beta_bound;

fn blocks_of(space: &StateSpace) -> Result<Vec<Block>> {
    space.blocks().ok_or(Error::UnsupportedSpace("operation needs a sequence or blocked space"))
}

/// Exchangeability under coordinate permutations within each block.
pub fn is_exchangeable(p: &FiniteDistribution) -> Result<bool> {
    GroupAction::coordinate_permutations(p.space())?.is_invariant(p)
}

/// A projection together with whether its source was exchangeable.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub distribution: FiniteDistribution,
    /// `false` means the projection depends on which coordinates were kept.
    pub source_exchangeable: bool,
}

/// Keeps the first `ks[i]` coordinates of block `i`.
fn truncate(p: &FiniteDistribution, ks: &[usize]) -> Result<FiniteDistribution> {
    let blocks = blocks_of(p.space())?;
    if ks.len() != blocks.len() {
        return Err(Error::DimensionMismatch { expected: blocks.len(), found: ks.len() });
    }
    for (b, &k) in blocks.iter().zip(ks) {
        if k > b.length {
            return Err(Error::InvalidArgument(alloc::format!(
                "cannot project a block of length {} onto {k} coordinates",
                b.length
            )));
        }
    }
    let target = p.space().with_block_lengths(ks)?;
    let lengths: Vec<usize> = blocks.iter().map(|b| b.length).collect();
    p.push_forward(target, |x| {
        let mut out = Vec::with_capacity(ks.iter().sum());
        let mut offset = 0;
        for (&n, &k) in lengths.iter().zip(ks) {
            out.extend_from_slice(&x[offset..offset + k]);
            offset += n;
        }
        out
    })
}

/// Projection of `P` on `S^n` onto its first `k` coordinates.
pub fn marginal(p: &FiniteDistribution, k: usize) -> Result<Marginal> {
    match p.space() {
        StateSpace::Sequence { .. } => blocked_marginal(p, &[k]),
        _ => Err(Error::UnsupportedSpace("marginal needs a sequence space; use blocked_marginal")),
    }
}

/// Per-block projection onto the first `ks[i]` coordinates of each block.
pub fn blocked_marginal(p: &FiniteDistribution, ks: &[usize]) -> Result<Marginal> {
    let distribution = truncate(p, ks)?;
    Ok(Marginal { distribution, source_exchangeable: is_exchangeable(p)? })
}

/// One atom of a mixing measure: a distribution on each block's alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MixtureAtom {
    /// `components[b][s]` is the probability of symbol position `s` in block `b`.
    pub components: Vec<Vec<Rational>>,
    pub weight: Rational,
}

/// Finite mixing measure over products of per-block distributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixingMeasure {
    pub atoms: Vec<MixtureAtom>,
}

impl MixingMeasure {
    /// Merges atoms with equal components and drops zero weights.
    pub fn from_atoms<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Vec<Rational>>, Rational)>,
    {
        let mut merged: BTreeMap<Vec<Vec<Rational>>, Rational> = BTreeMap::new();
        for (components, w) in atoms {
            for c in &components {
                let t = c.iter().fold(Rational::zero(), |a, v| a + v);
                if !t.is_one() {
                    return Err(Error::NotNormalized(t));
                }
            }
            *merged.entry(components).or_insert_with(Rational::zero) += w;
        }
        let atoms: Vec<MixtureAtom> = merged
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(components, weight)| MixtureAtom { components, weight })
            .collect();
        let total = atoms.iter().fold(Rational::zero(), |a, atom| a + &atom.weight);
        if !total.is_one() {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { atoms })
    }

    /// `Σ_atoms w · Π_b p_b^{⊗k_b}` on a sequence or blocked space.
    pub fn project(&self, space: &StateSpace, cap: u64) -> Result<FiniteDistribution> {
        let blocks = blocks_of(space)?;
        for atom in &self.atoms {
            if atom.components.len() != blocks.len() {
                return Err(Error::DimensionMismatch { expected: blocks.len(), found: atom.components.len() });
            }
            for (c, b) in atom.components.iter().zip(&blocks) {
                if c.len() != b.alphabet.len() {
                    return Err(Error::DimensionMismatch { expected: b.alphabet.len(), found: c.len() });
                }
            }
        }
        let block_of_cell: Vec<usize> =
            blocks.iter().enumerate().flat_map(|(i, b)| core::iter::repeat_n(i, b.length)).collect();
        let mut mass = BTreeMap::new();
        for (index, state) in space.states(cap)?.enumerate() {
            let mut total = Rational::zero();
            for atom in &self.atoms {
                let mut term = atom.weight.clone();
                for (cell, &s) in state.iter().enumerate() {
                    term *= &atom.components[block_of_cell[cell]][s as usize];
                    if term.is_zero() {
                        break;
                    }
                }
                total += term;
            }
            if !total.is_zero() {
                mass.insert(index as u64, total);
            }
        }
        FiniteDistribution::new(space.clone(), mass)
    }
}

/// Symbol frequencies of each block of `x`.
fn empirical_frequencies(x: &[u32], blocks: &[Block]) -> Vec<Vec<Rational>> {
    let mut offset = 0;
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        let mut counts = vec![0i64; b.alphabet.len()];
        for &s in &x[offset..offset + b.length] {
            counts[s as usize] += 1;
        }
        out.push(if b.length == 0 {
            // frequencies of an empty block are undefined; any fixed
            // distribution works since it is raised to the power zero
            let mut v = vec![Rational::zero(); b.alphabet.len()];
            v[0] = rational::one();
            v
        } else {
            counts.into_iter().map(|c| rational::ratio(c, b.length as i64)).collect()
        });
        offset += b.length;
    }
    out
}

/// Mixing measure of the empirical frequencies of `P` and its projection
/// onto `k` coordinates.
pub fn empirical_mixture(p: &FiniteDistribution, k: usize, cap: u64) -> Result<(MixingMeasure, FiniteDistribution)> {
    match p.space() {
        StateSpace::Sequence { .. } => blocked_empirical_mixture(p, &[k], cap),
        _ => Err(Error::UnsupportedSpace("empirical_mixture needs a sequence space")),
    }
}

/// Blocked version of [`empirical_mixture`]: one frequency vector per block.
pub fn blocked_empirical_mixture(
    p: &FiniteDistribution,
    ks: &[usize],
    cap: u64,
) -> Result<(MixingMeasure, FiniteDistribution)> {
    let blocks = blocks_of(p.space())?;
    if !is_exchangeable(p)? {
        return Err(Error::NotExchangeable);
    }
    let target = p.space().with_block_lengths(ks)?;
    for (b, &k) in blocks.iter().zip(ks) {
        if k > b.length {
            return Err(Error::InvalidArgument(alloc::format!("k = {k} exceeds block length {}", b.length)));
        }
    }
    let mu = MixingMeasure::from_atoms(p.iter_states().map(|(x, w)| (empirical_frequencies(&x, &blocks), w.clone())))?;
    let projected = mu.project(&target, cap)?;
    Ok((mu, projected))
}

/// Outcome of comparing a marginal with its empirical-mixture projection.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `tv_l1(P_k, P_{μk})`.
    pub tv: Rational,
    /// `2 β(ks, ns)`, in the same L1 norm.
    pub bound: Rational,
    pub holds: bool,
    pub mixing: MixingMeasure,
}

/// Checks `‖P_k − P_{μk}‖_1 ≤ 2β(k, n)` for the empirical mixing measure.
pub fn check_definetti_bound(p: &FiniteDistribution, ks: &[usize], cap: u64) -> Result<BoundReport> {
    let ns: Vec<usize> = blocks_of(p.space())?.iter().map(|b| b.length).collect();
    let (mixing, projected) = blocked_empirical_mixture(p, ks, cap)?;
    let marginal = truncate(p, ks)?;
    let tv = tv_l1(&marginal, &projected)?;
    let bound = rational::int(2) * beta_bound(ks, &ns)?;
    let holds = tv <= bound;
    Ok(BoundReport { tv, bound, holds, mixing })
}

/// Orbit-reduced marginal equations for extending distributions on a
/// `k`-space to exchangeable distributions on an `n`-space.
///
/// Columns are orbits of the extension space under its coordinate
/// permutations; rows are orbits of the base space. Entry `(r, o)` is the
/// mass the uniform measure on orbit `o` gives to base orbit `r` after
/// projection. The matrix depends only on the two spaces, so one instance
/// serves many right-hand sides.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    base: StateSpace,
    base_orbits: OrbitTable,
    extension_orbits: OrbitTable,
    columns: Vec<Vec<Rational>>,
}

impl ExtensionProblem {
    pub fn new(base: &StateSpace, ns: &[usize], cap: u64) -> Result<Self> {
        let blocks = blocks_of(base)?;
        let ks: Vec<usize> = blocks.iter().map(|b| b.length).collect();
        if ns.len() != ks.len() {
            return Err(Error::DimensionMismatch { expected: ks.len(), found: ns.len() });
        }
        if let Some((k, n)) = ks.iter().zip(ns).find(|(k, n)| n < k) {
            return Err(Error::InvalidArgument(alloc::format!("extension length {n} is below {k}")));
        }
        let extension = base.with_block_lengths(ns)?;
        let base_orbits = GroupAction::coordinate_permutations(base)?.orbits(cap)?;
        let extension_orbits = GroupAction::coordinate_permutations(&extension)?.orbits(cap)?;
        let mut columns = Vec::with_capacity(extension_orbits.len());
        for o in 0..extension_orbits.len() {
            let members = extension_orbits.members(o);
            let share = rational::ratio(1, members.len() as i64);
            let mut column = vec![Rational::zero(); base_orbits.len()];
            for &i in members {
                let x = extension.state_at(i)?;
                let mut y = Vec::with_capacity(ks.iter().sum());
                let mut offset = 0;
                for (&k, &n) in ks.iter().zip(ns) {
                    y.extend_from_slice(&x[offset..offset + k]);
                    offset += n;
                }
                column[base_orbits.orbit_of(base.index_of(&y)?)] += &share;
            }
            columns.push(column);
        }
        Ok(Self { base: base.clone(), base_orbits, extension_orbits, columns })
    }

    pub fn extension_space(&self) -> &StateSpace {
        self.extension_orbits.space()
    }

    /// Orbit weights `w ≥ 0`, `Σ w = 1`, reproducing `p_k`, if any exist.
    pub fn solve(&self, p_k: &FiniteDistribution) -> Result<Option<FiniteDistribution>> {
        if p_k.space() != &self.base {
            return Err(Error::SpaceMismatch);
        }
        if !is_exchangeable(p_k)? {
            return Err(Error::NotExchangeable);
        }
        let targets = self.base_orbits.orbit_masses(p_k)?;
        let vars = self.columns.len();
        let mut rows: Vec<Vec<Rational>> =
            (0..self.base_orbits.len()).map(|r| self.columns.iter().map(|c| c[r].clone()).collect()).collect();
        let mut rhs = targets;
        rows.push(vec![rational::one(); vars]);
        rhs.push(rational::one());
        let lp = LinearProgram::new(rows, rhs, vec![Rational::zero(); vars])?;
        let Some(weights) = lp.feasible_point() else {
            return Ok(None);
        };
        let mut mass = BTreeMap::new();
        for (o, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let share = w / rational::int(self.extension_orbits.size(o) as i64);
            for &i in self.extension_orbits.members(o) {
                mass.insert(i, share.clone());
            }
        }
        let witness = FiniteDistribution::new(self.extension_space().clone(), mass)
            .map_err(|e| Error::Lp(alloc::format!("extension witness is not a distribution: {e}")))?;
        // exact re-check of the witness against the requested marginal
        let ks: Vec<usize> = blocks_of(&self.base)?.iter().map(|b| b.length).collect();
        if truncate(&witness, &ks)? != *p_k {
            return Err(Error::Lp("extension witness does not reproduce the marginal".into()));
        }
        Ok(Some(witness))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extendibility {
    pub feasible: bool,
    pub witness: Option<FiniteDistribution>,
}

/// Decides whether exchangeable `p_k` is the marginal of an exchangeable
/// distribution with block lengths `ns`.
pub fn extendibility_lp(p_k: &FiniteDistribution, ns: &[usize], cap: u64) -> Result<Extendibility> {
    let witness = ExtensionProblem::new(p_k.space(), ns, cap)?.solve(p_k)?;
    Ok(Extendibility { feasible: witness.is_some(), witness })
}

/// Result of the mixture-gap linear program.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Minimal `tv_l1(P_k, Σ_j μ_j p_j^{⊗k})` over grid mixtures.
    pub gap: Rational,
    /// Grid atoms with positive optimal weight.
    pub mixing: MixingMeasure,
    pub grid_points: usize,
}

/// All distributions on `symbols` categories whose entries are multiples of
/// `1/(points − 1)`. For two symbols this is `p ∈ {0, 1/(G−1), …, 1}`.
pub fn simplex_grid(symbols: usize, points: usize) -> Result<Vec<Vec<Rational>>> {
    if points < 2 {
        return Err(Error::EmptyGrid(points));
    }
    let steps = points - 1;
    let mut out = Vec::new();
    let mut parts = vec![0usize; symbols];
    fn fill(i: usize, left: usize, parts: &mut Vec<usize>, steps: usize, out: &mut Vec<Vec<Rational>>) {
        if i + 1 == parts.len() {
            parts[i] = left;
            out.push(parts.iter().map(|&c| Rational::new(BigInt::from(c), BigInt::from(steps))).collect());
            return;
        }
        for c in 0..=left {
            parts[i] = c;
            fill(i + 1, left - c, parts, steps, out);
        }
    }
    fill(0, steps, &mut parts, steps, &mut out);
    Ok(out)
}

/// Distance from `p_k` to the closest mixture of powers of grid
/// distributions, solved exactly as a linear program.
///
/// Variables are the mixture weights `μ_j` and one epigraph variable `t_x`
/// per state (per orbit, for exchangeable input) with
/// `t_x ≥ |P(x) − Σ_j μ_j A_{xj}|`; the objective is `Σ t_x`.
pub fn definetti_gap(p_k: &FiniteDistribution, grid_points: usize, cap: u64) -> Result<GapReport> {
    let alphabet = match p_k.space() {
        StateSpace::Sequence { alphabet, .. } => alphabet.clone(),
        _ => return Err(Error::UnsupportedSpace("definetti_gap needs a sequence space")),
    };
    let grid = simplex_grid(alphabet.len(), grid_points)?;
    let space = p_k.space();
    // Mixtures of powers are exchangeable, so for exchangeable P_k both
    // sides are constant on orbits and the distance only involves orbit
    // masses. Otherwise every state is its own cell.
    let cells: Vec<Vec<u64>> = if is_exchangeable(p_k)? {
        let table = GroupAction::coordinate_permutations(space)?.orbits(cap)?;
        (0..table.len()).map(|o| table.members(o).to_vec()).collect()
    } else {
        (0..space.checked_size(cap)?).map(|i| vec![i]).collect()
    };
    let nx = cells.len();
    let nj = grid.len();
    let power = |p: &[Rational], x: &[u32]| x.iter().fold(rational::one(), |acc, &s| acc * &p[s as usize]);
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(nx);
    let mut targets: Vec<Rational> = Vec::with_capacity(nx);
    for cell in &cells {
        // powers are constant on an orbit: evaluate once, scale by its size
        let x = space.state_at(cell[0])?;
        let size = rational::int(cell.len() as i64);
        a.push(grid.iter().map(|p| power(p, &x) * &size).collect());
        targets.push(cell.iter().fold(Rational::zero(), |acc, &i| acc + p_k.prob(i)));
    }

    // columns: μ (nj), t (nx), s+ (nx), s- (nx)
    let width = nj + 3 * nx;
    let mut rows = Vec::with_capacity(2 * nx + 1);
    let mut rhs = Vec::with_capacity(2 * nx + 1);
    for (x, (ax, px)) in a.iter().zip(targets).enumerate() {
        // t_x + Σ A μ − s⁺ = P(x)
        let mut row = vec![Rational::zero(); width];
        row[..nj].clone_from_slice(ax);
        row[nj + x] = rational::one();
        row[nj + nx + x] = -rational::one();
        rows.push(row);
        rhs.push(px.clone());
        // t_x − Σ A μ − s⁻ = −P(x)
        let mut row = vec![Rational::zero(); width];
        for (j, v) in ax.iter().enumerate() {
            row[j] = -v;
        }
        row[nj + x] = rational::one();
        row[nj + 2 * nx + x] = -rational::one();
        rows.push(row);
        rhs.push(-px);
    }
    let mut row = vec![Rational::zero(); width];
    for v in row.iter_mut().take(nj) {
        *v = rational::one();
    }
    rows.push(row);
    rhs.push(rational::one());
    let mut cost = vec![Rational::zero(); width];
    for v in cost.iter_mut().skip(nj).take(nx) {
        *v = rational::one();
    }
    let lp = LinearProgram::new(rows, rhs, cost)?;
    let (x, value) = match lp.solve() {
        LpSolution::Optimal { x, value } => (x, value),
        other => return Err(Error::Lp(alloc::format!("mixture-gap program ended as {other:?}"))),
    };
    let mixing =
        MixingMeasure::from_atoms(grid.into_iter().zip(x.into_iter().take(nj)).map(|(p, w)| (vec![p], w)))
            .map_err(|e| Error::Lp(alloc::format!("optimal weights are not a distribution: {e}")))?;
    // exact re-evaluation of the objective at the returned weights
    let projected = mixing.project(p_k.space(), cap)?;
    let achieved = tv_l1(p_k, &projected)?;
    if achieved != value {
        return Err(Error::Lp(alloc::format!("objective {value} disagrees with achieved distance {achieved}")));
    }
    Ok(GapReport { gap: value, mixing, grid_points })
}
