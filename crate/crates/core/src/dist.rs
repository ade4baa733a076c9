//! Probability mass functions over enumerated spaces and the two
//! total-variation conventions.
//!
//! `tv_l1` is the sum of absolute pointwise differences; `tv_sup` is the
//! largest difference over events and equals half of it. Bound checks name
//! the norm they use.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{State, StateSpace};

/// Exact pmf over a [`StateSpace`]; zero masses are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDistribution {
    space: StateSpace,
    mass: BTreeMap<u64, Rational>,
}

impl FiniteDistribution {
    /// Checks non-negativity, range and exact normalization.
    pub fn new(space: StateSpace, mass: BTreeMap<u64, Rational>) -> Result<Self> {
        let d = Self::from_parts(space, mass)?;
        let total = d.total();
        if total != rational::one() {
            return Err(Error::NotNormalized(total));
        }
        Ok(d)
    }

    /// Validates entries but not normalization.
    fn from_parts(space: StateSpace, mut mass: BTreeMap<u64, Rational>) -> Result<Self> {
        let size = space.size().unwrap_or(u128::MAX);
        for (&index, m) in &mass {
            if (index as u128) >= size {
                return Err(Error::StateOutOfRange(index));
            }
            if m.is_negative() {
                return Err(Error::NegativeMass { index, mass: m.clone() });
            }
        }
        mass.retain(|_, m| !m.is_zero());
        Ok(Self { space, mass })
    }

    /// Builds from `(state, mass)` pairs; repeated states accumulate.
    pub fn from_states<I>(space: StateSpace, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (State, Rational)>,
    {
        let mut mass = BTreeMap::new();
        for (state, m) in entries {
            let index = space.index_of(&state)?;
            *mass.entry(index).or_insert_with(Rational::zero) += m;
        }
        Self::new(space, mass)
    }

    pub fn point_mass(space: StateSpace, state: &[u32]) -> Result<Self> {
        let index = space.index_of(state)?;
        let mut mass = BTreeMap::new();
        mass.insert(index, rational::one());
        Self::new(space, mass)
    }

    /// Uniform over the listed states (duplicates ignored).
    pub fn uniform_on<I>(space: StateSpace, states: I) -> Result<Self>
    where
        I: IntoIterator<Item = State>,
    {
        let mut indices = Vec::new();
        for s in states {
            indices.push(space.index_of(&s)?);
        }
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(Error::NotNormalized(Rational::zero()));
        }
        let w = rational::ratio(1, indices.len() as i64);
        Self::new(space, indices.into_iter().map(|i| (i, w.clone())).collect())
    }

    /// Uniform over the whole space (subject to `cap`).
    pub fn uniform(space: StateSpace, cap: u64) -> Result<Self> {
        let n = space.checked_size(cap)?;
        let w = Rational::new(1.into(), n.into());
        let mass = (0..n).map(|i| (i, w.clone())).collect();
        Self::new(space, mass)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn mass(&self) -> &BTreeMap<u64, Rational> {
        &self.mass
    }

    pub fn into_parts(self) -> (StateSpace, BTreeMap<u64, Rational>) {
        (self.space, self.mass)
    }

    pub fn prob(&self, index: u64) -> Rational {
        self.mass.get(&index).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn prob_of(&self, state: &[u32]) -> Result<Rational> {
        Ok(self.prob(self.space.index_of(state)?))
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    /// `(state, mass)` over the support, in index order.
    pub fn iter_states(&self) -> impl Iterator<Item = (State, &Rational)> + '_ {
        self.mass
            .iter()
            .map(move |(&i, m)| (self.space.state_at(i).expect("stored index is in range"), m))
    }

    pub fn total(&self) -> Rational {
        self.mass.values().fold(Rational::zero(), |acc, m| acc + m)
    }

    /// Pushes mass forward along `f`, which maps states of this space to
    /// states of `target`.
    pub fn push_forward<F>(&self, target: StateSpace, mut f: F) -> Result<Self>
    where
        F: FnMut(&[u32]) -> State,
    {
        let mut mass = BTreeMap::new();
        for (state, m) in self.iter_states() {
            let image = f(&state);
            let index = target.index_of(&image)?;
            *mass.entry(index).or_insert_with(Rational::zero) += m;
        }
        Self::new(target, mass)
    }

    /// Convex combination `Σ w_i · D_i` of distributions over one space.
    pub fn mixture<'a, I>(space: StateSpace, parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a Rational, &'a FiniteDistribution)>,
    {
        let mut mass: BTreeMap<u64, Rational> = BTreeMap::new();
        for (w, d) in parts {
            if d.space != space {
                return Err(Error::SpaceMismatch);
            }
            for (&i, m) in &d.mass {
                *mass.entry(i).or_insert_with(Rational::zero) += w * m;
            }
        }
        Self::new(space, mass)
    }
}

fn check_pair(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<()> {
    if p.space != q.space {
        return Err(Error::SpaceMismatch);
    }
    for d in [p, q] {
        let t = d.total();
        if t != rational::one() {
            return Err(Error::NotNormalized(t));
        }
    }
    Ok(())
}

/// `Σ_x |P(x) − Q(x)|`, exactly.
pub fn tv_l1(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<Rational> {
    check_pair(p, q)?;
    let mut sum = Rational::zero();
    for (i, pm) in &p.mass {
        match q.mass.get(i) {
            Some(qm) => sum += (pm - qm).abs(),
            None => sum += pm,
        }
    }
    for (i, qm) in &q.mass {
        if !p.mass.contains_key(i) {
            sum += qm;
        }
    }
    Ok(sum)
}

/// `max_A |P(A) − Q(A)|`, which is half of [`tv_l1`].
pub fn tv_sup(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<Rational> {
    Ok(tv_l1(p, q)? / rational::int(2))
}

/// One factor of a product-measure comparison: the multiset of value pairs
/// `(P_i(x), Q_i(x))` over the factor's state space, with multiplicities.
/// Pairs with both values zero may be omitted.
pub type FactorLevels = Vec<((Rational, Rational), u64)>;

/// Groups the pointwise value pairs of two distributions on one factor space.
pub fn factor_levels(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<FactorLevels> {
    check_pair(p, q)?;
    let mut levels: BTreeMap<(Rational, Rational), u64> = BTreeMap::new();
    let mut indices: Vec<u64> = p.mass.keys().chain(q.mass.keys()).copied().collect();
    indices.sort_unstable();
    indices.dedup();
    for i in indices {
        *levels.entry((p.prob(i), q.prob(i))).or_insert(0) += 1;
    }
    Ok(levels.into_iter().collect())
}

/// L1 distance between `⊗ P_i` and `⊗ Q_i` given each factor's value-pair
/// levels. Summing `|Π p − Π q|` over all combinations of levels weighted
/// by the product of multiplicities visits every state of the product space
/// exactly once, so this equals enumerating the product space directly.
pub fn tv_l1_product(factors: &[FactorLevels]) -> Rational {
    fn go(factors: &[FactorLevels], p: &Rational, q: &Rational, count: &Rational, acc: &mut Rational) {
        match factors.split_first() {
            None => *acc += count * (p - q).abs(),
            Some((first, rest)) => {
                for ((pi, qi), c) in first {
                    go(rest, &(p * pi), &(q * qi), &(count * Rational::from_integer((*c).into())), acc);
                }
            }
        }
    }
    let mut acc = Rational::zero();
    go(factors, &rational::one(), &rational::one(), &rational::one(), &mut acc);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::space::{Alphabet, DEFAULT_MAX_STATES};
    use alloc::vec;

    fn pairs() -> StateSpace {
        StateSpace::sequence(2, Alphabet::binary())
    }

    #[test]
    fn antidiagonal_against_uniform() {
        let p = FiniteDistribution::uniform_on(pairs(), [vec![0, 1], vec![1, 0]]).unwrap();
        let q = FiniteDistribution::uniform(pairs(), DEFAULT_MAX_STATES).unwrap();
        assert_eq!(tv_l1(&p, &q).unwrap(), rational::one());
        assert_eq!(tv_sup(&p, &q).unwrap(), ratio(1, 2));
        assert_eq!(tv_l1(&p, &p).unwrap(), Rational::zero());
    }

    #[test]
    fn disjoint_point_masses() {
        let p = FiniteDistribution::point_mass(pairs(), &[0, 0]).unwrap();
        let q = FiniteDistribution::point_mass(pairs(), &[1, 0]).unwrap();
        assert_eq!(tv_l1(&p, &q).unwrap(), rational::int(2));
        assert_eq!(tv_sup(&p, &q).unwrap(), rational::one());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = FiniteDistribution::point_mass(pairs(), &[0, 0]).unwrap();
        let other = FiniteDistribution::point_mass(StateSpace::sequence(3, Alphabet::binary()), &[0, 0, 0]).unwrap();
        assert_eq!(tv_l1(&p, &other), Err(Error::SpaceMismatch));

        let mut mass = BTreeMap::new();
        mass.insert(0, ratio(1, 2));
        assert!(matches!(FiniteDistribution::new(pairs(), mass), Err(Error::NotNormalized(_))));

        let mut mass = BTreeMap::new();
        mass.insert(0, ratio(3, 2));
        mass.insert(1, ratio(-1, 2));
        assert!(matches!(FiniteDistribution::new(pairs(), mass), Err(Error::NegativeMass { .. })));

        let mut mass = BTreeMap::new();
        mass.insert(4, rational::one());
        assert_eq!(FiniteDistribution::new(pairs(), mass), Err(Error::StateOutOfRange(4)));
    }

    #[test]
    fn product_levels_match_direct_enumeration() {
        // P = antidiagonal ⊗ antidiagonal, Q = uniform ⊗ uniform on ({0,1}²)².
        let p1 = FiniteDistribution::uniform_on(pairs(), [vec![0, 1], vec![1, 0]]).unwrap();
        let q1 = FiniteDistribution::uniform(pairs(), DEFAULT_MAX_STATES).unwrap();
        let levels = factor_levels(&p1, &q1).unwrap();
        let product = tv_l1_product(&[levels.clone(), levels]);

        let four = StateSpace::sequence(4, Alphabet::binary());
        let p = FiniteDistribution::uniform_on(
            four.clone(),
            [vec![0, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 0, 0, 1], vec![1, 0, 1, 0]],
        )
        .unwrap();
        let q = FiniteDistribution::uniform(four, DEFAULT_MAX_STATES).unwrap();
        assert_eq!(product, tv_l1(&p, &q).unwrap());
        assert_eq!(product, ratio(3, 2));
    }
}
