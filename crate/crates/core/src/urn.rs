//! Sampling with and without replacement from several urns.
//!
//! Urn `i` holds balls labelled `0..n_i` and `k_i` ordered draws are taken
//! from it. With replacement every tuple-of-tuples is equally likely (`M`);
//! without replacement only tuples whose draws are distinct within each urn
//! occur, again uniformly (`Q`). States are the concatenated draw tuples in
//! mixed radix.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::dist::{factor_levels, tv_l1, tv_l1_product, FiniteDistribution};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::space::{Alphabet, Block, StateSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrnSystem {
    sizes: Vec<usize>,
    draws: Vec<usize>,
}

impl UrnSystem {
    pub fn new(sizes: Vec<usize>, draws: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() != draws.len() || sizes.contains(&0) {
            return Err(Error::InvalidUrnSystem);
        }
        check_draws(&draws, &sizes)?;
        Ok(Self { sizes, draws })
    }

    pub fn urns(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn draws(&self) -> &[usize] {
        &self.draws
    }

    /// Space of draw tuples: one block of length `k_i` over `0..n_i` per urn.
    pub fn space(&self) -> StateSpace {
        StateSpace::blocked(
            self.sizes
                .iter()
                .zip(&self.draws)
                .map(|(&n, &k)| Block { length: k, alphabet: Alphabet::range(n) })
                .collect(),
        )
    }

    /// The same system restricted to urn `i`.
    pub fn single(&self, i: usize) -> UrnSystem {
        UrnSystem { sizes: vec![self.sizes[i]], draws: vec![self.draws[i]] }
    }
}

fn check_draws(ks: &[usize], ns: &[usize]) -> Result<()> {
    if ks.len() != ns.len() {
        return Err(Error::DimensionMismatch { expected: ns.len(), found: ks.len() });
    }
    for (urn, (&k, &n)) in ks.iter().zip(ns).enumerate() {
        if k > n {
            return Err(Error::DrawsExceedSize { urn, draws: k, size: n });
        }
    }
    Ok(())
}

/// Probability that `k` draws with replacement from `n` balls are
/// distinct: `Π_{j<k} (n − j)/n`.
pub fn distinct_fraction(k: usize, n: usize) -> Rational {
    (0..k).fold(rational::one(), |acc, j| acc * Rational::new(BigInt::from(n - j), BigInt::from(n)))
}

/// `β(ks, ns) = 1 − Π_i n_i! / ((n_i − k_i)! · n_i^{k_i})`.
pub fn beta_bound(ks: &[usize], ns: &[usize]) -> Result<Rational> {
    check_draws(ks, ns)?;
    let kept = ks.iter().zip(ns).fold(rational::one(), |acc, (&k, &n)| acc * distinct_fraction(k, n));
    Ok(rational::one() - kept)
}

/// Upper bound `Σ_i k_i (k_i − 1) / (2 n_i)` on `β(ks, ns)`.
pub fn rate_bound(ks: &[usize], ns: &[usize]) -> Result<Rational> {
    check_draws(ks, ns)?;
    Ok(ks.iter().zip(ns).fold(Rational::zero(), |acc, (&k, &n)| {
        acc + Rational::new(BigInt::from(k * k.saturating_sub(1)), BigInt::from(2 * n))
    }))
}

/// `M`: uniform on all draw tuples.
pub fn with_replacement_dist(urns: &UrnSystem, cap: u64) -> Result<FiniteDistribution> {
    FiniteDistribution::uniform(urns.space(), cap)
}

/// `Q`: uniform on tuples whose draws are distinct within every urn.
pub fn without_replacement_dist(urns: &UrnSystem, cap: u64) -> Result<FiniteDistribution> {
    let space = urns.space();
    let blocks = space.blocks().expect("urn spaces are blocked");
    let mut support = Vec::new();
    for state in space.states(cap)? {
        let mut offset = 0;
        let mut ok = true;
        for b in &blocks {
            let draws = &state[offset..offset + b.length];
            if !all_distinct(draws) {
                ok = false;
                break;
            }
            offset += b.length;
        }
        if ok {
            support.push(space.index_of(&state)?);
        }
    }
    let w = Rational::new(BigInt::from(1), BigInt::from(support.len()));
    let mass: BTreeMap<u64, Rational> = support.into_iter().map(|i| (i, w.clone())).collect();
    FiniteDistribution::new(space, mass)
}

fn all_distinct(draws: &[u32]) -> bool {
    draws.iter().enumerate().all(|(i, a)| !draws[..i].contains(a))
}

/// Sup-norm distance between `M` and `Q`.
///
/// Each urn's pair `(M_i, Q_i)` is enumerated explicitly; the product over
/// urns is then summed level by level (see [`tv_l1_product`]), which covers
/// every state of the joint space without materializing it. `cap` bounds
/// each single-urn space.
pub fn urn_tv(urns: &UrnSystem, cap: u64) -> Result<Rational> {
    let mut factors = Vec::with_capacity(urns.urns());
    for i in 0..urns.urns() {
        let single = urns.single(i);
        let m = with_replacement_dist(&single, cap)?;
        let q = without_replacement_dist(&single, cap)?;
        factors.push(factor_levels(&m, &q)?);
    }
    Ok(tv_l1_product(&factors) / rational::int(2))
}

/// Sup-norm distance between `M` and `Q` by materializing both on the full
/// joint space.
pub fn urn_tv_enumerated(urns: &UrnSystem, cap: u64) -> Result<Rational> {
    let m = with_replacement_dist(urns, cap)?;
    let q = without_replacement_dist(urns, cap)?;
    Ok(tv_l1(&m, &q)? / rational::int(2))
}

/// `p^{⊗k}` mass of the event "all k draws distinct", i.e. `k! · e_k(p)`.
/// Returns zero when `k` exceeds the number of categories.
pub fn power_distinct_mass(p: &[Rational], k: usize) -> Rational {
    if k > p.len() {
        return Rational::zero();
    }
    // e[j] = elementary symmetric polynomial of degree j over a growing prefix
    let mut e = vec![Rational::zero(); k + 1];
    e[0] = rational::one();
    for x in p {
        for j in (1..=k).rev() {
            let add = &e[j - 1] * x;
            e[j] += add;
        }
    }
    let factorial = (1..=k).fold(BigInt::from(1), |acc, j| acc * BigInt::from(j));
    &e[k] * Rational::from_integer(factorial)
}
