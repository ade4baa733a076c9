//! Orbit-averaged empirical estimation and Monte Carlo invariance tests.
//!
//! Both tests use a parametric bootstrap: replicate samples of the observed
//! size are drawn i.i.d. from the orbit-averaged estimate `ℙ_G` and the
//! statistic is recomputed. Replicate `b` uses stream `b` of a ChaCha8
//! generator keyed by the seed, so results depend only on `(seed, B)`.
//! P-values are `(1 + #{replicates at least as extreme})/(B + 1)`; ties
//! count as extreme.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::array::draw_rng;
use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};
use crate::exch::ExtensionProblem;
use crate::group::GroupAction;
use crate::rational::{self, Rational};
use crate::space::{State, StateSpace};

/// Nominal levels reported in every [`TestReport`].
pub const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// Observed states with positive multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    space: StateSpace,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl SampleSet {
    pub fn new<I>(space: StateSpace, observations: I) -> Result<Self>
    where
        I: IntoIterator<Item = State>,
    {
        Self::weighted(space, observations.into_iter().map(|s| (s, 1)))
    }

    /// Observations with counts; zero counts are rejected.
    pub fn weighted<I>(space: StateSpace, observations: I) -> Result<Self>
    where
        I: IntoIterator<Item = (State, u64)>,
    {
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for (state, c) in observations {
            if c == 0 {
                return Err(Error::InvalidArgument("sample weights must be positive".into()));
            }
            let i = space.index_of(&state)?;
            *counts.entry(i).or_insert(0) += c;
            total += c;
        }
        Ok(Self { space, counts, total })
    }

    fn from_counts(space: StateSpace, counts: BTreeMap<u64, u64>) -> Self {
        let total = counts.values().sum();
        Self { space, counts, total }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Total number of observations.
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Unrestricted empirical distribution `ℙ`.
    pub fn empirical(&self) -> Result<FiniteDistribution> {
        if self.is_empty() {
            return Err(Error::EmptySamples);
        }
        let n = BigInt::from(self.total);
        let mass = self.counts.iter().map(|(&i, &c)| (i, Rational::new(BigInt::from(c), n.clone()))).collect();
        FiniteDistribution::new(self.space.clone(), mass)
    }
}

/// The orbit-averaged empirical distribution `ℙ_G`.
pub fn invariant_npmle(samples: &SampleSet, action: &GroupAction) -> Result<FiniteDistribution> {
    if samples.space() != action.space() {
        return Err(Error::SpaceMismatch);
    }
    action.reynolds(&samples.empirical()?)
}

/// Which tail of the null distribution counts as extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub statistic: Rational,
    pub replicates: usize,
    pub seed: u64,
    pub tail: Tail,
    /// Replicates at least as extreme as the observed statistic.
    pub extreme: usize,
    pub p_value: Rational,
    /// `(level, rejected)` for each of [`LEVELS`].
    pub decisions: Vec<(f64, bool)>,
}

impl TestReport {
    fn new(statistic: Rational, replicates: usize, seed: u64, tail: Tail, extreme: usize) -> Self {
        let p_value = Rational::new(BigInt::from(extreme + 1), BigInt::from(replicates + 1));
        let p = rational::to_f64(&p_value);
        let decisions = LEVELS.iter().map(|&a| (a, p <= a)).collect();
        Self { statistic, replicates, seed, tail, extreme, p_value, decisions }
    }

    pub fn p_value_f64(&self) -> f64 {
        rational::to_f64(&self.p_value)
    }

    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value_f64() <= level
    }
}

/// `‖ℙ − ℙ_G‖₁` computed from counts, memoizing orbits.
struct InvarianceStatistic<'a> {
    action: &'a GroupAction,
    orbit_of: BTreeMap<u64, usize>,
    orbits: Vec<Vec<u64>>,
}

impl<'a> InvarianceStatistic<'a> {
    fn new(action: &'a GroupAction) -> Self {
        Self { action, orbit_of: BTreeMap::new(), orbits: Vec::new() }
    }

    fn orbit(&mut self, index: u64) -> Result<usize> {
        if let Some(&o) = self.orbit_of.get(&index) {
            return Ok(o);
        }
        let state = self.action.space().state_at(index)?;
        let members = self.action.orbit_indices(&state)?;
        let id = self.orbits.len();
        for &m in &members {
            self.orbit_of.insert(m, id);
        }
        self.orbits.push(members);
        Ok(id)
    }

    /// `(1/N) Σ_o Σ_{x∈o} |c_x − C_o/s_o|`, evaluated per orbit as
    /// `Σ_x |s_o c_x − C_o| / (N s_o)`.
    fn eval(&mut self, counts: &BTreeMap<u64, u64>) -> Result<Rational> {
        let total: u64 = counts.values().sum();
        let mut by_orbit: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for (&i, &c) in counts {
            let o = self.orbit(i)?;
            by_orbit.entry(o).or_default().push(c);
        }
        let mut sum = Rational::zero();
        for (o, cs) in by_orbit {
            let size = self.orbits[o].len() as i128;
            let orbit_count: i128 = cs.iter().map(|&c| c as i128).sum();
            let mut numer: i128 = cs.iter().map(|&c| (size * c as i128 - orbit_count).abs()).sum();
            numer += (size - cs.len() as i128) * orbit_count;
            sum += Rational::new(BigInt::from(numer), BigInt::from(size) * BigInt::from(total));
        }
        Ok(sum)
    }
}

fn bootstrap_sampler(p: &FiniteDistribution) -> Result<(Vec<u64>, WeightedIndex<f64>)> {
    let (states, weights): (Vec<u64>, Vec<f64>) = p.mass().iter().map(|(&i, m)| (i, rational::to_f64(m))).unzip();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(alloc::format!("bootstrap weights: {e}")))?;
    Ok((states, dist))
}

fn draw_counts(
    states: &[u64],
    dist: &WeightedIndex<f64>,
    n: u64,
    seed: u64,
    replicate: usize,
) -> BTreeMap<u64, u64> {
    let mut rng = draw_rng(seed, replicate as u64);
    let mut counts = BTreeMap::new();
    for _ in 0..n {
        *counts.entry(states[dist.sample(&mut rng)]).or_insert(0) += 1;
    }
    counts
}

/// Invariance test with statistic `T = ‖ℙ − ℙ_G‖₁`, rejecting for large `T`.
pub fn exch_test(samples: &SampleSet, action: &GroupAction, replicates: usize, seed: u64) -> Result<TestReport> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("at least one bootstrap replicate is required".into()));
    }
    let null = invariant_npmle(samples, action)?;
    let mut stat = InvarianceStatistic::new(action);
    let observed = stat.eval(samples.counts())?;
    let (states, dist) = bootstrap_sampler(&null)?;
    let mut extreme = 0;
    for b in 0..replicates {
        let counts = draw_counts(&states, &dist, samples.len(), seed, b);
        if stat.eval(&counts)? >= observed {
            extreme += 1;
        }
    }
    Ok(TestReport::new(observed, replicates, seed, Tail::Upper, extreme))
}

/// Largest extension size reachable by scanning upward from the sample's
/// own size, with cached marginal systems per size.
struct ExtensionScan {
    base: StateSpace,
    ks: Vec<usize>,
    start: usize,
    r_max: usize,
    cap: u64,
    problems: BTreeMap<usize, ExtensionProblem>,
}

impl ExtensionScan {
    fn new(base: &StateSpace, r_max: usize, cap: u64) -> Result<Self> {
        let blocks = base.blocks().ok_or(Error::UnsupportedSpace("extendibility test needs sequences or blocked sequences"))?;
        let ks: Vec<usize> = blocks.iter().map(|b| b.length).collect();
        let start = ks.iter().copied().max().unwrap_or(0);
        if r_max < start {
            return Err(Error::InvalidArgument(alloc::format!("r_max = {r_max} is below the sample size {start}")));
        }
        Ok(Self { base: base.clone(), ks, start, r_max, cap, problems: BTreeMap::new() })
    }

    /// Block lengths for extension size `r`: every block grows by `r − start`.
    fn lengths(&self, r: usize) -> Vec<usize> {
        self.ks.iter().map(|&k| k + (r - self.start)).collect()
    }

    fn statistic(&mut self, p: &FiniteDistribution) -> Result<usize> {
        let mut best = self.start;
        for r in self.start + 1..=self.r_max {
            if !self.problems.contains_key(&r) {
                let problem = ExtensionProblem::new(&self.base, &self.lengths(r), self.cap)?;
                self.problems.insert(r, problem);
            }
            if self.problems[&r].solve(p)?.is_none() {
                break;
            }
            best = r;
        }
        Ok(best)
    }
}

/// Extendibility test: `T` is the largest `r ≤ r_max` such that `ℙ_G`
/// extends to an exchangeable law on sequences of length `r` (for blocked
/// spaces, every block grown by `r − max_i k_i`). Rejects for small `T`.
pub fn extendibility_test(
    samples: &SampleSet,
    r_max: usize,
    replicates: usize,
    seed: u64,
    cap: u64,
) -> Result<TestReport> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("at least one bootstrap replicate is required".into()));
    }
    let action = GroupAction::coordinate_permutations(samples.space())?;
    let mut scan = ExtensionScan::new(samples.space(), r_max, cap)?;
    let null = invariant_npmle(samples, &action)?;
    let observed = scan.statistic(&null)?;
    let (states, dist) = bootstrap_sampler(&null)?;
    let mut extreme = 0;
    for b in 0..replicates {
        let counts = draw_counts(&states, &dist, samples.len(), seed, b);
        let replicate = SampleSet::from_counts(samples.space().clone(), counts);
        let p = action.reynolds(&replicate.empirical()?)?;
        if scan.statistic(&p)? <= observed {
            extreme += 1;
        }
    }
    Ok(TestReport::new(rational::int(observed as i64), replicates, seed, Tail::Lower, extreme))
}

/// Extension size statistic alone, without bootstrap.
pub fn max_extension(p: &FiniteDistribution, r_max: usize, cap: u64) -> Result<usize> {
    ExtensionScan::new(p.space(), r_max, cap)?.statistic(p)
}

/// Log-likelihood `Σ_x c_x log q_x` of counts under `q`, or `None` when an
/// observed state has zero mass.
pub fn log_likelihood(samples: &SampleSet, q: &FiniteDistribution) -> Option<f64> {
    let mut ll = 0.0;
    for (&i, &c) in samples.counts() {
        let p = rational::to_f64(&q.prob(i));
        if p <= 0.0 {
            return None;
        }
        ll += c as f64 * libm::log(p);
    }
    Some(ll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::dist::tv_l1;
    use crate::rational::ratio;
    use crate::space::Alphabet;

    fn s3() -> GroupAction {
        GroupAction::sequence(3, Alphabet::binary())
    }

    #[test]
    fn npmle_examples() {
        let a = s3();
        let one = SampleSet::new(a.space().clone(), [vec![1, 0, 0]]).unwrap();
        assert_eq!(invariant_npmle(&one, &a).unwrap(), a.extreme_measure_of(&[1, 0, 0]).unwrap());

        let closed = SampleSet::new(a.space().clone(), [vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(invariant_npmle(&closed, &a).unwrap(), closed.empirical().unwrap());

        let two = SampleSet::new(a.space().clone(), [vec![0, 0, 1], vec![1, 1, 0]]).unwrap();
        let est = invariant_npmle(&two, &a).unwrap();
        assert_eq!(est.support_len(), 6);
        assert!(est.mass().values().all(|m| *m == ratio(1, 6)));

        let empty = SampleSet::new(a.space().clone(), []).unwrap();
        assert_eq!(invariant_npmle(&empty, &a), Err(Error::EmptySamples));
    }

    #[test]
    fn counts_statistic_matches_tv() {
        let a = GroupAction::joint_row_col(2, Alphabet::binary());
        let obs = [vec![0, 1, 0, 0], vec![0, 1, 0, 0], vec![1, 1, 0, 1], vec![0, 0, 0, 0], vec![1, 0, 1, 1]];
        let samples = SampleSet::new(a.space().clone(), obs).unwrap();
        let direct = tv_l1(&samples.empirical().unwrap(), &invariant_npmle(&samples, &a).unwrap()).unwrap();
        let mut stat = InvarianceStatistic::new(&a);
        assert_eq!(stat.eval(samples.counts()).unwrap(), direct);
    }

    #[test]
    fn invariant_samples_never_reject() {
        let a = s3();
        let samples = SampleSet::new(a.space().clone(), [vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 1]]).unwrap();
        let r = exch_test(&samples, &a, 99, 5).unwrap();
        assert_eq!(r.statistic, Rational::zero());
        assert_eq!(r.p_value, rational::one());
        assert!(r.decisions.iter().all(|(_, rej)| !rej));
    }

    #[test]
    fn repeated_point_rejects() {
        let a = s3();
        let samples = SampleSet::weighted(a.space().clone(), [(vec![1, 0, 0], 100)]).unwrap();
        let r = exch_test(&samples, &a, 999, 7).unwrap();
        assert_eq!(r.statistic, ratio(4, 3));
        assert!(r.p_value_f64() <= 0.01);
        assert!(r.rejects_at(0.01));
    }

    #[test]
    fn extension_statistics() {
        let pair = StateSpace::sequence(2, Alphabet::binary());
        let anti = SampleSet::new(pair.clone(), [vec![0, 1], vec![1, 0]]).unwrap();
        let r = extendibility_test(&anti, 6, 19, 3, crate::space::DEFAULT_MAX_STATES).unwrap();
        assert_eq!(r.statistic, rational::int(2));
        assert_eq!(r.tail, Tail::Lower);

        let iid = SampleSet::new(pair.clone(), [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        let r = extendibility_test(&iid, 6, 19, 3, crate::space::DEFAULT_MAX_STATES).unwrap();
        assert_eq!(r.statistic, rational::int(6));
        assert_eq!(r.p_value, rational::one());

        assert!(extendibility_test(&iid, 1, 19, 3, crate::space::DEFAULT_MAX_STATES).is_err());
        let arr = GroupAction::joint_row_col(2, Alphabet::binary());
        let s = SampleSet::new(arr.space().clone(), [vec![0, 0, 0, 0]]).unwrap();
        assert!(matches!(
            extendibility_test(&s, 3, 9, 1, crate::space::DEFAULT_MAX_STATES),
            Err(Error::UnsupportedSpace(_))
        ));
    }

    #[test]
    fn zero_weight_rejected() {
        let a = s3();
        assert!(SampleSet::weighted(a.space().clone(), [(vec![0, 0, 0], 0)]).is_err());
        assert!(exch_test(&SampleSet::new(a.space().clone(), [vec![0, 0, 0]]).unwrap(), &a, 0, 1).is_err());
    }
}
