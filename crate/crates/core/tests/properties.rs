use std::collections::BTreeMap;

use exch_core::exch::{self, empirical_mixture, extendibility_lp, is_exchangeable};
use exch_core::rational::{self, Rational};
use exch_core::stats::{invariant_npmle, log_likelihood, SampleSet};
use exch_core::urn::{beta_bound, power_distinct_mass, urn_tv, UrnSystem};
use exch_core::{
    array, tv_l1, tv_sup, Alphabet, FiniteDistribution, GroupAction, Permutation, StateSpace, DEFAULT_MAX_STATES,
};
use nalgebra::DMatrix;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: u64 = DEFAULT_MAX_STATES;

fn from_weights(space: StateSpace, weights: &[u32]) -> FiniteDistribution {
    let total: u64 = weights.iter().map(|&w| w as u64).sum();
    let mass: BTreeMap<u64, Rational> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0)
        .map(|(i, &w)| (i as u64, rational::ratio(w as i64, total as i64)))
        .collect();
    FiniteDistribution::new(space, mass).unwrap()
}

/// Space of sequences plus enough positive-sum weights to cover it.
fn sequence_dist(max_len: usize, max_symbols: usize) -> impl Strategy<Value = FiniteDistribution> {
    (1..=max_len, 2..=max_symbols).prop_flat_map(|(n, s)| {
        let size = s.pow(n as u32);
        prop::collection::vec(0u32..20, size)
            .prop_filter("positive total", |w| w.iter().any(|&x| x > 0))
            .prop_map(move |w| from_weights(StateSpace::sequence(n, Alphabet::range(s)), &w))
    })
}

fn dist_pair(n: usize, s: usize) -> impl Strategy<Value = (FiniteDistribution, FiniteDistribution, FiniteDistribution)> {
    let size = s.pow(n as u32);
    let w = prop::collection::vec(0u32..20, size).prop_filter("positive total", |w| w.iter().any(|&x| x > 0));
    (w.clone(), w.clone(), w).prop_map(move |(a, b, c)| {
        let space = StateSpace::sequence(n, Alphabet::range(s));
        (from_weights(space.clone(), &a), from_weights(space.clone(), &b), from_weights(space, &c))
    })
}

fn actions() -> impl Strategy<Value = GroupAction> {
    prop_oneof![
        (1usize..=4, 2usize..=3).prop_map(|(m, s)| GroupAction::sequence(m, Alphabet::range(s))),
        (1usize..=3).prop_map(|m| GroupAction::joint_row_col(m, Alphabet::binary())),
        (1usize..=2, 1usize..=3).prop_map(|(m, n)| GroupAction::separate_row_col(m, n, Alphabet::binary())),
        prop::collection::vec(1usize..=2, 1..=2).prop_map(|ls| {
            GroupAction::blocked(ls.iter().map(|&l| exch_core::Block { length: l, alphabet: Alphabet::binary() }).collect())
        }),
    ]
}

fn falling_fraction(n: usize, k: usize) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| acc * rational::ratio((n - i) as i64, n as i64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_is_a_metric((p, q, r) in dist_pair(2, 3)) {
        let pq = tv_l1(&p, &q).unwrap();
        prop_assert_eq!(&pq, &tv_l1(&q, &p).unwrap());
        prop_assert!(tv_l1(&p, &p).unwrap().is_zero());
        prop_assert!(pq <= tv_l1(&p, &r).unwrap() + tv_l1(&r, &q).unwrap());
        prop_assert!(pq <= rational::int(2));
        prop_assert_eq!(pq == Rational::zero(), p == q);
    }

    #[test]
    fn l1_is_twice_sup((p, q, _) in dist_pair(2, 2)) {
        prop_assert_eq!(tv_l1(&p, &q).unwrap(), rational::int(2) * tv_sup(&p, &q).unwrap());
        // sup over events, by brute force over subsets
        let size = p.space().size().unwrap() as u64;
        let best = (0u32..1 << size)
            .map(|set| {
                (0..size).filter(|i| set >> i & 1 == 1).fold(Rational::zero(), |acc, i| acc + p.prob(i) - q.prob(i))
            })
            .max()
            .unwrap();
        prop_assert_eq!(best, tv_sup(&p, &q).unwrap());
    }

    #[test]
    fn canonical_form_is_constant_on_orbits(action in actions(), seed in any::<u64>()) {
        let size = action.space().size().unwrap() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = action.space().state_at(rand::Rng::random_range(&mut rng, 0..size)).unwrap();
        let c = action.canonical(&x).unwrap();
        for g in action.generators() {
            let y = action.act(g, &x).unwrap();
            prop_assert_eq!(&action.canonical(&y).unwrap(), &c);
        }
        prop_assert!(action.space().index_of(&c).unwrap() <= action.space().index_of(&x).unwrap());
    }

    #[test]
    fn orbit_sizes_divide_group_order(action in actions()) {
        let table = action.orbits(CAP).unwrap();
        let order = action.order().unwrap();
        let total: usize = table.sizes().sum();
        prop_assert_eq!(total as u128, action.space().size().unwrap());
        for s in table.sizes() {
            prop_assert_eq!(order % s as u128, 0);
        }
        prop_assert_eq!(table.len() as u128, action.burnside_orbit_count(u128::MAX).unwrap());
    }

    #[test]
    fn reynolds_is_an_invariant_projection(action in actions(), seed in any::<u64>()) {
        let size = action.space().size().unwrap() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<u32> = (0..size).map(|_| rand::Rng::random_range(&mut rng, 1..50)).collect();
        let p = from_weights(action.space().clone(), &w);
        let q = action.reynolds(&p).unwrap();
        prop_assert!(action.is_invariant(&q).unwrap());
        prop_assert_eq!(&action.reynolds(&q).unwrap(), &q);
        let parts = action.decompose_invariant(&q).unwrap();
        prop_assert_eq!(&action.recompose(&parts).unwrap(), &q);
        prop_assert!(action.decompose_invariant(&p).is_err() || action.is_invariant(&p).unwrap());
    }

    #[test]
    fn beta_is_monotone(ks in prop::collection::vec(1usize..6, 1..4), extra in prop::collection::vec(0usize..6, 3)) {
        let ns: Vec<usize> = ks.iter().zip(&extra).map(|(k, e)| k + e).collect();
        let b = beta_bound(&ks, &ns).unwrap();
        prop_assert!(b >= Rational::zero() && b < Rational::one());
        // more draws from the same urns never lowers the bound
        let mut bigger_k = ks.clone();
        if bigger_k[0] < ns[0] {
            bigger_k[0] += 1;
            prop_assert!(beta_bound(&bigger_k, &ns).unwrap() >= b);
        }
        // bigger urns never raise it
        let bigger_n: Vec<usize> = ns.iter().map(|n| n + 1).collect();
        prop_assert!(beta_bound(&ks, &bigger_n).unwrap() <= b);
    }

    #[test]
    fn distinct_mass_matches_enumeration(w in prop::collection::vec(1u32..10, 1..5), k in 0usize..4) {
        let n = w.len();
        let total: u32 = w.iter().sum();
        let p: Vec<Rational> = w.iter().map(|&x| rational::ratio(x as i64, total as i64)).collect();
        let mut brute = Rational::zero();
        let base = n.pow(k as u32);
        for idx in 0..base {
            let mut digits = Vec::with_capacity(k);
            let mut r = idx;
            for _ in 0..k {
                digits.push(r % n);
                r /= n;
            }
            let mut sorted = digits.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() == k {
                brute += digits.iter().fold(Rational::one(), |acc, &d| acc * &p[d]);
            }
        }
        let fast = power_distinct_mass(&p, k);
        prop_assert_eq!(&fast, &brute);
        // Schur concavity: the uniform vector maximizes the distinct mass
        if k <= n {
            prop_assert!(fast <= falling_fraction(n, k));
        }
    }

    #[test]
    fn urn_tv_is_one_minus_distinct_fraction(ns in prop::collection::vec(1usize..5, 1..3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ks: Vec<usize> = ns.iter().map(|&n| rand::Rng::random_range(&mut rng, 0..=n)).collect();
        let urns = UrnSystem::new(ns.clone(), ks.clone()).unwrap();
        let oracle = Rational::one() - ks.iter().zip(&ns).fold(Rational::one(), |a, (&k, &n)| a * falling_fraction(n, k));
        prop_assert_eq!(urn_tv(&urns, CAP).unwrap(), oracle.clone());
        prop_assert_eq!(beta_bound(&ks, &ns).unwrap(), oracle);
    }

    #[test]
    fn empirical_mixture_is_exchangeable(p in sequence_dist(4, 3), k in 1usize..4) {
        let action = GroupAction::coordinate_permutations(p.space()).unwrap();
        let p = action.reynolds(&p).unwrap();
        let n = p.space().cell_count();
        let k = k.min(n);
        let (mu, projected) = empirical_mixture(&p, k, CAP).unwrap();
        prop_assert!(is_exchangeable(&projected).unwrap());
        let total = mu.atoms.iter().fold(Rational::zero(), |a, atom| a + &atom.weight);
        prop_assert!(total.is_one());
        let report = exch::check_definetti_bound(&p, &[k], CAP).unwrap();
        prop_assert!(report.holds);
    }

    #[test]
    fn marginals_of_exchangeable_laws_extend(p in sequence_dist(4, 2), k in 1usize..4) {
        let action = GroupAction::coordinate_permutations(p.space()).unwrap();
        let p = action.reynolds(&p).unwrap();
        let n = p.space().cell_count();
        let k = k.min(n);
        let p_k = exch::marginal(&p, k).unwrap().distribution;
        let ext = extendibility_lp(&p_k, &[n], CAP).unwrap();
        prop_assert!(ext.feasible);
        let w = ext.witness.unwrap();
        prop_assert!(is_exchangeable(&w).unwrap());
        prop_assert_eq!(exch::marginal(&w, k).unwrap().distribution, p_k);
    }

    #[test]
    fn gap_shrinks_on_refined_grids(p in sequence_dist(2, 2)) {
        let action = GroupAction::coordinate_permutations(p.space()).unwrap();
        let p = action.reynolds(&p).unwrap();
        // grid of 3 points nests inside grids of 5 and 9
        let coarse = exch::definetti_gap(&p, 3, CAP).unwrap().gap;
        let fine = exch::definetti_gap(&p, 5, CAP).unwrap().gap;
        let finer = exch::definetti_gap(&p, 9, CAP).unwrap();
        prop_assert!(fine <= coarse);
        prop_assert!(finer.gap <= fine);
        prop_assert_eq!(tv_l1(&p, &finer.mixing.project(p.space(), CAP).unwrap()).unwrap(), finer.gap);
    }

    #[test]
    fn npmle_beats_other_invariant_laws(action in actions(), seed in any::<u64>()) {
        let space = action.space().clone();
        let size = space.size().unwrap() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs: Vec<_> = (0..12).map(|_| space.state_at(rand::Rng::random_range(&mut rng, 0..size)).unwrap()).collect();
        let samples = SampleSet::new(space.clone(), obs).unwrap();
        let best = invariant_npmle(&samples, &action).unwrap();
        prop_assert!(action.is_invariant(&best).unwrap());
        let best_ll = log_likelihood(&samples, &best).unwrap();
        for _ in 0..5 {
            let w: Vec<u32> = (0..size).map(|_| rand::Rng::random_range(&mut rng, 1..30)).collect();
            let alt = action.reynolds(&from_weights(space.clone(), &w)).unwrap();
            let ll = log_likelihood(&samples, &alt).unwrap();
            prop_assert!(ll <= best_ll + 1e-9);
        }
    }

    #[test]
    fn permutation_inverse_composes_to_identity(image in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
        let p = Permutation::new(image).unwrap();
        prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
        prop_assert!(p.inverse().compose(&p).unwrap().is_identity());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn svd_reconstructs(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(rows, cols, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        match array::svd_randomized(&x, seed) {
            Ok((t, signs)) => {
                prop_assert_eq!(signs.len(), rows.min(cols));
                prop_assert!(t.reconstruction_error(&x) <= 1e-9);
                prop_assert!(t.orthonormality_error() <= 1e-9);
                prop_assert!(t.singular_values.windows(2).all(|w| w[0] >= w[1]));
            }
            Err(e) => prop_assert_eq!(e, exch_core::Error::DegenerateSingularValues),
        }
    }
}

#[test]
fn svd_signs_are_uniform() {
    let x = DMatrix::from_row_slice(3, 3, &[3.0, 1.0, 0.5, 1.0, 2.0, 0.25, 0.5, 0.25, 1.0]);
    let seeds = 10_000u64;
    let mut positive = [0u64; 3];
    for seed in 0..seeds {
        let (t, signs) = array::svd_randomized(&x, seed).unwrap();
        assert!(t.reconstruction_error(&x) <= 1e-9);
        let fixed = array::signed_svd(&x).unwrap();
        for c in 0..3 {
            let (r, _) = fixed.u.column(c).iamax_full();
            assert_eq!(t.u[(r, c)].signum(), signs[c]);
            if t.u[(r, c)] > 0.0 {
                positive[c] += 1;
            }
        }
    }
    let se = (seeds as f64 * 0.25).sqrt();
    for c in positive {
        assert!((c as f64 - seeds as f64 / 2.0).abs() <= 4.0 * se, "{c} positive signs of {seeds}");
    }
}
