#![allow(dead_code)]

use num_traits::Zero;
use proptest::prelude::*;
use robust_ftap::measures::{AmbiguitySet, SampleSpace};
use robust_ftap::{rat, Rational};

/// Nonnegative integer weights normalized to a probability vector; all-zero
/// draws become a point mass on the first outcome.
pub fn normalize(weights: &[i64]) -> Vec<Rational> {
    let total: i64 = weights.iter().sum();
    if total == 0 {
        let mut v = vec![Rational::zero(); weights.len()];
        v[0] = rat(1, 1);
        return v;
    }
    weights.iter().map(|&w| rat(w, total)).collect()
}

/// Probability vector on `n` outcomes whose draws are zero with some chance.
pub fn prob_vector(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(prop_oneof![1 => Just(0i64), 3 => 1i64..=10], n)
        .prop_map(|w| normalize(&w))
}

/// Rational in `[-2, 2]` with denominator at most 10.
pub fn small_rational() -> impl Strategy<Value = Rational> {
    (1i64..=10).prop_flat_map(|d| (-2 * d..=2 * d).prop_map(move |n| rat(n, d)))
}

pub fn ambiguity(n: usize, max_vertices: usize) -> impl Strategy<Value = AmbiguitySet> {
    proptest::collection::vec(prob_vector(n), 1..=max_vertices).prop_map(move |vs| {
        AmbiguitySet::from_masses(&SampleSpace::numbered(n).unwrap(), vs).unwrap()
    })
}

/// Restricts `v` to `allowed` outcomes and renormalizes, falling back to `fallback`.
pub fn restrict_to(v: &[Rational], allowed: &[bool], fallback: &[Rational]) -> Vec<Rational> {
    let kept: Vec<Rational> = v
        .iter()
        .zip(allowed)
        .map(|(x, &a)| if a { x.clone() } else { Rational::zero() })
        .collect();
    let total = kept.iter().fold(Rational::zero(), |a, b| a + b);
    if total.is_zero() {
        return fallback.to_vec();
    }
    kept.into_iter().map(|x| x / &total).collect()
}

/// Every subset of `0..n` as a sorted index list.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .map(|mask| (0..n).filter(|b| mask >> b & 1 == 1).collect())
        .collect()
}

pub fn mass_of(v: &[Rational], set: &[usize]) -> Rational {
    set.iter().fold(Rational::zero(), |a, &i| a + &v[i])
}
