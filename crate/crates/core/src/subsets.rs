//! Exhaustive subset enumeration with incrementally maintained set masses.

use crate::rational::Rational;
use num_traits::Zero;

/// Calls `visit(mask, masses)` for every subset of `0..width`, where
/// `masses[r]` is the total mass `rows[r]` assigns to the subset.
///
/// Subsets are visited in Gray-code order, so each step adds or removes one
/// coordinate from every running sum. `width` must be below 64.
pub fn for_each_subset<F>(rows: &[Vec<Rational>], width: usize, mut visit: F)
where
    F: FnMut(u64, &[Rational]),
{
    debug_assert!(width < 64);
    debug_assert!(rows.iter().all(|r| r.len() == width));
    let mut sums = vec![Rational::zero(); rows.len()];
    let mut mask = 0u64;
    visit(mask, &sums);
    for step in 1u64..(1u64 << width) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        let adding = mask >> bit & 1 == 1;
        for (s, row) in sums.iter_mut().zip(rows) {
            if adding {
                *s += &row[bit];
            } else {
                *s -= &row[bit];
            }
        }
        visit(mask, &sums);
    }
}

/// Deterministic tie-break among subsets: fewer members first, then the
/// numerically smaller mask.
pub fn subset_order_key(mask: u64) -> (u32, u64) {
    (mask.count_ones(), mask)
}
