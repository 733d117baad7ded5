//! Exact Gaussian elimination.

use crate::rational::Rational;
use num_traits::Zero;

/// Solves `a x = b` for `x` with `n` unknowns when the columns of `a` are
/// linearly independent and the system is consistent. Returns `None`
/// otherwise.
pub fn solve_square_or_overdetermined(
    a: &[Vec<Rational>],
    b: &[Rational],
    n: usize,
) -> Option<Vec<Rational>> {
    if a.len() != b.len() || a.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let rows = m.len();
    let mut pivot_row = 0;
    for col in 0..n {
        let p = (pivot_row..rows).find(|&i| !m[i][col].is_zero())?;
        m.swap(pivot_row, p);
        let piv = m[pivot_row][col].clone();
        for v in m[pivot_row].iter_mut() {
            *v /= &piv;
        }
        let prow = m[pivot_row].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == pivot_row || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivot_row += 1;
    }
    if m[n..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    Some(m[..n].iter().map(|r| r[n].clone()).collect())
}
