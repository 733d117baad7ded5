//! Dense two-phase tableau simplex with Bland's anti-cycling rule.

use super::{LinearProgram, LpSolution, LpStatus, Relation, Sense};
use crate::rational::Rational;
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

/// How an original variable is expressed through nonnegative columns.
enum VarMap {
    /// `x = shift + col`
    Lower { col: usize, shift: Rational },
    /// `x = shift - col`
    Upper { col: usize, shift: Rational },
    /// `x = pos - neg`
    Free { pos: usize, neg: usize },
}

enum RowOrigin {
    Original(usize),
    UpperBound,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.kinds.len()
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut r = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (rj, t) in r.iter_mut().zip(row) {
                if !t.is_zero() {
                    *rj -= cb * t;
                }
            }
        }
        r
    }

    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rhs)
            .fold(Rational::zero(), |acc, (&b, v)| acc + &cost[b] * v)
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.rows[p][q].clone();
        if !piv.is_one() {
            for t in self.rows[p].iter_mut() {
                if !t.is_zero() {
                    *t /= &piv;
                }
            }
            self.rhs[p] /= &piv;
        }
        let pivot_row = self.rows[p].clone();
        let pivot_rhs = self.rhs[p].clone();
        for i in 0..self.rows.len() {
            if i == p || self.rows[i][q].is_zero() {
                continue;
            }
            let factor = self.rows[i][q].clone();
            for (t, pr) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pr.is_zero() {
                    *t -= &factor * pr;
                }
            }
            if !pivot_rhs.is_zero() {
                self.rhs[i] -= &factor * &pivot_rhs;
            }
        }
        self.basis[p] = q;
    }

    /// Minimizes `cost` over columns accepted by `allowed`. Returns the
    /// entering column of an unbounded direction, if one is found.
    fn optimize(&mut self, cost: &[Rational], allowed: impl Fn(usize) -> bool) -> Option<usize> {
        loop {
            let r = self.reduced_costs(cost);
            let enter = (0..self.ncols()).find(|&j| allowed(j) && r[j].is_negative())?;
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((best, best_ratio)) => {
                        ratio < *best_ratio
                            || (ratio == *best_ratio && self.basis[i] < self.basis[*best])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((i, _)) => self.pivot(i, enter),
                None => return Some(enter),
            }
        }
    }

    fn basic_values(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.ncols()];
        for (&b, v) in self.basis.iter().zip(&self.rhs) {
            x[b] = v.clone();
        }
        x
    }
}

struct StandardForm {
    maps: Vec<VarMap>,
    origins: Vec<RowOrigin>,
    flipped: Vec<bool>,
    /// Column that started in the basis for each row (slack or artificial).
    initial: Vec<usize>,
    tableau: Tableau,
    /// Minimization cost over all tableau columns.
    cost: Vec<Rational>,
}

fn standard_form(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let sign = if lp.sense == Sense::Maximize {
        -Rational::one()
    } else {
        Rational::one()
    };
    let mut maps = Vec::with_capacity(n);
    let mut struct_cost = Vec::new();
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for j in 0..n {
        let c = &sign * &lp.objective[j];
        let b = &lp.bounds[j];
        match (&b.lower, &b.upper) {
            (Some(l), upper) => {
                let col = struct_cost.len();
                struct_cost.push(c);
                if let Some(u) = upper {
                    bound_rows.push((col, u - l));
                }
                maps.push(VarMap::Lower {
                    col,
                    shift: l.clone(),
                });
            }
            (None, Some(u)) => {
                let col = struct_cost.len();
                struct_cost.push(-c);
                maps.push(VarMap::Upper {
                    col,
                    shift: u.clone(),
                });
            }
            (None, None) => {
                let pos = struct_cost.len();
                struct_cost.push(c.clone());
                struct_cost.push(-c);
                maps.push(VarMap::Free { pos, neg: pos + 1 });
            }
        }
    }
    let nstruct = struct_cost.len();

    let mut rows: Vec<(Vec<Rational>, Relation, Rational, RowOrigin)> = Vec::new();
    for (k, con) in lp.constraints.iter().enumerate() {
        let mut row = vec![Rational::zero(); nstruct];
        let mut rhs = con.rhs.clone();
        for (a, map) in con.coeffs.iter().zip(&maps) {
            if a.is_zero() {
                continue;
            }
            match map {
                VarMap::Lower { col, shift } => {
                    row[*col] += a;
                    rhs -= a * shift;
                }
                VarMap::Upper { col, shift } => {
                    row[*col] -= a;
                    rhs -= a * shift;
                }
                VarMap::Free { pos, neg } => {
                    row[*pos] += a;
                    row[*neg] -= a;
                }
            }
        }
        rows.push((row, con.relation, rhs, RowOrigin::Original(k)));
    }
    for (col, width) in bound_rows {
        let mut row = vec![Rational::zero(); nstruct];
        row[col] = Rational::one();
        rows.push((row, Relation::Le, width, RowOrigin::UpperBound));
    }

    let mut flipped = Vec::with_capacity(rows.len());
    for (row, rel, rhs, _) in rows.iter_mut() {
        let flip = rhs.is_negative();
        if flip {
            row.iter_mut().for_each(|a| *a = -a.clone());
            *rhs = -rhs.clone();
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        flipped.push(flip);
    }

    let mut kinds = vec![ColKind::Structural; nstruct];
    let mut extra: Vec<(usize, Rational)> = Vec::new();
    let mut initial = Vec::with_capacity(rows.len());
    for (i, (_, rel, _, _)) in rows.iter().enumerate() {
        match rel {
            Relation::Le => {
                initial.push(kinds.len());
                extra.push((i, Rational::one()));
                kinds.push(ColKind::Slack);
            }
            Relation::Ge => {
                extra.push((i, -Rational::one()));
                kinds.push(ColKind::Slack);
                initial.push(kinds.len());
                extra.push((i, Rational::one()));
                kinds.push(ColKind::Artificial);
            }
            Relation::Eq => {
                initial.push(kinds.len());
                extra.push((i, Rational::one()));
                kinds.push(ColKind::Artificial);
            }
        }
    }
    let ncols = kinds.len();
    let mut table = Vec::with_capacity(rows.len());
    let mut rhs_col = Vec::with_capacity(rows.len());
    let mut origins = Vec::with_capacity(rows.len());
    for (row, _, rhs, origin) in rows {
        let mut full = row;
        full.resize(ncols, Rational::zero());
        table.push(full);
        rhs_col.push(rhs);
        origins.push(origin);
    }
    for (offset, (i, coeff)) in extra.into_iter().enumerate() {
        table[i][nstruct + offset] = coeff;
    }
    let mut cost = struct_cost;
    cost.resize(ncols, Rational::zero());
    StandardForm {
        maps,
        origins,
        flipped,
        tableau: Tableau {
            rows: table,
            rhs: rhs_col,
            basis: initial.clone(),
            kinds,
        },
        initial,
        cost,
    }
}

impl StandardForm {
    /// Row multipliers in minimization convention for the original rows.
    fn original_multipliers(&self, transformed: &[Rational], m: usize) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); m];
        for ((yi, origin), &flip) in transformed.iter().zip(&self.origins).zip(&self.flipped) {
            if let RowOrigin::Original(k) = origin {
                y[*k] = if flip { -yi.clone() } else { yi.clone() };
            }
        }
        y
    }

    fn multipliers(&self, cost: &[Rational]) -> Vec<Rational> {
        let r = self.tableau.reduced_costs(cost);
        self.initial.iter().map(|&c| &cost[c] - &r[c]).collect()
    }

    fn map_point(&self, x: &[Rational], with_shift: bool) -> Vec<Rational> {
        self.maps
            .iter()
            .map(|m| match m {
                VarMap::Lower { col, shift } => {
                    if with_shift {
                        shift + &x[*col]
                    } else {
                        x[*col].clone()
                    }
                }
                VarMap::Upper { col, shift } => {
                    if with_shift {
                        shift - &x[*col]
                    } else {
                        -x[*col].clone()
                    }
                }
                VarMap::Free { pos, neg } => &x[*pos] - &x[*neg],
            })
            .collect()
    }
}

pub(super) fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let m = lp.constraints.len();
    let mut sf = standard_form(lp);
    let ncols = sf.tableau.ncols();
    let is_art = |j: usize, kinds: &[ColKind]| kinds[j] == ColKind::Artificial;

    let phase1_cost: Vec<Rational> = sf
        .tableau
        .kinds
        .iter()
        .map(|k| {
            if *k == ColKind::Artificial {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect();
    if sf.tableau.kinds.contains(&ColKind::Artificial) {
        if sf.tableau.optimize(&phase1_cost, |_| true).is_some() {
            return Err(Error::Internal(
                "phase one objective is bounded below by zero".into(),
            ));
        }
        if sf.tableau.objective(&phase1_cost).is_positive() {
            let y = sf.original_multipliers(&sf.multipliers(&phase1_cost), m);
            if !lp.is_farkas_certificate(&y) {
                return Err(Error::Internal(
                    "Farkas certificate failed its own check".into(),
                ));
            }
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                primal: Vec::new(),
                dual: y,
                value: Rational::zero(),
            });
        }
        // Drive zero-valued artificials out of the basis where possible; a row
        // where that fails is redundant and keeps its artificial at zero.
        for i in 0..sf.tableau.rows.len() {
            if !is_art(sf.tableau.basis[i], &sf.tableau.kinds) {
                continue;
            }
            let col = (0..ncols)
                .find(|&j| !is_art(j, &sf.tableau.kinds) && !sf.tableau.rows[i][j].is_zero());
            if let Some(j) = col {
                sf.tableau.pivot(i, j);
            }
        }
    }

    let kinds = sf.tableau.kinds.clone();
    let cost = sf.cost.clone();
    if let Some(enter) = sf
        .tableau
        .optimize(&cost, |j| kinds[j] != ColKind::Artificial)
    {
        let mut dir = vec![Rational::zero(); ncols];
        dir[enter] = Rational::one();
        for (row, &b) in sf.tableau.rows.iter().zip(&sf.tableau.basis) {
            dir[b] = -row[enter].clone();
        }
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal: sf.map_point(&dir, false),
            dual: Vec::new(),
            value: Rational::zero(),
        });
    }

    let x = sf.map_point(&sf.tableau.basic_values(), true);
    let mut y = sf.original_multipliers(&sf.multipliers(&cost), m);
    if lp.sense == Sense::Maximize {
        y.iter_mut().for_each(|v| *v = -v.clone());
    }
    let value = lp.objective_value(&x);
    match lp.dual_objective(&y) {
        Some(dual_value) if dual_value == value => {}
        other => {
            return Err(Error::Internal(format!(
                "strong duality failed: primal {value}, dual {other:?}"
            )))
        }
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal: x,
        dual: y,
        value,
    })
}
