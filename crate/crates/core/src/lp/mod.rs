//! Exact linear programming.
//!
//! [`LinearProgram::solve`] runs a two-phase primal simplex with Bland's
//! rule over [`Rational`]s. Every outcome carries a certificate that can be
//! checked by substitution:
//!
//! - `Optimal`: a primal point and row multipliers `y` whose dual objective
//!   equals the primal objective exactly.
//! - `Infeasible`: row multipliers forming a Farkas certificate.
//! - `Unbounded`: an improving recession direction.
//!
//! # Dual conventions
//!
//! Reduced costs are `d = c - A^T y`. For a maximization, `y_i >= 0` on `<=`
//! rows and `y_i <= 0` on `>=` rows; a variable with `d_j > 0` needs a finite
//! upper bound and one with `d_j < 0` a finite lower bound. The dual
//! objective is `b^T y + sum_j d_j * bound_j` with the bound picked by the
//! sign of `d_j`. Minimization mirrors all of this. Farkas certificates use
//! the minimization convention with `c = 0` and have positive dual objective.

mod linalg;
mod minimax;
mod simplex;

pub use linalg::solve_square_or_overdetermined;
pub use minimax::{minimax_value, MinimaxInstance, MinimaxSolution, Polytope};

use crate::rational::{dot, Rational};
use crate::{Error, Result};
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Optional lower and upper bound of one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBounds {
    pub fn nonnegative() -> Self {
        Self {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Self {
            lower: None,
            upper: None,
        }
    }

    pub fn boxed(lower: Rational, upper: Rational) -> Self {
        Self {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    fn contains(&self, x: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| x >= l) && self.upper.as_ref().is_none_or(|u| x <= u)
    }
}

/// A linear program. Variables default to `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBounds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point, or an improving ray when `Unbounded`; empty when infeasible.
    pub primal: Vec<Rational>,
    /// Optimal row multipliers, or a Farkas certificate when `Infeasible`;
    /// empty when unbounded.
    pub dual: Vec<Rational>,
    /// Optimal objective value; zero unless `Optimal`.
    pub value: Rational,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        Self {
            objective,
            sense,
            constraints: Vec::new(),
            bounds: vec![VarBounds::nonnegative(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(
        &mut self,
        coeffs: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    ) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bounds(&mut self, var: usize, bounds: VarBounds) -> &mut Self {
        self.bounds[var] = bounds;
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, VarBounds::free())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} variable bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients for {n} variables",
                    c.coeffs.len()
                )));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                if l > u {
                    return Err(Error::InvalidInput(format!(
                        "variable {j} has lower bound {l} above upper bound {u}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.validate()?;
        simplex::solve(self)
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    pub fn is_primal_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && self.bounds.iter().zip(x).all(|(b, v)| b.contains(v))
            && self
                .constraints
                .iter()
                .all(|c| c.relation.holds(&dot(&c.coeffs, x), &c.rhs))
    }

    fn reduced_costs(&self, objective: &[Rational], y: &[Rational]) -> Vec<Rational> {
        (0..self.num_vars())
            .map(|j| {
                self.constraints
                    .iter()
                    .zip(y)
                    .fold(objective[j].clone(), |acc, (c, yi)| acc - yi * &c.coeffs[j])
            })
            .collect()
    }

    /// Sign conditions on `y` for the given sense.
    fn row_signs_ok(&self, sense: Sense, y: &[Rational]) -> bool {
        self.constraints.iter().zip(y).all(|(c, yi)| {
            let (nonneg_rel, nonpos_rel) = match sense {
                Sense::Maximize => (Relation::Le, Relation::Ge),
                Sense::Minimize => (Relation::Ge, Relation::Le),
            };
            if c.relation == nonneg_rel {
                !yi.is_negative()
            } else if c.relation == nonpos_rel {
                !yi.is_positive()
            } else {
                true
            }
        })
    }

    /// Dual objective of `y` against `objective`, or `None` when `y` is not
    /// dual feasible.
    fn dual_bound(&self, sense: Sense, objective: &[Rational], y: &[Rational]) -> Option<Rational> {
        if y.len() != self.constraints.len() || !self.row_signs_ok(sense, y) {
            return None;
        }
        let mut total = self
            .constraints
            .iter()
            .zip(y)
            .fold(Rational::zero(), |acc, (c, yi)| acc + yi * &c.rhs);
        for (d, b) in self.reduced_costs(objective, y).iter().zip(&self.bounds) {
            if d.is_zero() {
                continue;
            }
            // The bound that makes d_j * x_j extremal in the objective's favour.
            let use_upper = d.is_positive() == (sense == Sense::Maximize);
            let bound = if use_upper { &b.upper } else { &b.lower };
            total += d * bound.as_ref()?;
        }
        Some(total)
    }

    /// Dual objective value of `y`, if `y` is dual feasible.
    pub fn dual_objective(&self, y: &[Rational]) -> Option<Rational> {
        self.dual_bound(self.sense, &self.objective, y)
    }

    /// Whether `y` proves the constraint system has no solution.
    pub fn is_farkas_certificate(&self, y: &[Rational]) -> bool {
        let zero = vec![Rational::zero(); self.num_vars()];
        self.dual_bound(Sense::Minimize, &zero, y)
            .is_some_and(|v| v.is_positive())
    }

    /// Whether `ray` is a recession direction that strictly improves the objective.
    pub fn is_improving_ray(&self, ray: &[Rational]) -> bool {
        if ray.len() != self.num_vars() {
            return false;
        }
        let bounded_dir = self.bounds.iter().zip(ray).all(|(b, r)| {
            (!r.is_positive() || b.upper.is_none()) && (!r.is_negative() || b.lower.is_none())
        });
        let rows_ok = self
            .constraints
            .iter()
            .all(|c| c.relation.holds(&dot(&c.coeffs, ray), &Rational::zero()));
        let gain = dot(&self.objective, ray);
        let improving = match self.sense {
            Sense::Maximize => gain.is_positive(),
            Sense::Minimize => gain.is_negative(),
        };
        bounded_dir && rows_ok && improving
    }

    /// Checks a solution's certificate by substitution.
    pub fn verify_solution(&self, sol: &LpSolution) -> bool {
        match sol.status {
            LpStatus::Optimal => {
                self.is_primal_feasible(&sol.primal)
                    && self.objective_value(&sol.primal) == sol.value
                    && self.dual_objective(&sol.dual).as_ref() == Some(&sol.value)
            }
            LpStatus::Infeasible => self.is_farkas_certificate(&sol.dual),
            LpStatus::Unbounded => self.is_improving_ray(&sol.primal),
        }
    }
}

/// Convenience wrapper matching the free-function style of the other modules.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.solve()
}
