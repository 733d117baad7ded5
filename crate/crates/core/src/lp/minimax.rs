//! Bilinear minimax `inf_{y in Y} max_{x in X} y^T B x` over polytopes.
//!
//! Both orders are solved as separate LPs. The inf-sup side ranges over the
//! vertices of `X`; the sup-inf side replaces the inner minimization over `Y`
//! by its LP dual. The two values must agree exactly.

use super::{Constraint, LinearProgram, LpStatus, Relation, Sense, VarBounds};
use crate::rational::{dot, Rational};
use crate::{Error, Result};
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Polytope {
    /// Convex hull of the listed points.
    Vertices(Vec<Vec<Rational>>),
    /// `{ y : constraints hold, bounds hold }`; must be bounded.
    Halfspaces {
        dim: usize,
        constraints: Vec<Constraint>,
        bounds: Vec<VarBounds>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxInstance {
    /// Rows indexed by the `Y` coordinates, columns by the `X` coordinates.
    pub payoff: Vec<Vec<Rational>>,
    pub x_vertices: Vec<Vec<Rational>>,
    pub y: Polytope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxSolution {
    pub value: Rational,
    /// Maximizer of `inf_y f(x, y)`.
    pub x_star: Vec<Rational>,
    /// Minimizer of `max_x f(x, y)`.
    pub y_star: Vec<Rational>,
    /// Convex weights on `x_vertices` producing `x_star`.
    pub x_weights: Vec<Rational>,
}

/// `Y` in halfspace form, with the map back to the caller's coordinates when
/// `Y` was given by vertices.
struct HalfspaceForm {
    payoff: Vec<Vec<Rational>>,
    dim: usize,
    constraints: Vec<Constraint>,
    bounds: Vec<VarBounds>,
    /// Columns are the original `Y` vertices, if any.
    embedding: Option<Vec<Vec<Rational>>>,
}

fn halfspace_form(inst: &MinimaxInstance, xdim: usize) -> Result<HalfspaceForm> {
    match &inst.y {
        Polytope::Halfspaces {
            dim,
            constraints,
            bounds,
        } => {
            if inst.payoff.len() != *dim
                || bounds.len() != *dim
                || constraints.iter().any(|c| c.coeffs.len() != *dim)
            {
                return Err(Error::DimensionMismatch(
                    "payoff rows must match the Y dimension".into(),
                ));
            }
            Ok(HalfspaceForm {
                payoff: inst.payoff.clone(),
                dim: *dim,
                constraints: constraints.clone(),
                bounds: bounds.clone(),
                embedding: None,
            })
        }
        Polytope::Vertices(ws) => {
            if ws.is_empty() {
                return Err(Error::EmptyPolytope("Y has no vertices".into()));
            }
            let ydim = inst.payoff.len();
            if ws.iter().any(|w| w.len() != ydim) {
                return Err(Error::DimensionMismatch(
                    "Y vertices must match payoff rows".into(),
                ));
            }
            // y = W mu, so y^T B x = mu^T (W^T B) x.
            let payoff = ws
                .iter()
                .map(|w| {
                    (0..xdim)
                        .map(|c| {
                            w.iter()
                                .zip(&inst.payoff)
                                .fold(Rational::zero(), |acc, (wi, row)| acc + wi * &row[c])
                        })
                        .collect()
                })
                .collect();
            let r = ws.len();
            Ok(HalfspaceForm {
                payoff,
                dim: r,
                constraints: vec![Constraint {
                    coeffs: vec![Rational::one(); r],
                    relation: Relation::Eq,
                    rhs: Rational::one(),
                }],
                bounds: vec![VarBounds::nonnegative(); r],
                embedding: Some(ws.clone()),
            })
        }
    }
}

/// Computes the saddle value of `f(x, y) = y^T B x`.
pub fn minimax_value(inst: &MinimaxInstance) -> Result<MinimaxSolution> {
    let k = inst.x_vertices.len();
    if k == 0 {
        return Err(Error::EmptyPolytope("X has no vertices".into()));
    }
    let xdim = inst.x_vertices[0].len();
    if inst.x_vertices.iter().any(|v| v.len() != xdim)
        || inst.payoff.iter().any(|r| r.len() != xdim)
    {
        return Err(Error::DimensionMismatch(
            "X vertices must match payoff columns".into(),
        ));
    }
    let hf = halfspace_form(inst, xdim)?;
    let m = hf.dim;
    // Column k of B V: the payoff gradient in y at vertex k.
    let bv: Vec<Vec<Rational>> = inst
        .x_vertices
        .iter()
        .map(|v| hf.payoff.iter().map(|row| dot(row, v)).collect())
        .collect();

    // inf-sup: min t s.t. t >= y^T B v_k, y in Y. Variables (y, t).
    let mut obj = vec![Rational::zero(); m + 1];
    obj[m] = Rational::one();
    let mut lp = LinearProgram::new(Sense::Minimize, obj);
    for (j, b) in hf.bounds.iter().enumerate() {
        lp.set_bounds(j, b.clone());
    }
    lp.set_free(m);
    for c in &hf.constraints {
        let mut row = c.coeffs.clone();
        row.push(Rational::zero());
        lp.add_constraint(row, c.relation, c.rhs.clone());
    }
    for col in &bv {
        let mut row: Vec<Rational> = col.iter().map(|v| -v).collect();
        row.push(Rational::one());
        lp.add_constraint(row, Relation::Ge, Rational::zero());
    }
    let inf_sup = lp.solve()?;
    match inf_sup.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::EmptyPolytope("Y is empty".into())),
        LpStatus::Unbounded => return Err(Error::InvalidInput("Y must be bounded".into())),
    }
    let y_inner = inf_sup.primal[..m].to_vec();

    // sup-inf: max_lambda min_{y in Y} y^T (B V lambda). With Y written as
    // rows g_i y (rel) b_i (bounds included as rows, y free), the inner
    // dual is max b^T pi s.t. G^T pi = B V lambda with signed pi.
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = hf
        .constraints
        .iter()
        .map(|c| (c.coeffs.clone(), c.relation, c.rhs.clone()))
        .collect();
    for (j, b) in hf.bounds.iter().enumerate() {
        let unit = |sign: Rational| {
            let mut r = vec![Rational::zero(); m];
            r[j] = sign;
            r
        };
        if let Some(l) = &b.lower {
            rows.push((unit(Rational::one()), Relation::Ge, l.clone()));
        }
        if let Some(u) = &b.upper {
            rows.push((unit(Rational::one()), Relation::Le, u.clone()));
        }
    }
    let p = rows.len();
    // Variables (lambda_1..k, pi_1..p).
    let mut obj = vec![Rational::zero(); k];
    obj.extend(rows.iter().map(|r| r.2.clone()));
    let mut lp = LinearProgram::new(Sense::Maximize, obj);
    for (i, (_, rel, _)) in rows.iter().enumerate() {
        let b = match rel {
            Relation::Ge => VarBounds::nonnegative(),
            Relation::Le => VarBounds {
                lower: None,
                upper: Some(Rational::zero()),
            },
            Relation::Eq => VarBounds::free(),
        };
        lp.set_bounds(k + i, b);
    }
    let mut simplex_row = vec![Rational::one(); k];
    simplex_row.extend(vec![Rational::zero(); p]);
    lp.add_constraint(simplex_row, Relation::Eq, Rational::one());
    for j in 0..m {
        let mut row: Vec<Rational> = bv.iter().map(|col| -&col[j]).collect();
        row.extend(rows.iter().map(|r| r.0[j].clone()));
        lp.add_constraint(row, Relation::Eq, Rational::zero());
    }
    let sup_inf = lp.solve()?;
    if sup_inf.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "sup-inf program ended {:?}",
            sup_inf.status
        )));
    }
    if sup_inf.value != inf_sup.value {
        return Err(Error::Internal(format!(
            "minimax gap: inf-sup {} vs sup-inf {}",
            inf_sup.value, sup_inf.value
        )));
    }
    let x_weights = sup_inf.primal[..k].to_vec();
    let x_star = (0..xdim)
        .map(|c| {
            x_weights
                .iter()
                .zip(&inst.x_vertices)
                .fold(Rational::zero(), |acc, (w, v)| acc + w * &v[c])
        })
        .collect();
    let y_star = match &hf.embedding {
        None => y_inner,
        Some(ws) => (0..inst.payoff.len())
            .map(|i| {
                y_inner
                    .iter()
                    .zip(ws)
                    .fold(Rational::zero(), |acc, (mu, w)| acc + mu * &w[i])
            })
            .collect(),
    };
    Ok(MinimaxSolution {
        value: inf_sup.value,
        x_star,
        y_star,
        x_weights,
    })
}
