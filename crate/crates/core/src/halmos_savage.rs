//! Quantitative Halmos-Savage: hypothesis checks, the minimax values over
//! the sets `D` and `D~`, and constructive dominating measures.
//!
//! Functions `h` are represented by their values on the quasi-sure support
//! of `P`; outside it they are fixed to zero. Since every member of `Q` is
//! dominated by `P`, events only matter through their trace on that support,
//! so subsets of the support are enumerated exhaustively.

use crate::lp::{
    minimax_value, Constraint, LinearProgram, LpStatus, MinimaxInstance, Polytope, Relation, Sense,
    VarBounds,
};
use crate::measures::{
    dominated_by, quasi_sure_support, AmbiguitySet, OutcomeSet, ProbabilityMeasure,
};
use crate::rational::{dot, int, Rational};
use crate::subsets::{for_each_subset, subset_order_key};
use crate::{EnumerationCap, Error, Result};
use num_traits::{One, Signed, Zero};

/// Sentinel for an infimum over an empty family of events.
pub fn no_qualifying_set() -> Rational {
    int(2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsInstance {
    pub p: AmbiguitySet,
    pub q: AmbiguitySet,
    pub epsilon: Rational,
    pub delta: Rational,
    pub cap: EnumerationCap,
}

impl HsInstance {
    /// Requires `epsilon, delta > 0` and every vertex of `q` dominated by `p`.
    pub fn new(
        p: AmbiguitySet,
        q: AmbiguitySet,
        epsilon: Rational,
        delta: Rational,
    ) -> Result<Self> {
        p.space().expect_same(q.space())?;
        if !epsilon.is_positive() || !delta.is_positive() {
            return Err(Error::InvalidInput(format!(
                "epsilon and delta must be positive, got {epsilon} and {delta}"
            )));
        }
        for (k, v) in q.vertices().iter().enumerate() {
            if !dominated_by(v, &p)? {
                return Err(Error::InvalidInput(format!(
                    "Q vertex {k} charges an outcome outside the quasi-sure support of P"
                )));
            }
        }
        Ok(Self {
            p,
            q,
            epsilon,
            delta,
            cap: EnumerationCap::DEFAULT,
        })
    }

    pub fn with_cap(mut self, cap: EnumerationCap) -> Self {
        self.cap = cap;
        self
    }

    pub fn support(&self) -> OutcomeSet {
        quasi_sure_support(&self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DSetKind {
    /// `{0 <= h <= 1, E_P[h] >= 2 eps}`
    Primal,
    /// `{0 <= h <= 1, E_P[h] <= eps delta}`
    Dual,
}

/// One of the convex sets of test functions, on the quasi-sure support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DSet {
    pub kind: DSetKind,
    pub p: ProbabilityMeasure,
    pub threshold: Rational,
    pub support: OutcomeSet,
}

impl DSet {
    pub fn new(inst: &HsInstance, p: &ProbabilityMeasure, kind: DSetKind) -> Self {
        let threshold = match kind {
            DSetKind::Primal => int(2) * &inst.epsilon,
            DSetKind::Dual => &inst.epsilon * &inst.delta,
        };
        Self {
            kind,
            p: p.clone(),
            threshold,
            support: inst.support(),
        }
    }

    fn p_row(&self) -> Vec<Rational> {
        restrict(&self.p, &self.support)
    }

    pub fn as_polytope(&self) -> Polytope {
        let s = self.support.len();
        let relation = match self.kind {
            DSetKind::Primal => Relation::Ge,
            DSetKind::Dual => Relation::Le,
        };
        Polytope::Halfspaces {
            dim: s,
            constraints: vec![Constraint {
                coeffs: self.p_row(),
                relation,
                rhs: self.threshold.clone(),
            }],
            bounds: vec![VarBounds::boxed(Rational::zero(), Rational::one()); s],
        }
    }

    /// Whether `h` (values on the full space) lies in the set.
    pub fn contains(&self, h: &[Rational]) -> bool {
        let on_support = self
            .support
            .indices()
            .iter()
            .all(|&i| !h[i].is_negative() && h[i] <= Rational::one());
        let e = self.p.expectation(h);
        on_support
            && match self.kind {
                DSetKind::Primal => e >= self.threshold,
                DSetKind::Dual => e <= self.threshold,
            }
    }
}

fn restrict(m: &ProbabilityMeasure, support: &OutcomeSet) -> Vec<Rational> {
    support
        .indices()
        .iter()
        .map(|&i| m.mass()[i].clone())
        .collect()
}

fn vertex_rows(set: &AmbiguitySet, support: &OutcomeSet) -> Vec<Vec<Rational>> {
    set.vertices()
        .iter()
        .map(|v| restrict(v, support))
        .collect()
}

/// Enumerates subsets of the support with the masses every P vertex and Q
/// vertex assigns to them.
fn scan_subsets<F>(inst: &HsInstance, mut visit: F) -> Result<()>
where
    F: FnMut(u64, &[Rational], &[Rational]),
{
    let support = inst.support();
    inst.cap.check(support.len())?;
    let mut rows = vertex_rows(&inst.p, &support);
    let np = rows.len();
    rows.extend(vertex_rows(&inst.q, &support));
    for_each_subset(&rows, support.len(), |mask, sums| {
        let (ps, qs) = sums.split_at(np);
        visit(mask, ps, qs)
    });
    Ok(())
}

fn max_of(v: &[Rational]) -> &Rational {
    v.iter().max().expect("nonempty vertex list")
}

fn min_of(v: &[Rational]) -> &Rational {
    v.iter().min().expect("nonempty vertex list")
}

/// Keeps the extremal value with the `(size, mask)` tie-break.
struct Extremum {
    best: Option<(Rational, u64)>,
    prefer_smaller: bool,
}

impl Extremum {
    fn new(prefer_smaller: bool) -> Self {
        Self {
            best: None,
            prefer_smaller,
        }
    }

    fn offer(&mut self, value: &Rational, mask: u64) {
        let replace = match &self.best {
            None => true,
            Some((v, m)) => {
                let strictly = if self.prefer_smaller {
                    value < v
                } else {
                    value > v
                };
                strictly || (value == v && subset_order_key(mask) < subset_order_key(*m))
            }
        };
        if replace {
            self.best = Some((value.clone(), mask));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisCheck {
    pub holds: bool,
    /// Qualifying event closest to violating the hypothesis, if any qualifies.
    pub worst_set: Option<OutcomeSet>,
    /// Primal: `max_Q Q(worst_set)`. Dual: `min_Q Q(worst_set)`.
    pub worst_value: Option<Rational>,
}

fn finish_check(
    ext: Extremum,
    support: &OutcomeSet,
    holds: impl Fn(&Rational) -> bool,
) -> HypothesisCheck {
    match ext.best {
        None => HypothesisCheck {
            holds: true,
            worst_set: None,
            worst_value: None,
        },
        Some((v, mask)) => HypothesisCheck {
            holds: holds(&v),
            worst_set: Some(OutcomeSet::from_mask(mask, support.indices())),
            worst_value: Some(v),
        },
    }
}

/// Every event some `P` charges with at least `epsilon` is charged with at
/// least `delta` by some `Q`.
pub fn check_hypothesis_primal(inst: &HsInstance) -> Result<HypothesisCheck> {
    let mut ext = Extremum::new(true);
    scan_subsets(inst, |mask, ps, qs| {
        if *max_of(ps) >= inst.epsilon {
            ext.offer(max_of(qs), mask);
        }
    })?;
    Ok(finish_check(ext, &inst.support(), |v| *v >= inst.delta))
}

/// Every event some `P` charges with less than `delta` is charged with less
/// than `epsilon` by some `Q`.
pub fn check_hypothesis_dual(inst: &HsInstance) -> Result<HypothesisCheck> {
    let mut ext = Extremum::new(false);
    scan_subsets(inst, |mask, ps, qs| {
        if *min_of(ps) < inst.delta {
            ext.offer(min_of(qs), mask);
        }
    })?;
    Ok(finish_check(ext, &inst.support(), |v| *v < inst.epsilon))
}

/// Largest `delta` for which the primal hypothesis holds at `epsilon`:
/// `min { max_Q Q(A) : max_P P(A) >= epsilon }`, or the sentinel 2.
pub fn hs_modulus(
    p: &AmbiguitySet,
    q: &AmbiguitySet,
    epsilon: &Rational,
    cap: EnumerationCap,
) -> Result<Rational> {
    let inst =
        HsInstance::new(p.clone(), q.clone(), epsilon.clone(), Rational::one())?.with_cap(cap);
    let check = check_hypothesis_primal(&inst)?;
    Ok(check.worst_value.unwrap_or_else(no_qualifying_set))
}

/// Supremum of the `delta` for which the dual hypothesis holds at `epsilon`:
/// `min { min_P P(A) : min_Q Q(A) >= epsilon }`, or the sentinel 2. The
/// hypothesis holds exactly for `delta` up to and including this value.
pub fn dual_hs_modulus(
    p: &AmbiguitySet,
    q: &AmbiguitySet,
    epsilon: &Rational,
    cap: EnumerationCap,
) -> Result<Rational> {
    let inst =
        HsInstance::new(p.clone(), q.clone(), epsilon.clone(), Rational::one())?.with_cap(cap);
    let mut best: Option<Rational> = None;
    scan_subsets(&inst, |_, ps, qs| {
        if *min_of(qs) >= *epsilon {
            let v = min_of(ps);
            if best.as_ref().is_none_or(|b| v < b) {
                best = Some(v.clone());
            }
        }
    })?;
    Ok(best.unwrap_or_else(no_qualifying_set))
}

fn check_member(inst: &HsInstance, p: &ProbabilityMeasure) -> Result<()> {
    inst.p.space().expect_same(p.space())?;
    if inst.p.membership_weights(p)?.is_none() {
        return Err(Error::InvalidInput(
            "the chosen P is not a member of the ambiguity set".into(),
        ));
    }
    Ok(())
}

fn d_set_game(inst: &HsInstance, d: &DSet) -> MinimaxInstance {
    let s = d.support.len();
    let sign = match d.kind {
        DSetKind::Primal => Rational::one(),
        DSetKind::Dual => -Rational::one(),
    };
    let payoff = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    if i == j {
                        sign.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    MinimaxInstance {
        payoff,
        x_vertices: vertex_rows(&inst.q, &d.support),
        y: d.as_polytope(),
    }
}

/// Result of the minimax problem over a D-set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DSetGame {
    /// Primal: `inf_h sup_Q E_Q[h]`. Dual: `sup_h inf_Q E_Q[h]`. Both orders agree.
    pub value: Rational,
    /// Optimal `h` on the full space.
    pub h: Vec<Rational>,
    /// Optimal weights on the vertices of `Q`.
    pub q_weights: Vec<Rational>,
}

fn solve_d_set_game(inst: &HsInstance, p: &ProbabilityMeasure, kind: DSetKind) -> Result<DSetGame> {
    check_member(inst, p)?;
    let d = DSet::new(inst, p, kind);
    let sol = minimax_value(&d_set_game(inst, &d))?;
    let value = match kind {
        DSetKind::Primal => sol.value,
        DSetKind::Dual => -sol.value,
    };
    let mut h = vec![Rational::zero(); p.space().len()];
    for (&i, v) in d.support.indices().iter().zip(sol.y_star) {
        h[i] = v;
    }
    Ok(DSetGame {
        value,
        h,
        q_weights: sol.x_weights,
    })
}

/// The minimax value over `D` (primal) or `D~` (dual) for the member `p`.
///
/// Fails with `EmptyPolytope` for the primal kind when `2 epsilon` exceeds
/// what `p` can give to any `h <= 1`.
pub fn basic_lemma_value(
    inst: &HsInstance,
    p: &ProbabilityMeasure,
    kind: DSetKind,
) -> Result<Rational> {
    Ok(solve_d_set_game(inst, p, kind)?.value)
}

/// Like [`basic_lemma_value`] but also returns the optimal `h` and `Q` weights.
pub fn d_set_game_solution(
    inst: &HsInstance,
    p: &ProbabilityMeasure,
    kind: DSetKind,
) -> Result<DSetGame> {
    solve_d_set_game(inst, p, kind)
}

/// The same inf-sup with `h` restricted to indicators of events:
/// `min { max_Q Q(A) : P(A) >= 2 epsilon }`, or `None` when no event qualifies.
pub fn indicator_lemma_value(
    inst: &HsInstance,
    p: &ProbabilityMeasure,
) -> Result<Option<Rational>> {
    check_member(inst, p)?;
    let support = inst.support();
    inst.cap.check(support.len())?;
    let mut rows = vec![restrict(p, &support)];
    rows.extend(vertex_rows(&inst.q, &support));
    let threshold = int(2) * &inst.epsilon;
    let mut best: Option<Rational> = None;
    for_each_subset(&rows, support.len(), |_, sums| {
        if sums[0] >= threshold {
            let v = max_of(&sums[1..]);
            if best.as_ref().is_none_or(|b| v < b) {
                best = Some(v.clone());
            }
        }
    });
    Ok(best)
}

/// LP duality certificate bounding `E_Q[h]` over a D-set for a fixed `Q`.
///
/// Primal kind: `multiplier * p - slacks <= q` on the support, proving
/// `E_Q[h] >= 2 eps * multiplier - sum(slacks)` for all `h` in `D`.
/// Dual kind: `multiplier * p + slacks >= q`, proving
/// `E_Q[h] <= eps delta * multiplier + sum(slacks)` for all `h` in `D~`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DSetCertificate {
    pub multiplier: Rational,
    /// One slack per support outcome, in support order.
    pub slacks: Vec<Rational>,
    pub support: OutcomeSet,
    pub bound: Rational,
}

impl DSetCertificate {
    /// Checks the certificate inequalities for the given set and measure.
    pub fn verify(&self, d: &DSet, q: &ProbabilityMeasure) -> bool {
        if self.support != d.support
            || self.slacks.len() != self.support.len()
            || self.multiplier.is_negative()
            || self.slacks.iter().any(|u| u.is_negative())
        {
            return false;
        }
        let slack_sum = self.slacks.iter().fold(Rational::zero(), |a, u| a + u);
        let rows_ok = self
            .support
            .indices()
            .iter()
            .zip(&self.slacks)
            .all(|(&i, u)| {
                let pm = &self.multiplier * &d.p.mass()[i];
                match d.kind {
                    DSetKind::Primal => pm - u <= q.mass()[i],
                    DSetKind::Dual => pm + u >= q.mass()[i],
                }
            });
        let implied = match d.kind {
            DSetKind::Primal => &d.threshold * &self.multiplier - slack_sum,
            DSetKind::Dual => &d.threshold * &self.multiplier + slack_sum,
        };
        rows_ok && implied == self.bound
    }
}

/// Optimal inner bound for a fixed `Q`, with its certificate.
pub fn d_set_certificate(d: &DSet, q: &ProbabilityMeasure) -> Result<DSetCertificate> {
    let s = d.support.len();
    let (sense, slack_sign) = match d.kind {
        DSetKind::Primal => (Sense::Maximize, -Rational::one()),
        DSetKind::Dual => (Sense::Minimize, Rational::one()),
    };
    // Variables (multiplier, slacks...).
    let mut obj = vec![d.threshold.clone()];
    obj.extend(vec![slack_sign.clone(); s]);
    let mut lp = LinearProgram::new(sense, obj);
    for (k, &i) in d.support.indices().iter().enumerate() {
        let mut row = vec![Rational::zero(); s + 1];
        row[0] = d.p.mass()[i].clone();
        row[k + 1] = slack_sign.clone();
        let rel = match d.kind {
            DSetKind::Primal => Relation::Le,
            DSetKind::Dual => Relation::Ge,
        };
        lp.add_constraint(row, rel, q.mass()[i].clone());
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::EmptyPolytope(format!(
            "the {:?} D-set is empty",
            d.kind
        )));
    }
    let cert = DSetCertificate {
        multiplier: sol.primal[0].clone(),
        slacks: sol.primal[1..].to_vec(),
        support: d.support.clone(),
        bound: sol.value,
    };
    if !cert.verify(d, q) {
        return Err(Error::Internal(
            "D-set certificate failed its own check".into(),
        ));
    }
    Ok(cert)
}

/// A dominating measure produced by the constructive theorems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsWitness {
    pub kind: DSetKind,
    pub for_p: ProbabilityMeasure,
    pub q_star: ProbabilityMeasure,
    /// Mixture weights over the vertices of `Q` producing `q_star`.
    pub weights: Vec<Rational>,
    pub epsilon: Rational,
    pub delta: Rational,
    /// Primal: `Q*(A) >= bound` whenever `P(A) >= 2 eps`.
    /// Dual: `Q*(A) <= bound` whenever `P(A) < eps delta`.
    pub guaranteed_bound: Rational,
    /// True when no event qualifies (primal with `2 eps > 1`).
    pub vacuous: bool,
    pub certificate: Option<DSetCertificate>,
}

impl HsWitness {
    /// The theorem's target: `eps delta / 2` (primal) or `2 eps` (dual).
    pub fn target(&self) -> Rational {
        match self.kind {
            DSetKind::Primal => &self.epsilon * &self.delta / int(2),
            DSetKind::Dual => int(2) * &self.epsilon,
        }
    }

    fn meets_target(&self) -> bool {
        match self.kind {
            DSetKind::Primal => self.guaranteed_bound >= self.target(),
            DSetKind::Dual => self.guaranteed_bound < self.target(),
        }
    }

    /// Re-checks the witness from scratch: mixture weights, certificate,
    /// target inequality and every event of the quasi-sure support.
    pub fn verify(&self, inst: &HsInstance) -> Result<bool> {
        let q_star = inst.q.mixture(&self.weights)?;
        if q_star != self.q_star || !self.meets_target() {
            return Ok(false);
        }
        if let Some(cert) = &self.certificate {
            let d = DSet::new(inst, &self.for_p, self.kind);
            if !cert.verify(&d, &self.q_star) || cert.bound != self.guaranteed_bound {
                return Ok(false);
            }
        }
        Ok(first_violation(inst, self)?.is_none())
    }
}

/// An event breaking the witness guarantee, if any.
pub fn first_violation(inst: &HsInstance, w: &HsWitness) -> Result<Option<OutcomeSet>> {
    let support = inst.support();
    inst.cap.check(support.len())?;
    let rows = vec![restrict(&w.for_p, &support), restrict(&w.q_star, &support)];
    let threshold = match w.kind {
        DSetKind::Primal => int(2) * &w.epsilon,
        DSetKind::Dual => &w.epsilon * &w.delta,
    };
    let mut bad: Option<u64> = None;
    for_each_subset(&rows, support.len(), |mask, sums| {
        let broken = match w.kind {
            DSetKind::Primal => sums[0] >= threshold && sums[1] < w.guaranteed_bound,
            DSetKind::Dual => sums[0] < threshold && sums[1] > w.guaranteed_bound,
        };
        if broken && bad.is_none_or(|b| subset_order_key(mask) < subset_order_key(b)) {
            bad = Some(mask);
        }
    });
    Ok(bad.map(|m| OutcomeSet::from_mask(m, support.indices())))
}

fn construct(inst: &HsInstance, p: &ProbabilityMeasure, kind: DSetKind) -> Result<HsWitness> {
    check_member(inst, p)?;
    let check = match kind {
        DSetKind::Primal => check_hypothesis_primal(inst)?,
        DSetKind::Dual => check_hypothesis_dual(inst)?,
    };
    if !check.holds {
        let set = check
            .worst_set
            .map(|s| s.labels(inst.p.space()).collect::<Vec<_>>().join(","));
        return Err(Error::HypothesisViolated(format!(
            "event {{{}}} has Q-value {}",
            set.unwrap_or_default(),
            check.worst_value.map(|v| v.to_string()).unwrap_or_default()
        )));
    }
    let vacuous = kind == DSetKind::Primal && int(2) * &inst.epsilon > Rational::one();
    let witness = if vacuous {
        let mut weights = vec![Rational::zero(); inst.q.vertices().len()];
        weights[0] = Rational::one();
        let mut w = HsWitness {
            kind,
            for_p: p.clone(),
            q_star: inst.q.vertices()[0].clone(),
            weights,
            epsilon: inst.epsilon.clone(),
            delta: inst.delta.clone(),
            guaranteed_bound: Rational::zero(),
            vacuous: true,
            certificate: None,
        };
        w.guaranteed_bound = w.target();
        w
    } else {
        let game = solve_d_set_game(inst, p, kind)?;
        let q_star = inst.q.mixture(&game.q_weights)?;
        let d = DSet::new(inst, p, kind);
        let cert = d_set_certificate(&d, &q_star)?;
        if cert.bound != game.value {
            return Err(Error::Internal(format!(
                "inner bound {} differs from the minimax value {}",
                cert.bound, game.value
            )));
        }
        HsWitness {
            kind,
            for_p: p.clone(),
            q_star,
            weights: game.q_weights,
            epsilon: inst.epsilon.clone(),
            delta: inst.delta.clone(),
            guaranteed_bound: game.value,
            vacuous: false,
            certificate: Some(cert),
        }
    };
    if !witness.meets_target() {
        return Err(Error::BoundViolated(format!(
            "attained bound {} misses the target {}",
            witness.guaranteed_bound,
            witness.target()
        )));
    }
    if let Some(set) = first_violation(inst, &witness)? {
        return Err(Error::BoundViolated(format!(
            "event {:?} breaks the witness guarantee",
            set.indices()
        )));
    }
    Ok(witness)
}

/// A `Q*` in `conv(Q)` with `Q*(A) >= eps delta / 2` whenever `P(A) >= 2 eps`.
pub fn construct_hs_witness(inst: &HsInstance, p: &ProbabilityMeasure) -> Result<HsWitness> {
    construct(inst, p, DSetKind::Primal)
}

/// A `Q*` in `conv(Q)` with `Q*(A) < 2 eps` whenever `P(A) < eps delta`.
pub fn construct_dual_hs_witness(inst: &HsInstance, p: &ProbabilityMeasure) -> Result<HsWitness> {
    construct(inst, p, DSetKind::Dual)
}

/// Bound the dual inner value must respect: `(2 - eps) eps`.
pub fn dual_inner_threshold(epsilon: &Rational) -> Rational {
    (int(2) - epsilon) * epsilon
}

/// Expectation of `h` under each vertex of `set`.
pub fn vertex_expectations(set: &AmbiguitySet, h: &[Rational]) -> Vec<Rational> {
    set.vertices().iter().map(|v| dot(v.mass(), h)).collect()
}
