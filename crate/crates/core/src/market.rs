//! One-period robust markets: arbitrage detection, the polytope of
//! martingale measures, FTAP cross-checks and superhedging.

use crate::lp::{
    solve_square_or_overdetermined, LinearProgram, LpStatus, Relation, Sense, VarBounds,
};
use crate::measures::{
    dominated_by, quasi_sure_support, AmbiguitySet, BoundedFunction, OutcomeSet,
    ProbabilityMeasure, SampleSpace,
};
use crate::rational::{dot, Rational};
use crate::{EnumerationCap, Error, Result};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    space: SampleSpace,
    s0: Vec<Rational>,
    s1: Vec<Vec<Rational>>,
    ambiguity: AmbiguitySet,
    increments: Vec<Vec<Rational>>,
    pub cap: EnumerationCap,
}

impl Market {
    /// `s1[w][i]` is the price of asset `i` in outcome `w`.
    pub fn new(
        space: &SampleSpace,
        s0: Vec<Rational>,
        s1: Vec<Vec<Rational>>,
        ambiguity: AmbiguitySet,
    ) -> Result<Self> {
        space.expect_same(ambiguity.space())?;
        space.expect_len(s1.len(), "S1")?;
        let d = s0.len();
        if let Some((w, row)) = s1.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "S1 row for {} has {} prices, expected {d}",
                space.label(w),
                row.len()
            )));
        }
        let increments = s1
            .iter()
            .map(|row| row.iter().zip(&s0).map(|(a, b)| a - b).collect())
            .collect();
        Ok(Self {
            space: space.clone(),
            s0,
            s1,
            ambiguity,
            increments,
            cap: EnumerationCap::DEFAULT,
        })
    }

    pub fn with_cap(mut self, cap: EnumerationCap) -> Self {
        self.cap = cap;
        self
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn num_assets(&self) -> usize {
        self.s0.len()
    }

    pub fn s0(&self) -> &[Rational] {
        &self.s0
    }

    pub fn s1(&self) -> &[Vec<Rational>] {
        &self.s1
    }

    pub fn ambiguity(&self) -> &AmbiguitySet {
        &self.ambiguity
    }

    /// `S1(w) - S0` per outcome.
    pub fn increments(&self) -> &[Vec<Rational>] {
        &self.increments
    }

    pub fn support(&self) -> OutcomeSet {
        quasi_sure_support(&self.ambiguity)
    }

    /// `H . (S1(w) - S0)`.
    pub fn gain(&self, h: &[Rational], outcome: usize) -> Rational {
        dot(h, &self.increments[outcome])
    }
}

/// A strategy with nonnegative gain quasi-surely and positive gain on a
/// charged outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArbitrageWitness {
    pub h: Vec<Rational>,
    pub strict_outcome: usize,
}

impl ArbitrageWitness {
    pub fn verify(&self, m: &Market) -> bool {
        let support = m.support();
        self.h.len() == m.num_assets()
            && support.contains(self.strict_outcome)
            && m.gain(&self.h, self.strict_outcome).is_positive()
            && support
                .indices()
                .iter()
                .all(|&w| !m.gain(&self.h, w).is_negative())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaCheck {
    pub holds: bool,
    pub witness: Option<ArbitrageWitness>,
}

/// No-arbitrage check with strategies normalized into `[-1, 1]^d`.
pub fn check_na(m: &Market) -> Result<NaCheck> {
    let witness = arbitrage_charging(m, &m.support())?;
    Ok(NaCheck {
        holds: witness.is_none(),
        witness,
    })
}

/// An arbitrage whose strictly positive outcome lies in `targets`.
///
/// Some vertex `P` admits a dominating martingale measure exactly when this
/// returns `None` for `targets = supp(P)`.
pub fn arbitrage_charging(m: &Market, targets: &OutcomeSet) -> Result<Option<ArbitrageWitness>> {
    let d = m.num_assets();
    let support = m.support();
    for &target in targets.indices().iter().filter(|&&w| support.contains(w)) {
        let mut lp = LinearProgram::new(Sense::Maximize, m.increments[target].clone());
        for j in 0..d {
            lp.set_bounds(j, VarBounds::boxed(-Rational::one(), Rational::one()));
        }
        for &w in support.indices() {
            lp.add_constraint(m.increments[w].clone(), Relation::Ge, Rational::zero());
        }
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Internal(format!(
                "arbitrage program ended {:?}",
                sol.status
            )));
        }
        if sol.value.is_positive() {
            let witness = ArbitrageWitness {
                h: sol.primal,
                strict_outcome: target,
            };
            debug_assert!(witness.verify(m));
            return Ok(Some(witness));
        }
    }
    Ok(None)
}

/// `{q >= 0, sum q = 1, q = 0 off the quasi-sure support, E_q[dS_i] = 0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartingalePolytope {
    space: SampleSpace,
    support: OutcomeSet,
    increments: Vec<Vec<Rational>>,
    vertices: Vec<ProbabilityMeasure>,
}

impl MartingalePolytope {
    pub fn vertices(&self) -> &[ProbabilityMeasure] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn support(&self) -> &OutcomeSet {
        &self.support
    }

    /// Whether `q` satisfies every defining constraint exactly.
    pub fn contains(&self, q: &ProbabilityMeasure) -> bool {
        if q.space() != &self.space || !q.support().is_subset(&self.support) {
            return false;
        }
        let d = self.increments.first().map_or(0, Vec::len);
        (0..d).all(|i| {
            let col: Vec<Rational> = self.increments.iter().map(|r| r[i].clone()).collect();
            q.expectation(&col).is_zero()
        })
    }

    pub fn as_ambiguity_set(&self) -> Result<AmbiguitySet> {
        if self.vertices.is_empty() {
            return Err(Error::EmptyPolytope(
                "no martingale measure is dominated by P".into(),
            ));
        }
        AmbiguitySet::new(&self.space, self.vertices.clone())
    }

    /// `max_Q E_Q[f]` over the vertices, with the maximizing vertex.
    pub fn max_expectation(&self, f: &[Rational]) -> Option<(Rational, &ProbabilityMeasure)> {
        let mut best: Option<(Rational, &ProbabilityMeasure)> = None;
        for q in &self.vertices {
            let v = q.expectation(f);
            if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, q));
            }
        }
        best
    }
}

/// Calls `visit` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// Vertices by basis enumeration over the support, deduplicated, in order of
/// discovery (smaller bases first).
pub fn martingale_polytope(m: &Market) -> Result<MartingalePolytope> {
    let support = m.support();
    let s = support.len();
    m.cap.check(s)?;
    let d = m.num_assets();
    // Rows: sum q = 1, then one martingale row per asset; columns: support outcomes.
    let mut rows: Vec<Vec<Rational>> = vec![vec![Rational::one(); s]];
    for i in 0..d {
        rows.push(
            support
                .indices()
                .iter()
                .map(|&w| m.increments[w][i].clone())
                .collect(),
        );
    }
    let mut rhs = vec![Rational::zero(); d + 1];
    rhs[0] = Rational::one();

    let mut vertices: Vec<ProbabilityMeasure> = Vec::new();
    let n = m.space.len();
    for k in 1..=s.min(d + 1) {
        for_each_combination(s, k, |cols| {
            let sub: Vec<Vec<Rational>> = rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                .collect();
            let Some(x) = solve_square_or_overdetermined(&sub, &rhs, k) else {
                return;
            };
            if x.iter().any(|v| v.is_negative()) {
                return;
            }
            let mut mass = vec![Rational::zero(); n];
            for (&c, v) in cols.iter().zip(x) {
                mass[support.indices()[c]] = v;
            }
            let q = ProbabilityMeasure::new(&m.space, mass)
                .expect("basic solution is a probability vector");
            if !vertices.contains(&q) {
                vertices.push(q);
            }
        });
    }
    let poly = MartingalePolytope {
        space: m.space.clone(),
        support,
        increments: m.increments.clone(),
        vertices,
    };
    for v in &poly.vertices {
        if !poly.contains(v) || !dominated_by(v, &m.ambiguity)? {
            return Err(Error::Internal(
                "martingale vertex fails its constraints".into(),
            ));
        }
    }
    Ok(poly)
}

/// Martingale measure maximizing its smallest mass on `targets`, with that mass.
fn max_min_mass(
    m: &Market,
    targets: &OutcomeSet,
) -> Result<Option<(ProbabilityMeasure, Rational)>> {
    let support = m.support();
    let s = support.len();
    let d = m.num_assets();
    // Variables: q on the support, then t.
    let mut obj = vec![Rational::zero(); s + 1];
    obj[s] = Rational::one();
    let mut lp = LinearProgram::new(Sense::Maximize, obj);
    lp.set_bounds(s, VarBounds::boxed(Rational::zero(), Rational::one()));
    let mut total = vec![Rational::one(); s];
    total.push(Rational::zero());
    lp.add_constraint(total, Relation::Eq, Rational::one());
    for i in 0..d {
        let mut row: Vec<Rational> = support
            .indices()
            .iter()
            .map(|&w| m.increments[w][i].clone())
            .collect();
        row.push(Rational::zero());
        lp.add_constraint(row, Relation::Eq, Rational::zero());
    }
    for (c, &w) in support.indices().iter().enumerate() {
        if targets.contains(w) {
            let mut row = vec![Rational::zero(); s + 1];
            row[c] = Rational::one();
            row[s] = -Rational::one();
            lp.add_constraint(row, Relation::Ge, Rational::zero());
        }
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    let mut mass = vec![Rational::zero(); m.space.len()];
    for (c, &w) in support.indices().iter().enumerate() {
        mass[w] = sol.primal[c].clone();
    }
    Ok(Some((ProbabilityMeasure::new(&m.space, mass)?, sol.value)))
}

/// A martingale measure charging every outcome of the quasi-sure support,
/// if one exists. Its existence is equivalent to NA.
pub fn full_support_martingale_measure(m: &Market) -> Result<Option<ProbabilityMeasure>> {
    Ok(max_min_mass(m, &m.support())?
        .filter(|(_, t)| t.is_positive())
        .map(|(q, _)| q))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexDomination {
    pub p_index: usize,
    /// A martingale measure `Q` with `P << Q`, if any.
    pub dominating_q: Option<ProbabilityMeasure>,
    /// Whether that `Q` is in turn dominated by some member of `P`.
    pub q_dominated_by_ambiguity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FtapReport {
    pub na: NaCheck,
    pub per_vertex: Vec<VertexDomination>,
    pub all_dominated: bool,
    /// NA holds iff every vertex admits a dominating martingale measure.
    pub na_equivalent: bool,
}

/// Checks both sides of the fundamental theorem independently.
pub fn check_ftap(m: &Market) -> Result<FtapReport> {
    let na = check_na(m)?;
    let mut per_vertex = Vec::new();
    for (k, p) in m.ambiguity.vertices().iter().enumerate() {
        let found = max_min_mass(m, &p.support())?.filter(|(_, t)| t.is_positive());
        let dominating_q = found.map(|(q, _)| q);
        let q_dominated_by_ambiguity = match &dominating_q {
            Some(q) => dominated_by(q, &m.ambiguity)?,
            None => false,
        };
        per_vertex.push(VertexDomination {
            p_index: k,
            dominating_q,
            q_dominated_by_ambiguity,
        });
    }
    let all_dominated = per_vertex.iter().all(|v| v.dominating_q.is_some());
    Ok(FtapReport {
        na_equivalent: na.holds == all_dominated,
        na,
        per_vertex,
        all_dominated,
    })
}

/// Cheapest superhedge of `f` with its certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HedgeCertificate {
    pub price: Rational,
    pub h: Vec<Rational>,
    pub f: BoundedFunction,
    /// Martingale measure with `E_Q[f] = price`.
    pub attaining_q: ProbabilityMeasure,
}

impl HedgeCertificate {
    pub fn verify(&self, m: &Market) -> bool {
        let support = m.support();
        let poly_ok = {
            let d = m.num_assets();
            self.attaining_q.support().is_subset(&support)
                && (0..d).all(|i| {
                    let col: Vec<Rational> = m.increments.iter().map(|r| r[i].clone()).collect();
                    self.attaining_q.expectation(&col).is_zero()
                })
        };
        self.h.len() == m.num_assets()
            && poly_ok
            && self.attaining_q.expectation(self.f.values()) == self.price
            && support
                .indices()
                .iter()
                .all(|&w| &self.price + m.gain(&self.h, w) >= self.f.values()[w])
    }
}

/// Superhedging price `min { x : x + H . dS >= f q.s. }` and hedge.
///
/// The hedge is the one of least `l1` norm among optimal ones.
pub fn superhedge(m: &Market, f: &BoundedFunction) -> Result<HedgeCertificate> {
    m.space.expect_same(f.space())?;
    let na = check_na(m)?;
    if let Some(w) = na.witness {
        return Err(Error::NaViolated(format!(
            "strategy {:?} is an arbitrage with positive gain in {}",
            w.h.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            m.space.label(w.strict_outcome)
        )));
    }
    let d = m.num_assets();
    let support = m.support();
    // Variables (x, H).
    let mut obj = vec![Rational::zero(); d + 1];
    obj[0] = Rational::one();
    let mut lp = LinearProgram::new(Sense::Minimize, obj);
    for j in 0..=d {
        lp.set_free(j);
    }
    for &w in support.indices() {
        let mut row = vec![Rational::one()];
        row.extend(m.increments[w].iter().cloned());
        lp.add_constraint(row, Relation::Ge, f.values()[w].clone());
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "superhedging program ended {:?}",
            sol.status
        )));
    }
    let price = sol.value;
    let mut mass = vec![Rational::zero(); m.space.len()];
    for (&w, y) in support.indices().iter().zip(&sol.dual) {
        mass[w] = y.clone();
    }
    let attaining_q = ProbabilityMeasure::new(&m.space, mass)
        .map_err(|e| Error::Internal(format!("superhedging dual is not a measure: {e}")))?;

    // Least-norm hedge at that price: H = H+ - H-.
    let mut norm = LinearProgram::new(Sense::Minimize, vec![Rational::one(); 2 * d]);
    for &w in support.indices() {
        let mut row: Vec<Rational> = m.increments[w].clone();
        row.extend(m.increments[w].iter().map(|v| -v));
        norm.add_constraint(row, Relation::Ge, &f.values()[w] - &price);
    }
    let hedge = norm.solve()?;
    if hedge.status != LpStatus::Optimal {
        return Err(Error::Internal("no hedge at the superhedging price".into()));
    }
    let h: Vec<Rational> = (0..d)
        .map(|i| &hedge.primal[i] - &hedge.primal[d + i])
        .collect();

    let cert = HedgeCertificate {
        price,
        h,
        f: f.clone(),
        attaining_q,
    };
    if !cert.verify(m) {
        return Err(Error::Internal(
            "hedge certificate failed its own check".into(),
        ));
    }
    let poly = martingale_polytope(m)?;
    match poly.max_expectation(f.values()) {
        Some((v, _)) if v == cert.price => Ok(cert),
        other => Err(Error::Internal(format!(
            "superhedging price {} differs from the vertex maximum {:?}",
            cert.price,
            other.map(|(v, _)| v.to_string())
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn market(incs: &[Rational], ambiguity: &[Vec<Rational>]) -> Market {
        let space = SampleSpace::numbered(incs.len()).unwrap();
        let amb = AmbiguitySet::from_masses(&space, ambiguity.to_vec()).unwrap();
        Market::new(
            &space,
            vec![int(1)],
            incs.iter().map(|x| vec![int(1) + x]).collect(),
            amb,
        )
        .unwrap()
    }

    fn uniform(n: usize) -> Vec<Rational> {
        vec![rat(1, n as i64); n]
    }

    #[test]
    fn na_examples() {
        let m = market(&[int(1), rat(-1, 2)], &[uniform(2)]);
        assert!(check_na(&m).unwrap().holds);
        let m = market(&[int(1), int(0)], &[uniform(2)]);
        let na = check_na(&m).unwrap();
        assert!(!na.holds);
        let w = na.witness.unwrap();
        assert_eq!(w.h, vec![int(1)]);
        assert_eq!(w.strict_outcome, 0);
        assert!(w.verify(&m));
        let m = market(&[int(0), int(0)], &[uniform(2)]);
        assert!(check_na(&m).unwrap().holds);
        let space = SampleSpace::numbered(2).unwrap();
        let amb = AmbiguitySet::from_masses(&space, vec![uniform(2)]).unwrap();
        let m = Market::new(&space, vec![], vec![vec![], vec![]], amb).unwrap();
        assert!(check_na(&m).unwrap().holds);
    }

    #[test]
    fn polar_outcomes_do_not_create_arbitrage() {
        // The down move is never charged, so buying is an arbitrage only on
        // the support; here the support is {w1} with a positive increment.
        let m = market(&[int(1), int(-1)], &[vec![int(1), int(0)]]);
        assert!(!check_na(&m).unwrap().holds);
        let m = market(&[int(0), int(-1)], &[vec![int(1), int(0)]]);
        assert!(check_na(&m).unwrap().holds);
    }

    #[test]
    fn polytope_examples() {
        let m = market(&[int(1), rat(-1, 2)], &[uniform(2)]);
        let p = martingale_polytope(&m).unwrap();
        assert_eq!(p.vertices().len(), 1);
        assert_eq!(p.vertices()[0].mass(), &[rat(1, 3), rat(2, 3)]);

        let m = market(&[int(1), int(0), int(-1)], &[uniform(3)]);
        let p = martingale_polytope(&m).unwrap();
        let got: Vec<Vec<Rational>> = p.vertices().iter().map(|v| v.mass().to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![int(0), int(1), int(0)],
                vec![rat(1, 2), int(0), rat(1, 2)]
            ]
        );

        let m = market(&[int(1), int(0)], &[uniform(2)]);
        let p = martingale_polytope(&m).unwrap();
        assert_eq!(p.vertices().len(), 1);
        assert_eq!(p.vertices()[0].mass(), &[int(0), int(1)]);
    }

    #[test]
    fn empty_polytope_when_increments_have_one_sign() {
        let m = market(&[int(1), int(2)], &[uniform(2)]);
        let p = martingale_polytope(&m).unwrap();
        assert!(p.is_empty());
        assert!(p.as_ambiguity_set().is_err());
    }

    #[test]
    fn ftap_examples() {
        let m = market(
            &[int(1), rat(-1, 2)],
            &[vec![int(1), int(0)], vec![int(0), int(1)]],
        );
        let r = check_ftap(&m).unwrap();
        assert!(r.na.holds && r.all_dominated && r.na_equivalent);
        for v in &r.per_vertex {
            assert_eq!(
                v.dominating_q.as_ref().unwrap().mass(),
                &[rat(1, 3), rat(2, 3)]
            );
            assert!(v.q_dominated_by_ambiguity);
        }

        let m = market(&[int(1), int(0)], &[uniform(2)]);
        let r = check_ftap(&m).unwrap();
        assert!(!r.na.holds && !r.all_dominated && r.na_equivalent);

        let amb = vec![vec![rat(1, 4), rat(3, 4)], vec![rat(2, 3), rat(1, 3)]];
        let m = market(&[int(0), int(0)], &amb);
        let r = check_ftap(&m).unwrap();
        assert!(r.na.holds && r.na_equivalent);
        let poly = martingale_polytope(&m).unwrap();
        for p in m.ambiguity().vertices() {
            assert!(poly.contains(p));
        }
    }

    #[test]
    fn superhedge_examples() {
        let m = market(&[int(1), rat(-1, 2)], &[uniform(2)]);
        let f = BoundedFunction::indicator(m.space(), &OutcomeSet::new([0]));
        let c = superhedge(&m, &f).unwrap();
        assert_eq!(c.price, rat(1, 3));
        assert_eq!(c.h, vec![rat(2, 3)]);
        assert_eq!(c.attaining_q.mass(), &[rat(1, 3), rat(2, 3)]);

        let f = BoundedFunction::constant(m.space(), rat(5, 7));
        let c = superhedge(&m, &f).unwrap();
        assert_eq!(c.price, rat(5, 7));
        assert_eq!(c.h, vec![int(0)]);

        let m = market(&[int(1), int(0), int(-1)], &[uniform(3)]);
        let f = BoundedFunction::indicator(m.space(), &OutcomeSet::new([1]));
        let c = superhedge(&m, &f).unwrap();
        assert_eq!(c.price, int(1));
        assert_eq!(c.h, vec![int(0)]);
        assert!(c.verify(&m));
    }

    #[test]
    fn superhedge_requires_na() {
        let m = market(&[int(1), int(0)], &[uniform(2)]);
        let f = BoundedFunction::constant(m.space(), int(1));
        assert!(matches!(superhedge(&m, &f), Err(Error::NaViolated(_))));
    }

    #[test]
    fn rejects_ragged_prices() {
        let space = SampleSpace::numbered(2).unwrap();
        let amb = AmbiguitySet::from_masses(&space, vec![uniform(2)]).unwrap();
        let err = Market::new(&space, vec![int(1)], vec![vec![int(1)], vec![]], amb).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn combinations_in_lexicographic_order() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_combination(2, 3, |_| count += 1);
        assert_eq!(count, 0);
    }
}
