//! Finite prefixes of sequences of one-period markets.
//!
//! Asymptotic notions are only ever certified on the prefix at hand: the
//! scanners look for arbitrage sequences along a user schedule, and the
//! modulus tables give the per-`epsilon` uniform `delta` that rules them out.

use crate::halmos_savage::{
    construct_dual_hs_witness, construct_hs_witness, dual_hs_modulus, hs_modulus, DSetKind,
    HsInstance, HsWitness,
};
use crate::lp::{LinearProgram, LpStatus, Relation, Sense, VarBounds};
use crate::market::{check_na, martingale_polytope, Market, MartingalePolytope};
use crate::measures::{AmbiguitySet, OutcomeSet, ProbabilityMeasure};
use crate::rational::{int, pow2_neg, rat, Rational};
use crate::subsets::{for_each_subset, subset_order_key};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketSequence {
    markets: Vec<Market>,
}

impl MarketSequence {
    /// Every market must be free of arbitrage.
    pub fn new(markets: Vec<Market>) -> Result<Self> {
        for (k, m) in markets.iter().enumerate() {
            if !check_na(m)?.holds {
                return Err(Error::NaViolated(format!(
                    "market {} admits an arbitrage",
                    k + 1
                )));
            }
        }
        Ok(Self { markets })
    }

    pub fn markets(&self) -> &[Market] {
        &self.markets
    }

    pub fn len(&self) -> usize {
        self.markets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markets.is_empty()
    }

    /// Market with 1-based index `n`.
    pub fn market(&self, n: usize) -> &Market {
        &self.markets[n - 1]
    }

    fn polytopes(&self) -> Result<Vec<MartingalePolytope>> {
        self.markets
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let p = martingale_polytope(m)?;
                if p.is_empty() {
                    return Err(Error::EmptyMartingalePolytope(k + 1));
                }
                Ok(p)
            })
            .collect()
    }
}

/// `{1/10, 1/5, 3/10, 2/5, 1/2}`.
pub fn default_grid() -> Vec<Rational> {
    (1..=5).map(|k| rat(k, 10)).collect()
}

/// `c_k = 1/k` for `k = 1..=len`.
pub fn default_c_schedule(len: usize) -> Vec<Rational> {
    (1..=len as i64).map(|k| rat(1, k)).collect()
}

/// `tau_k = 1 - 1/(k+1)` for `k = 1..=len`.
pub fn default_target_levels(len: usize) -> Vec<Rational> {
    (1..=len as i64).map(|k| int(1) - rat(1, k + 1)).collect()
}

/// One selected market of an asymptotic arbitrage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AaEntry {
    /// 1-based market index `n_k`.
    pub market: usize,
    pub h: Vec<Rational>,
    /// Event the strategy was built on; `X >= alpha` holds on it.
    pub event: OutcomeSet,
    /// Index of the vertex of the market's ambiguity set used as `P^k`.
    pub p_vertex: usize,
    pub p: ProbabilityMeasure,
    /// `P^k(X^k >= alpha)`.
    pub probability: Rational,
}

impl AaEntry {
    fn gains(&self, m: &Market) -> Vec<Rational> {
        (0..m.space().len()).map(|w| m.gain(&self.h, w)).collect()
    }

    fn good_event(&self, m: &Market, alpha: &Rational) -> OutcomeSet {
        OutcomeSet::new(
            self.gains(m)
                .iter()
                .enumerate()
                .filter(|(_, x)| *x >= alpha)
                .map(|(w, _)| w),
        )
    }

    fn check(&self, seq: &MarketSequence, alpha: &Rational, floor: &Rational) -> bool {
        if self.market == 0 || self.market > seq.len() {
            return false;
        }
        let m = seq.market(self.market);
        let Some(vertex) = m.ambiguity().vertices().get(self.p_vertex) else {
            return false;
        };
        let gains = self.gains(m);
        vertex == &self.p
            && self.h.len() == m.num_assets()
            && self.h.iter().all(|v| v.abs() <= Rational::one())
            && m.support()
                .indices()
                .iter()
                .all(|&w| gains[w] >= -floor.clone())
            && self.event.indices().iter().all(|&w| gains[w] >= *alpha)
            && self.p.prob(&self.good_event(m, alpha)) == self.probability
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aa1Witness {
    pub alpha: Rational,
    pub c: Vec<Rational>,
    pub entries: Vec<AaEntry>,
}

impl Aa1Witness {
    /// Re-checks every inequality from the stored data.
    pub fn verify(&self, seq: &MarketSequence) -> bool {
        self.alpha.is_positive()
            && self.c.len() == self.entries.len()
            && self.c.iter().all(|c| c.is_positive())
            && self.c.windows(2).all(|w| w[1] < w[0])
            && self.entries.windows(2).all(|w| w[0].market < w[1].market)
            && self
                .entries
                .iter()
                .zip(&self.c)
                .all(|(e, c)| e.check(seq, &self.alpha, c) && e.probability >= self.alpha)
    }

    /// Per entry: `max_Q Q(X >= alpha)` over the martingale polytope and the
    /// bound `c_k / alpha` it must respect.
    pub fn martingale_bounds(&self, seq: &MarketSequence) -> Result<Vec<(Rational, Rational)>> {
        self.entries
            .iter()
            .zip(&self.c)
            .map(|(e, c)| {
                let m = seq.market(e.market);
                let poly = martingale_polytope(m)?;
                let event = e.good_event(m, &self.alpha);
                let worst = poly
                    .vertices()
                    .iter()
                    .map(|q| q.prob(&event))
                    .max()
                    .ok_or(Error::EmptyMartingalePolytope(e.market))?;
                Ok((worst, c / &self.alpha))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aa2Witness {
    pub alpha: Rational,
    pub target_levels: Vec<Rational>,
    pub entries: Vec<AaEntry>,
}

impl Aa2Witness {
    pub fn verify(&self, seq: &MarketSequence) -> bool {
        self.alpha.is_positive()
            && self.target_levels.len() == self.entries.len()
            && self.entries.windows(2).all(|w| w[0].market < w[1].market)
            && self
                .entries
                .iter()
                .zip(&self.target_levels)
                .all(|(e, t)| e.check(seq, &self.alpha, &int(1)) && e.probability >= *t)
    }

    /// The attained probabilities `p_k`.
    pub fn probabilities(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.probability.clone()).collect()
    }
}

/// Inclusion-minimal events of the support some vertex charges with at least
/// `threshold`, ordered by size then mask, with the first such vertex.
fn minimal_qualifying_sets(m: &Market, threshold: &Rational) -> Result<Vec<(OutcomeSet, usize)>> {
    let support = m.support();
    m.cap.check(support.len())?;
    let rows: Vec<Vec<Rational>> = m
        .ambiguity()
        .vertices()
        .iter()
        .map(|v| {
            support
                .indices()
                .iter()
                .map(|&w| v.mass()[w].clone())
                .collect()
        })
        .collect();
    let mut found: Vec<(u64, usize)> = Vec::new();
    for_each_subset(&rows, support.len(), |mask, sums| {
        let Some(vertex) = sums.iter().position(|s| s >= threshold) else {
            return;
        };
        let minimal = (0..support.len()).filter(|b| mask >> b & 1 == 1).all(|b| {
            sums.iter()
                .zip(&rows)
                .all(|(s, row)| s - &row[b] < *threshold)
        });
        if minimal {
            found.push((mask, vertex));
        }
    });
    found.sort_by_key(|(mask, _)| subset_order_key(*mask));
    Ok(found
        .into_iter()
        .map(|(mask, v)| (OutcomeSet::from_mask(mask, support.indices()), v))
        .collect())
}

/// A strategy in `[-1, 1]^d` with gain `>= alpha` on `event` and `>= -floor`
/// elsewhere on the support.
fn strategy_for(
    m: &Market,
    event: &OutcomeSet,
    alpha: &Rational,
    floor: &Rational,
) -> Result<Option<Vec<Rational>>> {
    let d = m.num_assets();
    let mut lp = LinearProgram::new(Sense::Minimize, vec![Rational::zero(); d]);
    for j in 0..d {
        lp.set_bounds(j, VarBounds::boxed(-Rational::one(), Rational::one()));
    }
    for &w in m.support().indices() {
        let rhs = if event.contains(w) {
            alpha.clone()
        } else {
            -floor.clone()
        };
        lp.add_constraint(m.increments()[w].clone(), Relation::Ge, rhs);
    }
    let sol = lp.solve()?;
    Ok((sol.status == LpStatus::Optimal).then_some(sol.primal))
}

fn try_market(
    m: &Market,
    n: usize,
    alpha: &Rational,
    threshold: &Rational,
    floor: &Rational,
) -> Result<Option<AaEntry>> {
    for (event, p_vertex) in minimal_qualifying_sets(m, threshold)? {
        if let Some(h) = strategy_for(m, &event, alpha, floor)? {
            let p = m.ambiguity().vertices()[p_vertex].clone();
            let mut entry = AaEntry {
                market: n,
                h,
                event,
                p_vertex,
                p,
                probability: Rational::zero(),
            };
            entry.probability = entry.p.prob(&entry.good_event(m, alpha));
            return Ok(Some(entry));
        }
    }
    Ok(None)
}

fn sorted_alphas(grid: &[Rational]) -> Result<Vec<Rational>> {
    if grid.iter().any(|a| !a.is_positive()) {
        return Err(Error::InvalidInput(
            "alpha grid values must be positive".into(),
        ));
    }
    let mut alphas = grid.to_vec();
    alphas.sort_by(|a, b| b.cmp(a));
    alphas.dedup();
    Ok(alphas)
}

/// Greedy search: for each `alpha` (largest first) fill schedule slot `k`
/// with the first market after the previous slot that admits a strategy.
fn scan<F>(
    seq: &MarketSequence,
    alpha_grid: &[Rational],
    slots: usize,
    mut attempt: F,
) -> Result<Option<(Rational, Vec<AaEntry>)>>
where
    F: FnMut(&Market, usize, &Rational, usize) -> Result<Option<AaEntry>>,
{
    if slots == 0 {
        return Ok(None);
    }
    for alpha in sorted_alphas(alpha_grid)? {
        let mut entries = Vec::with_capacity(slots);
        for (k, m) in seq.markets.iter().enumerate() {
            if entries.len() == slots {
                break;
            }
            if let Some(e) = attempt(m, k + 1, &alpha, entries.len())? {
                entries.push(e);
            }
        }
        if entries.len() == slots {
            return Ok(Some((alpha, entries)));
        }
    }
    Ok(None)
}

/// Looks for an asymptotic arbitrage of the first kind along `c_schedule`.
pub fn scan_aa1(
    seq: &MarketSequence,
    alpha_grid: &[Rational],
    c_schedule: &[Rational],
) -> Result<Option<Aa1Witness>> {
    if c_schedule.iter().any(|c| !c.is_positive()) || c_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(
            "c schedule must be positive and strictly decreasing".into(),
        ));
    }
    let found = scan(seq, alpha_grid, c_schedule.len(), |m, n, alpha, slot| {
        try_market(m, n, alpha, alpha, &c_schedule[slot])
    })?;
    Ok(found.map(|(alpha, entries)| Aa1Witness {
        alpha,
        c: c_schedule.to_vec(),
        entries,
    }))
}

/// Looks for an asymptotic arbitrage of the second kind whose probabilities
/// reach `target_levels` slot by slot.
pub fn scan_aa2(
    seq: &MarketSequence,
    alpha_grid: &[Rational],
    target_levels: &[Rational],
) -> Result<Option<Aa2Witness>> {
    if target_levels
        .iter()
        .any(|t| !t.is_positive() || *t > Rational::one())
        || target_levels.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::InvalidInput(
            "target levels must lie in (0, 1] and be nondecreasing".into(),
        ));
    }
    let found = scan(seq, alpha_grid, target_levels.len(), |m, n, alpha, slot| {
        try_market(m, n, alpha, &target_levels[slot], &int(1))
    })?;
    Ok(found.map(|(alpha, entries)| Aa2Witness {
        alpha,
        target_levels: target_levels.to_vec(),
        entries,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusTable {
    pub kind: DSetKind,
    pub epsilon_grid: Vec<Rational>,
    /// `per_market[n-1][j]` is the modulus of market `n` at `epsilon_grid[j]`.
    pub per_market: Vec<Vec<Rational>>,
    /// Minimum over markets per grid point; 2 when no event qualifies anywhere.
    pub uniform_delta: Vec<Rational>,
}

impl ModulusTable {
    /// True when every grid point has a positive uniform modulus.
    pub fn certifies(&self) -> bool {
        !self.uniform_delta.is_empty() && self.uniform_delta.iter().all(|d| d.is_positive())
    }
}

/// Halmos-Savage moduli of every market against its martingale polytope.
pub fn certify_moduli(
    seq: &MarketSequence,
    epsilon_grid: &[Rational],
    kind: DSetKind,
) -> Result<ModulusTable> {
    if epsilon_grid.iter().any(|e| !e.is_positive()) {
        return Err(Error::InvalidInput(
            "epsilon grid values must be positive".into(),
        ));
    }
    let polys = seq.polytopes()?;
    let mut per_market = Vec::with_capacity(seq.len());
    for (m, poly) in seq.markets.iter().zip(&polys) {
        let q = poly.as_ambiguity_set()?;
        let row = epsilon_grid
            .iter()
            .map(|eps| match kind {
                DSetKind::Primal => hs_modulus(m.ambiguity(), &q, eps, m.cap),
                DSetKind::Dual => dual_hs_modulus(m.ambiguity(), &q, eps, m.cap),
            })
            .collect::<Result<Vec<_>>>()?;
        per_market.push(row);
    }
    let uniform_delta = (0..epsilon_grid.len())
        .map(|j| {
            per_market
                .iter()
                .map(|row| row[j].clone())
                .min()
                .unwrap_or_else(crate::halmos_savage::no_qualifying_set)
        })
        .collect();
    Ok(ModulusTable {
        kind,
        epsilon_grid: epsilon_grid.to_vec(),
        per_market,
        uniform_delta,
    })
}

fn resolve_p_sequence(
    seq: &MarketSequence,
    p_seq: Option<&[ProbabilityMeasure]>,
) -> Result<Vec<ProbabilityMeasure>> {
    match p_seq {
        None => Ok(seq
            .markets
            .iter()
            .map(|m| m.ambiguity().vertices()[0].clone())
            .collect()),
        Some(ps) => {
            if ps.len() != seq.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} measures for {} markets",
                    ps.len(),
                    seq.len()
                )));
            }
            for (k, (p, m)) in ps.iter().zip(&seq.markets).enumerate() {
                m.space().expect_same(p.space())?;
                if m.ambiguity().membership_weights(p)?.is_none() {
                    return Err(Error::InvalidInput(format!(
                        "measure for market {} is not in its ambiguity set",
                        k + 1
                    )));
                }
            }
            Ok(ps.to_vec())
        }
    }
}

/// `(1 / (1 - 2^-n)) sum_{m=1}^{n} 2^-m Q^{n,m}` and its weights.
pub fn contiguous_mixture(
    components: &[ProbabilityMeasure],
) -> Result<(Vec<Rational>, ProbabilityMeasure)> {
    let n = components.len();
    let Some(first) = components.first() else {
        return Err(Error::InvalidInput("no components to mix".into()));
    };
    let norm = int(1) - pow2_neg(n as u32);
    let weights: Vec<Rational> = (1..=n as u32).map(|m| pow2_neg(m) / &norm).collect();
    let space = first.space();
    let mut mass = vec![Rational::zero(); space.len()];
    for (w, q) in weights.iter().zip(components) {
        space.expect_same(q.space())?;
        for (acc, v) in mass.iter_mut().zip(q.mass()) {
            *acc += w * v;
        }
    }
    Ok((weights, ProbabilityMeasure::new(space, mass)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContiguousEntry {
    /// 1-based market index.
    pub market: usize,
    pub p: ProbabilityMeasure,
    /// `Q^{n,m}` for `m = 1..=n`.
    pub components: Vec<HsWitness>,
    /// Weight of each component in `q`.
    pub weights: Vec<Rational>,
    pub q: ProbabilityMeasure,
    /// `q` as a mixture of the martingale polytope's vertices.
    pub vertex_weights: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContiguousSequence {
    /// `(epsilon_m, delta_m)` for `m = 1..=N`.
    pub schedule: Vec<(Rational, Rational)>,
    pub per_market: Vec<ContiguousEntry>,
}

impl ContiguousSequence {
    /// Required lower bound `2^-m eps_m delta_m / 2` on events with
    /// `P^n(A) >= 2 eps_m`.
    pub fn beta(&self, m: usize) -> Rational {
        let (eps, delta) = &self.schedule[m - 1];
        pow2_neg(m as u32) * eps * delta / int(2)
    }

    /// First `(market, m, event)` breaking a beta bound, if any.
    pub fn first_violation(
        &self,
        seq: &MarketSequence,
    ) -> Result<Option<(usize, usize, OutcomeSet)>> {
        for e in &self.per_market {
            let m = seq.market(e.market);
            let support = m.support();
            m.cap.check(support.len())?;
            let rows = vec![
                support
                    .indices()
                    .iter()
                    .map(|&w| e.p.mass()[w].clone())
                    .collect::<Vec<_>>(),
                support
                    .indices()
                    .iter()
                    .map(|&w| e.q.mass()[w].clone())
                    .collect(),
            ];
            for mi in 1..=e.market {
                let threshold = int(2) * &self.schedule[mi - 1].0;
                let beta = self.beta(mi);
                let mut bad = None;
                for_each_subset(&rows, support.len(), |mask, sums| {
                    if bad.is_none() && sums[0] >= threshold && sums[1] < beta {
                        bad = Some(mask);
                    }
                });
                if let Some(mask) = bad {
                    return Ok(Some((
                        e.market,
                        mi,
                        OutcomeSet::from_mask(mask, support.indices()),
                    )));
                }
            }
        }
        Ok(None)
    }

    /// Mixture weights, martingale membership and every beta bound.
    pub fn verify(&self, seq: &MarketSequence) -> Result<bool> {
        if self.per_market.len() != seq.len() {
            return Ok(false);
        }
        for e in &self.per_market {
            let poly = martingale_polytope(seq.market(e.market))?;
            let total = e.weights.iter().fold(Rational::zero(), |a, w| a + w);
            let (weights, q) = contiguous_mixture(
                &e.components
                    .iter()
                    .map(|c| c.q_star.clone())
                    .collect::<Vec<_>>(),
            )?;
            let vertex_sum = e.vertex_weights.iter().fold(Rational::zero(), |a, w| a + w);
            let recombined = poly.as_ambiguity_set()?.mixture(&e.vertex_weights)?;
            if !total.is_one()
                || weights != e.weights
                || q != e.q
                || !poly.contains(&e.q)
                || !vertex_sum.is_one()
                || recombined != e.q
            {
                return Ok(false);
            }
        }
        Ok(self.first_violation(seq)?.is_none())
    }
}

fn clamp_to_one(v: Rational) -> Rational {
    v.min(Rational::one())
}

/// Builds a martingale sequence `Q^n` to which `P^n` is contiguous on the
/// prefix, with `eps_m = 1/m` and `delta_m` the uniform primal modulus.
///
/// `p_seq` defaults to the first vertex of each ambiguity set.
pub fn build_contiguous_sequence(
    seq: &MarketSequence,
    p_seq: Option<&[ProbabilityMeasure]>,
) -> Result<ContiguousSequence> {
    let ps = resolve_p_sequence(seq, p_seq)?;
    let n_total = seq.len();
    let eps: Vec<Rational> = (1..=n_total as i64).map(|m| rat(1, m)).collect();
    let table = certify_moduli(seq, &eps, DSetKind::Primal)?;
    let mut schedule = Vec::with_capacity(n_total);
    for (e, d) in eps.iter().zip(&table.uniform_delta) {
        if !d.is_positive() {
            return Err(Error::HypothesisViolated(format!(
                "no uniform positive delta at epsilon {e}"
            )));
        }
        schedule.push((e.clone(), clamp_to_one(d.clone())));
    }
    let polys = seq.polytopes()?;
    let mut per_market = Vec::with_capacity(n_total);
    for (k, ((m, p), poly)) in seq.markets.iter().zip(&ps).zip(&polys).enumerate() {
        let n = k + 1;
        let q_set = poly.as_ambiguity_set()?;
        let mut components = Vec::with_capacity(n);
        for (e, d) in &schedule[..n] {
            let inst = HsInstance::new(m.ambiguity().clone(), q_set.clone(), e.clone(), d.clone())?
                .with_cap(m.cap);
            components.push(construct_hs_witness(&inst, p)?);
        }
        let (weights, q) = contiguous_mixture(
            &components
                .iter()
                .map(|c| c.q_star.clone())
                .collect::<Vec<_>>(),
        )?;
        let mut vertex_weights = vec![Rational::zero(); q_set.vertices().len()];
        for (w, c) in weights.iter().zip(&components) {
            for (acc, cw) in vertex_weights.iter_mut().zip(&c.weights) {
                *acc += w * cw;
            }
        }
        per_market.push(ContiguousEntry {
            market: n,
            p: p.clone(),
            components,
            weights,
            q,
            vertex_weights,
        });
    }
    let out = ContiguousSequence {
        schedule,
        per_market,
    };
    if let Some((n, m, set)) = out.first_violation(seq)? {
        return Err(Error::BoundViolated(format!(
            "market {n}, level {m}: event {:?} breaks the contiguity bound",
            set.indices()
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakContiguityWitness {
    pub epsilon: Rational,
    /// `epsilon / 2`, the level the dual theorem is applied at.
    pub epsilon_half: Rational,
    /// Uniform dual modulus at `epsilon / 2`, clamped to at most 1.
    pub modulus: Rational,
    /// `epsilon / 2 * modulus`.
    pub delta: Rational,
    pub p: Vec<ProbabilityMeasure>,
    pub per_market: Vec<HsWitness>,
}

impl WeakContiguityWitness {
    /// First `(market, event)` with `P^n(A) < delta` but `Q^n(A) >= epsilon`.
    pub fn first_violation(&self, seq: &MarketSequence) -> Result<Option<(usize, OutcomeSet)>> {
        for (k, (w, p)) in self.per_market.iter().zip(&self.p).enumerate() {
            let m = seq.market(k + 1);
            let support = m.support();
            m.cap.check(support.len())?;
            let rows = vec![
                support
                    .indices()
                    .iter()
                    .map(|&i| p.mass()[i].clone())
                    .collect::<Vec<_>>(),
                support
                    .indices()
                    .iter()
                    .map(|&i| w.q_star.mass()[i].clone())
                    .collect(),
            ];
            let mut bad = None;
            for_each_subset(&rows, support.len(), |mask, sums| {
                if bad.is_none() && sums[0] < self.delta && sums[1] >= self.epsilon {
                    bad = Some(mask);
                }
            });
            if let Some(mask) = bad {
                return Ok(Some((
                    k + 1,
                    OutcomeSet::from_mask(mask, support.indices()),
                )));
            }
        }
        Ok(None)
    }

    pub fn verify(&self, seq: &MarketSequence) -> Result<bool> {
        if self.per_market.len() != seq.len() || self.p.len() != seq.len() {
            return Ok(false);
        }
        for (k, w) in self.per_market.iter().enumerate() {
            let poly = martingale_polytope(seq.market(k + 1))?;
            if !poly.contains(&w.q_star) || w.for_p != self.p[k] {
                return Ok(false);
            }
        }
        Ok(self.delta == &self.epsilon_half * &self.modulus
            && self.delta.is_positive()
            && self.first_violation(seq)?.is_none())
    }
}

/// Per-market martingale measures `Q^{n,eps}` with `P^n(A) < delta` implying
/// `Q^{n,eps}(A) < eps`, using the dual theorem at `eps / 2`.
pub fn weak_contiguity_witness(
    seq: &MarketSequence,
    p_seq: Option<&[ProbabilityMeasure]>,
    epsilon: &Rational,
) -> Result<WeakContiguityWitness> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let ps = resolve_p_sequence(seq, p_seq)?;
    let half = epsilon / int(2);
    let table = certify_moduli(seq, std::slice::from_ref(&half), DSetKind::Dual)?;
    let modulus = clamp_to_one(
        table
            .uniform_delta
            .first()
            .cloned()
            .unwrap_or_else(crate::halmos_savage::no_qualifying_set),
    );
    if !modulus.is_positive() {
        return Err(Error::HypothesisViolated(format!(
            "the dual modulus at {half} vanishes on some market"
        )));
    }
    let polys = seq.polytopes()?;
    let mut per_market = Vec::with_capacity(seq.len());
    for ((m, p), poly) in seq.markets.iter().zip(&ps).zip(&polys) {
        let q_set: AmbiguitySet = poly.as_ambiguity_set()?;
        let inst = HsInstance::new(m.ambiguity().clone(), q_set, half.clone(), modulus.clone())?
            .with_cap(m.cap);
        per_market.push(construct_dual_hs_witness(&inst, p)?);
    }
    let out = WeakContiguityWitness {
        epsilon: epsilon.clone(),
        delta: &half * &modulus,
        epsilon_half: half,
        modulus,
        p: ps,
        per_market,
    };
    if let Some((n, set)) = out.first_violation(seq)? {
        return Err(Error::BoundViolated(format!(
            "market {n}: event {:?} breaks weak contiguity",
            set.indices()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::SampleSpace;

    /// Two-outcome market with increments `(up, down)` for one asset.
    pub(crate) fn binary(up: Rational, down: Rational, ambiguity: Vec<Vec<Rational>>) -> Market {
        let space = SampleSpace::numbered(2).unwrap();
        let amb = AmbiguitySet::from_masses(&space, ambiguity).unwrap();
        Market::new(
            &space,
            vec![int(1)],
            vec![vec![int(1) + up], vec![int(1) + down]],
            amb,
        )
        .unwrap()
    }

    fn half() -> Vec<Vec<Rational>> {
        vec![vec![rat(1, 2), rat(1, 2)]]
    }

    fn vanishing(n: i64) -> MarketSequence {
        MarketSequence::new(
            (1..=n)
                .map(|k| binary(int(1), rat(-1, k), half()))
                .collect(),
        )
        .unwrap()
    }

    fn symmetric(n: i64) -> MarketSequence {
        MarketSequence::new((1..=n).map(|_| binary(int(1), int(-1), half())).collect()).unwrap()
    }

    #[test]
    fn aa1_found_on_vanishing_downside() {
        let seq = vanishing(20);
        let w = scan_aa1(&seq, &default_grid(), &default_c_schedule(20))
            .unwrap()
            .unwrap();
        assert_eq!(w.alpha, rat(1, 2));
        assert!(w.verify(&seq));
        for (k, e) in w.entries.iter().enumerate() {
            assert_eq!(e.market, k + 1);
            assert_eq!(e.probability, rat(1, 2));
        }
        for (n, (worst, bound)) in w.martingale_bounds(&seq).unwrap().into_iter().enumerate() {
            assert_eq!(worst, rat(1, n as i64 + 2));
            assert!(worst <= bound);
        }
    }

    #[test]
    fn aa1_absent_on_symmetric_family() {
        let seq = symmetric(20);
        assert!(scan_aa1(&seq, &default_grid(), &default_c_schedule(20))
            .unwrap()
            .is_none());
        let empty = MarketSequence::new(vec![]).unwrap();
        assert!(scan_aa1(&empty, &default_grid(), &default_c_schedule(3))
            .unwrap()
            .is_none());
    }

    #[test]
    fn aa2_found_with_concentrating_ambiguity() {
        let markets = (1..=12)
            .map(|n| {
                let a = int(1) - rat(1, n);
                let b = rat(1, n);
                binary(
                    int(1),
                    int(-1),
                    vec![vec![a.clone(), b.clone()], vec![b, a]],
                )
            })
            .collect();
        let seq = MarketSequence::new(markets).unwrap();
        let w = scan_aa2(&seq, &[int(1)], &default_target_levels(6))
            .unwrap()
            .unwrap();
        assert!(w.verify(&seq));
        assert_eq!(w.alpha, int(1));
        for (p, t) in w.probabilities().iter().zip(&w.target_levels) {
            assert!(p >= t);
        }
    }

    #[test]
    fn aa2_absent_on_symmetric_family() {
        let seq = symmetric(20);
        assert!(scan_aa2(&seq, &default_grid(), &default_target_levels(20))
            .unwrap()
            .is_none());
    }

    #[test]
    fn single_market_aa2_with_dirac_vertex() {
        let seq = MarketSequence::new(vec![binary(
            int(1),
            int(-1),
            vec![vec![int(1), int(0)], vec![rat(1, 2), rat(1, 2)]],
        )])
        .unwrap();
        let w = scan_aa2(&seq, &default_grid(), &[int(1)]).unwrap().unwrap();
        assert_eq!(w.entries.len(), 1);
        assert!(w.verify(&seq));
    }

    #[test]
    fn moduli_on_symmetric_and_vanishing_families() {
        let t = certify_moduli(&symmetric(20), &default_grid(), DSetKind::Primal).unwrap();
        assert!(t.uniform_delta.iter().all(|d| *d == rat(1, 2)));
        assert!(t.certifies());

        let t = certify_moduli(&vanishing(8), &[rat(1, 2)], DSetKind::Primal).unwrap();
        for (n, row) in t.per_market.iter().enumerate() {
            assert_eq!(row[0], rat(1, n as i64 + 2));
        }
        assert_eq!(t.uniform_delta[0], rat(1, 9));
    }

    #[test]
    fn single_market_with_q_equal_p() {
        // Zero increments make every measure a martingale measure.
        let seq = MarketSequence::new(vec![binary(
            int(0),
            int(0),
            vec![vec![rat(1, 3), rat(2, 3)]],
        )])
        .unwrap();
        for kind in [DSetKind::Primal, DSetKind::Dual] {
            let t = certify_moduli(&seq, &default_grid(), kind).unwrap();
            for (d, e) in t.uniform_delta.iter().zip(&t.epsilon_grid) {
                assert!(d >= e);
            }
        }
    }

    #[test]
    fn mixture_weights() {
        let space = SampleSpace::numbered(2).unwrap();
        let q = ProbabilityMeasure::new(&space, vec![rat(1, 3), rat(2, 3)]).unwrap();
        let (w, mix) = contiguous_mixture(&[q.clone(), q.clone(), q.clone()]).unwrap();
        assert_eq!(w.iter().fold(Rational::zero(), |a, b| a + b), int(1));
        assert_eq!(mix, q);
        let (_, mix) = contiguous_mixture(&[
            ProbabilityMeasure::dirac(&space, 0),
            ProbabilityMeasure::dirac(&space, 1),
        ])
        .unwrap();
        assert_eq!(mix.mass(), &[rat(2, 3), rat(1, 3)]);
    }

    #[test]
    fn contiguous_sequence_on_symmetric_family() {
        let seq = symmetric(6);
        let c = build_contiguous_sequence(&seq, None).unwrap();
        assert!(c.verify(&seq).unwrap());
        assert!(c.per_market[0].components[0].vacuous);
        for e in &c.per_market {
            assert_eq!(e.q.mass(), &[rat(1, 2), rat(1, 2)]);
        }
    }

    #[test]
    fn weak_contiguity_examples() {
        let seq = symmetric(5);
        for eps in [rat(1, 10), rat(1, 2), int(1), int(3)] {
            let w = weak_contiguity_witness(&seq, None, &eps).unwrap();
            assert!(w.verify(&seq).unwrap());
            assert!(w.delta <= eps);
            for q in &w.per_market {
                assert_eq!(q.q_star.mass(), &[rat(1, 2), rat(1, 2)]);
            }
        }
    }

    #[test]
    fn sequence_rejects_arbitrage() {
        let err = MarketSequence::new(vec![binary(int(1), int(0), half())]).unwrap_err();
        assert!(matches!(err, Error::NaViolated(_)));
    }

    #[test]
    fn schedules_validated() {
        let seq = symmetric(2);
        assert!(scan_aa1(&seq, &default_grid(), &[int(1), int(1)]).is_err());
        assert!(scan_aa2(&seq, &default_grid(), &[rat(3, 4), rat(1, 2)]).is_err());
        assert!(scan_aa1(&seq, &[int(0)], &[int(1)]).is_err());
    }
}
