//! Commands on finite prefixes of market sequences.

use super::single::join;
use crate::cert::{Checked, Inputs, Procedure, Rel, Transcript};
use crate::checks::*;
use crate::error::{CliError, CliResult};
use crate::files::{rats, unrat, unrat2, Rat};
use num_traits::{One, Zero};
use robust_ftap::halmos_savage::{no_qualifying_set, DSetKind};
use robust_ftap::large_market::{
    build_contiguous_sequence, certify_moduli, scan_aa1, scan_aa2, weak_contiguity_witness,
    AaEntry, MarketSequence,
};
use robust_ftap::market::{martingale_polytope, Market};
use robust_ftap::rational::{int, pow2_neg, rat};
use robust_ftap::Rational;
use serde::{Deserialize, Serialize};

fn markets(inputs: &Inputs) -> CliResult<Vec<Market>> {
    let seq = inputs.sequence()?;
    if seq.markets.is_empty() {
        return Err(CliError::input("field `markets`: the sequence is empty"));
    }
    seq.markets
        .iter()
        .enumerate()
        .map(|(k, mf)| {
            mf.to_market(inputs.cap())
                .map_err(|e| CliError::input(format!("markets[{k}]: {e}")))
        })
        .collect()
}

fn sequence(inputs: &Inputs) -> CliResult<MarketSequence> {
    Ok(MarketSequence::new(markets(inputs)?)?)
}

fn grid(v: &Option<Vec<Rat>>, field: &str) -> CliResult<Vec<Rational>> {
    v.as_ref()
        .map(|g| unrat(g))
        .ok_or_else(|| CliError::input(format!("missing required input `{field}`")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    /// 1-based market index.
    pub market: usize,
    pub h: Vec<Rat>,
    pub event: Vec<String>,
    /// Index of the prior vertex used as `P^k`.
    pub p_vertex: usize,
    pub probability: Rat,
}

fn entry_json(seq: &MarketSequence, e: AaEntry) -> EntryJson {
    let m = seq.market(e.market);
    EntryJson {
        market: e.market,
        h: rats(&e.h),
        event: labels(m.space(), &e.event),
        p_vertex: e.p_vertex,
        probability: e.probability.into(),
    }
}

/// Claims for one selected market; `floor` bounds losses from below.
fn entry_claims(
    t: &mut Transcript,
    ms: &[Market],
    k: usize,
    e: &EntryJson,
    prev: Option<&EntryJson>,
    alpha: &Rational,
    floor: &Rational,
) -> CliResult<()> {
    if e.market == 0 || e.market > ms.len() {
        return Err(bad_witness(format!(
            "market index {} out of range",
            e.market
        )));
    }
    if let Some(p) = prev {
        t.claim(
            format!("n_{} > n_{}", k, k - 1),
            &int(e.market as i64),
            Rel::Gt,
            &int(p.market as i64),
        );
    }
    let m = &ms[e.market - 1];
    let space = m.space();
    let p = m
        .ambiguity()
        .vertices()
        .get(e.p_vertex)
        .ok_or_else(|| bad_witness("prior vertex index out of range"))?;
    let h = unrat(&e.h);
    expect_len(&h, m.num_assets(), "strategy")?;
    let tag = format!("k={k}, n={}", e.market);
    box_claims(t, &format!("{tag}: H"), &h);
    for &w in m.support().indices() {
        t.claim(
            format!("{tag}: X({}) >= -floor", space.label(w)),
            &gain(m, &h, w),
            Rel::Ge,
            &-floor.clone(),
        );
    }
    let event = set_from_labels(space, &e.event)?;
    for &w in event.indices() {
        t.claim(
            format!("{tag}: X({}) >= alpha", space.label(w)),
            &gain(m, &h, w),
            Rel::Ge,
            alpha,
        );
    }
    let good = robust_ftap::measures::OutcomeSet::new(
        (0..space.len()).filter(|&w| gain(m, &h, w) >= *alpha),
    );
    t.claim(
        format!("{tag}: P(X >= alpha)"),
        &mass_of(p.mass(), &good),
        Rel::Eq,
        &e.probability.0,
    );
    Ok(())
}

fn markets_list(entries: &[EntryJson]) -> String {
    let v: Vec<String> = entries.iter().map(|e| e.market.to_string()).collect();
    v.join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aa1Json {
    pub alpha: Rat,
    pub c: Vec<Rat>,
    pub entries: Vec<EntryJson>,
}

pub struct ScanAa1;

impl Procedure for ScanAa1 {
    const NAME: &'static str = "scan-aa1";
    const FINITE_HORIZON: bool = true;
    type Witness = Option<Aa1Json>;

    fn compute(inputs: &Inputs) -> CliResult<Option<Aa1Json>> {
        let seq = sequence(inputs)?;
        let w = scan_aa1(
            &seq,
            &grid(&inputs.alpha_grid, "alpha_grid")?,
            &grid(&inputs.schedule, "schedule")?,
        )?;
        Ok(w.map(|w| Aa1Json {
            alpha: w.alpha.into(),
            c: rats(&w.c),
            entries: w.entries.into_iter().map(|e| entry_json(&seq, e)).collect(),
        }))
    }

    fn check(inputs: &Inputs, w: &Option<Aa1Json>) -> CliResult<Checked> {
        let ms = markets(inputs)?;
        let Some(w) = w else {
            return Ok(Checked {
                verdict: format!(
                    "no asymptotic arbitrage of the first kind found on {} markets",
                    ms.len()
                ),
                transcript: Vec::new(),
            });
        };
        let alpha = &w.alpha.0;
        let c = unrat(&w.c);
        expect_len(&c, w.entries.len(), "c")?;
        if w.entries.is_empty() {
            return Err(bad_witness("no entries"));
        }
        let mut t = Transcript::default();
        t.claim("alpha > 0", alpha, Rel::Gt, &Rational::zero());
        for (k, (e, ck)) in w.entries.iter().zip(&c).enumerate() {
            t.claim(format!("c_{} > 0", k + 1), ck, Rel::Gt, &Rational::zero());
            if k > 0 {
                t.claim(format!("c_{} < c_{}", k + 1, k), ck, Rel::Lt, &c[k - 1]);
            }
            let prev = k.checked_sub(1).map(|j| &w.entries[j]);
            entry_claims(&mut t, &ms, k + 1, e, prev, alpha, ck)?;
            t.claim(
                format!("k={}: P(X >= alpha) >= alpha", k + 1),
                &e.probability.0,
                Rel::Ge,
                alpha,
            );
        }
        Ok(Checked {
            verdict: format!(
                "asymptotic arbitrage of the first kind with alpha {alpha} along markets {}",
                markets_list(&w.entries)
            ),
            transcript: t.0,
        })
    }

    fn notes(inputs: &Inputs, w: &Option<Aa1Json>) -> CliResult<Vec<String>> {
        let Some(w) = w else {
            return Ok(Vec::new());
        };
        let ms = markets(inputs)?;
        let mut out = Vec::new();
        for (e, c) in w.entries.iter().zip(&w.c) {
            let m = &ms[e.market - 1];
            let h = unrat(&e.h);
            let good = robust_ftap::measures::OutcomeSet::new(
                (0..m.space().len()).filter(|&o| gain(m, &h, o) >= w.alpha.0),
            );
            let poly = martingale_polytope(m)?;
            if let Some(worst) = poly.vertices().iter().map(|q| q.prob(&good)).max() {
                out.push(format!(
                    "market {}: max_Q Q(X >= alpha) = {} <= c/alpha = {}",
                    e.market,
                    worst,
                    &c.0 / &w.alpha.0
                ));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aa2Json {
    pub alpha: Rat,
    pub target_levels: Vec<Rat>,
    pub entries: Vec<EntryJson>,
}

pub struct ScanAa2;

impl Procedure for ScanAa2 {
    const NAME: &'static str = "scan-aa2";
    const FINITE_HORIZON: bool = true;
    type Witness = Option<Aa2Json>;

    fn compute(inputs: &Inputs) -> CliResult<Option<Aa2Json>> {
        let seq = sequence(inputs)?;
        let w = scan_aa2(
            &seq,
            &grid(&inputs.alpha_grid, "alpha_grid")?,
            &grid(&inputs.schedule, "schedule")?,
        )?;
        Ok(w.map(|w| Aa2Json {
            alpha: w.alpha.into(),
            target_levels: rats(&w.target_levels),
            entries: w.entries.into_iter().map(|e| entry_json(&seq, e)).collect(),
        }))
    }

    fn check(inputs: &Inputs, w: &Option<Aa2Json>) -> CliResult<Checked> {
        let ms = markets(inputs)?;
        let Some(w) = w else {
            return Ok(Checked {
                verdict: format!(
                    "no asymptotic arbitrage of the second kind found on {} markets",
                    ms.len()
                ),
                transcript: Vec::new(),
            });
        };
        let alpha = &w.alpha.0;
        let tau = unrat(&w.target_levels);
        expect_len(&tau, w.entries.len(), "target_levels")?;
        if w.entries.is_empty() {
            return Err(bad_witness("no entries"));
        }
        let mut t = Transcript::default();
        t.claim("alpha > 0", alpha, Rel::Gt, &Rational::zero());
        for (k, (e, tk)) in w.entries.iter().zip(&tau).enumerate() {
            t.claim(format!("tau_{} > 0", k + 1), tk, Rel::Gt, &Rational::zero());
            t.claim(format!("tau_{} <= 1", k + 1), tk, Rel::Le, &Rational::one());
            if k > 0 {
                t.claim(
                    format!("tau_{} >= tau_{}", k + 1, k),
                    tk,
                    Rel::Ge,
                    &tau[k - 1],
                );
            }
            let prev = k.checked_sub(1).map(|j| &w.entries[j]);
            entry_claims(&mut t, &ms, k + 1, e, prev, alpha, &Rational::one())?;
            t.claim(
                format!("k={}: P(X >= alpha) >= tau", k + 1),
                &e.probability.0,
                Rel::Ge,
                tk,
            );
        }
        Ok(Checked {
            verdict: format!(
                "asymptotic arbitrage of the second kind with alpha {alpha} along markets {}",
                markets_list(&w.entries)
            ),
            transcript: t.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusTableJson {
    /// Martingale polytope vertices per market.
    pub martingale_vertices: Vec<Vec<Vec<Rat>>>,
    /// `per_market[n-1][j]`: modulus of market `n` at grid point `j`.
    pub per_market: Vec<Vec<Rat>>,
    pub uniform_delta: Vec<Rat>,
}

fn compute_table(inputs: &Inputs, kind: DSetKind) -> CliResult<ModulusTableJson> {
    let seq = sequence(inputs)?;
    let g = grid(&inputs.epsilon_grid, "epsilon_grid")?;
    let table = certify_moduli(&seq, &g, kind)?;
    let mut vertices = Vec::new();
    for m in seq.markets() {
        let poly = martingale_polytope(m)?;
        vertices.push(poly.vertices().iter().map(|q| rats(q.mass())).collect());
    }
    Ok(ModulusTableJson {
        martingale_vertices: vertices,
        per_market: table.per_market.iter().map(|r| rats(r)).collect(),
        uniform_delta: rats(&table.uniform_delta),
    })
}

fn check_table(inputs: &Inputs, w: &ModulusTableJson, kind: DSetKind) -> CliResult<Checked> {
    let ms = markets(inputs)?;
    let g = grid(&inputs.epsilon_grid, "epsilon_grid")?;
    if g.is_empty() {
        return Err(CliError::input("field `epsilon_grid`: empty grid"));
    }
    expect_len(&w.martingale_vertices, ms.len(), "martingale_vertices")?;
    expect_len(&w.per_market, ms.len(), "per_market")?;
    expect_len(&w.uniform_delta, g.len(), "uniform_delta")?;
    let mut t = Transcript::default();
    for (n, (m, (qs, row))) in ms
        .iter()
        .zip(w.martingale_vertices.iter().zip(&w.per_market))
        .enumerate()
    {
        let n = n + 1;
        if qs.is_empty() {
            return Err(bad_witness(format!(
                "market {n} has no martingale vertices"
            )));
        }
        expect_len(row, g.len(), "modulus row")?;
        let qv = unrat2(qs);
        for (j, q) in qv.iter().enumerate() {
            martingale_claims(&mut t, &format!("Q^({n},{})", j + 1), q, m, false)?;
        }
        let pv: Vec<Vec<Rational>> = m
            .ambiguity()
            .vertices()
            .iter()
            .map(|p| p.mass().to_vec())
            .collect();
        for (eps, stored) in g.iter().zip(row) {
            let value = modulus_event(&pv, &qv, &m.support(), m.cap, kind, eps)?
                .map(|e| e.0)
                .unwrap_or_else(no_qualifying_set);
            t.claim(
                format!("market {n}: modulus at eps {eps}"),
                &value,
                Rel::Eq,
                &stored.0,
            );
        }
    }
    let mut first_gap = None;
    for (j, (eps, u)) in g.iter().zip(&w.uniform_delta).enumerate() {
        let min = w
            .per_market
            .iter()
            .map(|r| r[j].0.clone())
            .min()
            .expect("nonempty sequence");
        t.claim(format!("uniform modulus at eps {eps}"), &min, Rel::Eq, &u.0);
        if u.0 > Rational::zero() {
            t.claim(
                format!("uniform modulus at eps {eps} > 0"),
                &u.0,
                Rel::Gt,
                &Rational::zero(),
            );
        } else {
            t.claim(
                format!("uniform modulus at eps {eps} <= 0"),
                &u.0,
                Rel::Le,
                &Rational::zero(),
            );
            first_gap.get_or_insert(eps.clone());
        }
    }
    let label = match kind {
        DSetKind::Primal => "NAA1",
        DSetKind::Dual => "NAA2",
    };
    let smallest = w
        .uniform_delta
        .iter()
        .map(|u| u.0.clone())
        .min()
        .expect("nonempty grid");
    let verdict = match first_gap {
        None => format!(
            "{label} moduli positive on {} markets at every grid point (smallest uniform delta {smallest})",
            ms.len()
        ),
        Some(eps) => format!("{label} moduli vanish on {} markets at eps {eps}", ms.len()),
    };
    Ok(Checked {
        verdict,
        transcript: t.0,
    })
}

fn table_notes(inputs: &Inputs, w: &ModulusTableJson) -> CliResult<Vec<String>> {
    let g = grid(&inputs.epsilon_grid, "epsilon_grid")?;
    Ok(g.iter()
        .zip(&w.uniform_delta)
        .map(|(e, u)| format!("eps {e}: uniform delta {}", u.0))
        .collect())
}

pub struct CertifyNaa1;

impl Procedure for CertifyNaa1 {
    const NAME: &'static str = "certify-naa1";
    const FINITE_HORIZON: bool = true;
    type Witness = ModulusTableJson;

    fn compute(inputs: &Inputs) -> CliResult<ModulusTableJson> {
        compute_table(inputs, DSetKind::Primal)
    }

    fn check(inputs: &Inputs, w: &ModulusTableJson) -> CliResult<Checked> {
        check_table(inputs, w, DSetKind::Primal)
    }

    fn notes(inputs: &Inputs, w: &ModulusTableJson) -> CliResult<Vec<String>> {
        table_notes(inputs, w)
    }
}

pub struct CertifyNaa2;

impl Procedure for CertifyNaa2 {
    const NAME: &'static str = "certify-naa2";
    const FINITE_HORIZON: bool = true;
    type Witness = ModulusTableJson;

    fn compute(inputs: &Inputs) -> CliResult<ModulusTableJson> {
        compute_table(inputs, DSetKind::Dual)
    }

    fn check(inputs: &Inputs, w: &ModulusTableJson) -> CliResult<Checked> {
        check_table(inputs, w, DSetKind::Dual)
    }

    fn notes(inputs: &Inputs, w: &ModulusTableJson) -> CliResult<Vec<String>> {
        table_notes(inputs, w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelJson {
    pub epsilon: Rat,
    pub delta: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContiguousJson {
    pub market: usize,
    pub p_vertex: usize,
    /// `Q^{n,m}` for `m = 1..=n`.
    pub components: Vec<Vec<Rat>>,
    pub weights: Vec<Rat>,
    pub q: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContiguousWitness {
    pub schedule: Vec<LevelJson>,
    pub per_market: Vec<ContiguousJson>,
}

pub struct BuildContiguous;

impl Procedure for BuildContiguous {
    const NAME: &'static str = "build-contiguous";
    const FINITE_HORIZON: bool = true;
    type Witness = ContiguousWitness;

    fn compute(inputs: &Inputs) -> CliResult<ContiguousWitness> {
        let seq = sequence(inputs)?;
        let c = build_contiguous_sequence(&seq, None)?;
        Ok(ContiguousWitness {
            schedule: c
                .schedule
                .iter()
                .map(|(e, d)| LevelJson {
                    epsilon: e.into(),
                    delta: d.into(),
                })
                .collect(),
            per_market: c
                .per_market
                .iter()
                .map(|e| ContiguousJson {
                    market: e.market,
                    p_vertex: 0,
                    components: e.components.iter().map(|w| rats(w.q_star.mass())).collect(),
                    weights: rats(&e.weights),
                    q: rats(e.q.mass()),
                })
                .collect(),
        })
    }

    fn check(inputs: &Inputs, w: &ContiguousWitness) -> CliResult<Checked> {
        let ms = markets(inputs)?;
        let n_total = ms.len();
        expect_len(&w.schedule, n_total, "schedule")?;
        expect_len(&w.per_market, n_total, "per_market")?;
        let mut t = Transcript::default();
        let two = two();
        let mut beta = Vec::with_capacity(n_total);
        for (m, level) in w.schedule.iter().enumerate() {
            let m = m + 1;
            t.claim(
                format!("eps_{m} == 1/{m}"),
                &level.epsilon.0,
                Rel::Eq,
                &rat(1, m as i64),
            );
            t.claim(
                format!("delta_{m} > 0"),
                &level.delta.0,
                Rel::Gt,
                &Rational::zero(),
            );
            t.claim(
                format!("delta_{m} <= 1"),
                &level.delta.0,
                Rel::Le,
                &Rational::one(),
            );
            beta.push(pow2_neg(m as u32) * &level.epsilon.0 * &level.delta.0 / &two);
        }
        for (k, (e, mk)) in w.per_market.iter().zip(&ms).enumerate() {
            let n = k + 1;
            if e.market != n {
                return Err(bad_witness("per_market entries must be in market order"));
            }
            let space = mk.space();
            let p = mk
                .ambiguity()
                .vertices()
                .get(e.p_vertex)
                .ok_or_else(|| bad_witness("prior vertex index out of range"))?;
            expect_len(&e.components, n, "components")?;
            let comps = unrat2(&e.components);
            let weights = unrat(&e.weights);
            let q = unrat(&e.q);
            let norm = Rational::one() - pow2_neg(n as u32);
            expect_len(&weights, n, "weights")?;
            for (m, wm) in weights.iter().enumerate() {
                t.claim(
                    format!("n={n}: weight {} == 2^-{}/(1-2^-{n})", m + 1, m + 1),
                    wm,
                    Rel::Eq,
                    &(pow2_neg(m as u32 + 1) / &norm),
                );
            }
            for c in &comps {
                expect_len(c, space.len(), "component")?;
            }
            mixture_claims(&mut t, &format!("Q^{n}"), &weights, &comps, &q, space)?;
            martingale_claims(&mut t, &format!("Q^{n}"), &q, mk, false)?;
            let support = mk.support();
            for m in 1..=n {
                let threshold = &two * &w.schedule[m - 1].epsilon.0;
                let best = extremal_event(
                    &[p.mass(), &q],
                    &support,
                    mk.cap,
                    true,
                    |s| s[0] >= threshold,
                    |s| s[1].clone(),
                )?;
                match best {
                    Some((v, _)) => t.claim(
                        format!(
                            "n={n}, m={m}: min Q^n(A) over P^n(A) >= 2 eps_m is at least beta_m"
                        ),
                        &v,
                        Rel::Ge,
                        &beta[m - 1],
                    ),
                    None => t.claim(
                        format!("n={n}, m={m}: P^n(Omega) < 2 eps_m"),
                        &mass_of(p.mass(), &support),
                        Rel::Lt,
                        &threshold,
                    ),
                }
            }
        }
        Ok(Checked {
            verdict: format!("contiguous martingale sequence built on {n_total} markets"),
            transcript: t.0,
        })
    }

    fn notes(_: &Inputs, w: &ContiguousWitness) -> CliResult<Vec<String>> {
        Ok(w.per_market
            .iter()
            .map(|e| format!("Q^{} = {}", e.market, join(&e.q)))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakEntryJson {
    pub market: usize,
    pub p_vertex: usize,
    pub q: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakWitness {
    pub epsilon_half: Rat,
    pub modulus: Rat,
    pub delta: Rat,
    pub per_market: Vec<WeakEntryJson>,
}

pub struct WeakContiguity;

impl Procedure for WeakContiguity {
    const NAME: &'static str = "weak-contiguity";
    const FINITE_HORIZON: bool = true;
    type Witness = WeakWitness;

    fn compute(inputs: &Inputs) -> CliResult<WeakWitness> {
        let seq = sequence(inputs)?;
        let w = weak_contiguity_witness(&seq, None, &inputs.epsilon()?)?;
        Ok(WeakWitness {
            epsilon_half: w.epsilon_half.into(),
            modulus: w.modulus.into(),
            delta: w.delta.into(),
            per_market: w
                .per_market
                .iter()
                .enumerate()
                .map(|(k, h)| WeakEntryJson {
                    market: k + 1,
                    p_vertex: 0,
                    q: rats(h.q_star.mass()),
                })
                .collect(),
        })
    }

    fn check(inputs: &Inputs, w: &WeakWitness) -> CliResult<Checked> {
        let ms = markets(inputs)?;
        let eps = inputs.epsilon()?;
        expect_len(&w.per_market, ms.len(), "per_market")?;
        let mut t = Transcript::default();
        t.claim(
            "epsilon_half == eps / 2",
            &w.epsilon_half.0,
            Rel::Eq,
            &(&eps / two()),
        );
        t.claim("modulus > 0", &w.modulus.0, Rel::Gt, &Rational::zero());
        t.claim("modulus <= 1", &w.modulus.0, Rel::Le, &Rational::one());
        t.claim(
            "delta == epsilon_half * modulus",
            &w.delta.0,
            Rel::Eq,
            &(&w.epsilon_half.0 * &w.modulus.0),
        );
        for (k, (e, m)) in w.per_market.iter().zip(&ms).enumerate() {
            let n = k + 1;
            if e.market != n {
                return Err(bad_witness("per_market entries must be in market order"));
            }
            let p = m
                .ambiguity()
                .vertices()
                .get(e.p_vertex)
                .ok_or_else(|| bad_witness("prior vertex index out of range"))?;
            let q = unrat(&e.q);
            martingale_claims(&mut t, &format!("Q^{n}"), &q, m, false)?;
            let best = extremal_event(
                &[p.mass(), &q],
                &m.support(),
                m.cap,
                false,
                |s| s[0] < w.delta.0,
                |s| s[1].clone(),
            )?
            .ok_or_else(|| bad_witness("the empty event always qualifies"))?;
            t.claim(
                format!("n={n}: max Q^n(A) over P^n(A) < delta is below eps"),
                &best.0,
                Rel::Lt,
                &eps,
            );
        }
        Ok(Checked {
            verdict: format!(
                "P^n(A) < {} implies Q^n(A) < {eps} on all {} markets",
                w.delta.0,
                ms.len()
            ),
            transcript: t.0,
        })
    }
}
