//! Halmos-Savage commands over a pair of ambiguity sets.
//!
//! A market input is reduced to the pair (ambiguity set, martingale
//! polytope); the market is kept in the inputs and every `Q` vertex carries
//! martingale claims.

use crate::cert::{Checked, Inputs, Procedure, Rel, Transcript};
use crate::checks::*;
use crate::error::{CliError, CliResult};
use crate::files::{rats, unrat, unrat2, MarketFile, PairFile, Rat};
use num_traits::{One, Zero};
use robust_ftap::halmos_savage::{
    check_hypothesis_dual, check_hypothesis_primal, construct_dual_hs_witness,
    construct_hs_witness, dual_hs_modulus, hs_modulus, no_qualifying_set, DSetKind, HsInstance,
    HypothesisCheck,
};
use robust_ftap::market::martingale_polytope;
use robust_ftap::measures::{quasi_sure_support, AmbiguitySet, OutcomeSet, SampleSpace};
use robust_ftap::rational::sum;
use robust_ftap::{EnumerationCap, Rational};
use serde::{Deserialize, Serialize};

/// Pair induced by a market: its ambiguity set and its martingale polytope.
pub fn pair_from_market(mf: &MarketFile, cap: EnumerationCap) -> CliResult<PairFile> {
    let m = mf.to_market(cap)?;
    let poly = martingale_polytope(&m)?;
    if poly.is_empty() {
        return Err(CliError::input(
            "the market has no martingale measure, so Q would be empty",
        ));
    }
    Ok(PairFile {
        outcomes: mf.outcomes.clone(),
        p_vertices: mf.ambiguity_vertices.clone(),
        q_vertices: poly.vertices().iter().map(|q| rats(q.mass())).collect(),
        max_enum: mf.max_enum,
    })
}

struct PairCtx {
    space: SampleSpace,
    p: AmbiguitySet,
    q: AmbiguitySet,
    pv: Vec<Vec<Rational>>,
    qv: Vec<Vec<Rational>>,
    support: OutcomeSet,
    cap: EnumerationCap,
}

impl PairCtx {
    fn new(inputs: &Inputs) -> CliResult<Self> {
        let pair = inputs.pair()?;
        let (p, q) = pair.sets()?;
        Ok(PairCtx {
            space: p.space().clone(),
            support: quasi_sure_support(&p),
            pv: unrat2(&pair.p_vertices),
            qv: unrat2(&pair.q_vertices),
            cap: pair.max_enum.map(EnumerationCap).unwrap_or(inputs.cap()),
            p,
            q,
        })
    }

    fn instance(&self, eps: Rational, delta: Rational) -> CliResult<HsInstance> {
        Ok(HsInstance::new(self.p.clone(), self.q.clone(), eps, delta)?.with_cap(self.cap))
    }

    fn rows(&self) -> Vec<&[Rational]> {
        self.pv
            .iter()
            .chain(&self.qv)
            .map(|v| v.as_slice())
            .collect()
    }

    fn split<'a>(&self, sums: &'a [Rational]) -> (&'a [Rational], &'a [Rational]) {
        sums.split_at(self.pv.len())
    }

    fn event(&self, labels_: &[String]) -> CliResult<OutcomeSet> {
        let set = set_from_labels(&self.space, labels_)?;
        if !set.is_subset(&self.support) {
            return Err(bad_witness("event leaves the quasi-sure support of P"));
        }
        Ok(set)
    }

    /// When the pair came from a market, ties it back to that market.
    fn source_claims(&self, t: &mut Transcript, inputs: &Inputs) -> CliResult<()> {
        let Some(mf) = &inputs.market else {
            return Ok(());
        };
        let pair = inputs.pair()?;
        if mf.outcomes != pair.outcomes || mf.ambiguity_vertices != pair.p_vertices {
            return Err(CliError::input("pair does not match its source market"));
        }
        let m = mf.to_market(inputs.cap())?;
        for (k, q) in self.qv.iter().enumerate() {
            martingale_claims(t, &format!("Q^{}", k + 1), q, &m, false)?;
        }
        Ok(())
    }
}

fn max_of(v: &[Rational]) -> Rational {
    v.iter().max().cloned().unwrap_or_else(Rational::zero)
}

fn min_of(v: &[Rational]) -> Rational {
    v.iter().min().cloned().unwrap_or_else(Rational::zero)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypJson {
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_set: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_value: Option<Rat>,
}

fn hyp_json(space: &SampleSpace, h: HypothesisCheck) -> HypJson {
    HypJson {
        holds: h.holds,
        worst_set: h.worst_set.map(|s| labels(space, &s)),
        worst_value: h.worst_value.map(Rat),
    }
}

/// Primal: events with `max_P P(A) >= eps` have `max_Q Q(A) >= delta`.
/// Dual: events with `min_P P(A) < delta` have `min_Q Q(A) < eps`.
fn hyp_claims(
    t: &mut Transcript,
    ctx: &PairCtx,
    kind: DSetKind,
    eps: &Rational,
    delta: &Rational,
    w: &HypJson,
) -> CliResult<()> {
    let tag = match kind {
        DSetKind::Primal => "primal",
        DSetKind::Dual => "dual",
    };
    let (set, value) = match (&w.worst_set, &w.worst_value) {
        (Some(s), Some(v)) => (ctx.event(s)?, &v.0),
        (None, None) => {
            if kind == DSetKind::Dual || !w.holds {
                return Err(bad_witness("the hypothesis report needs a worst event"));
            }
            t.claim(
                format!("{tag}: max_P P(Omega) < eps, so no event qualifies"),
                &max_mass(&ctx.pv, &ctx.support),
                Rel::Lt,
                eps,
            );
            return Ok(());
        }
        _ => return Err(bad_witness("worst_set and worst_value go together")),
    };
    let name = fmt_set(&ctx.space, &set);
    match kind {
        DSetKind::Primal => {
            t.claim(
                format!("{tag}: max_P P({name}) >= eps"),
                &max_mass(&ctx.pv, &set),
                Rel::Ge,
                eps,
            );
            t.claim(
                format!("{tag}: max_Q Q({name})"),
                &max_mass(&ctx.qv, &set),
                Rel::Eq,
                value,
            );
            if w.holds {
                let best = extremal_event(
                    &ctx.rows(),
                    &ctx.support,
                    ctx.cap,
                    true,
                    |s| max_of(ctx.split(s).0) >= *eps,
                    |s| max_of(ctx.split(s).1),
                )?
                .ok_or_else(|| bad_witness("no event qualifies"))?;
                t.claim(
                    format!("{tag}: min of max_Q Q(A) over events with max_P P(A) >= eps"),
                    &best.0,
                    Rel::Eq,
                    value,
                );
                t.claim(format!("{tag}: min >= delta"), value, Rel::Ge, delta);
            } else {
                t.claim(
                    format!("{tag}: max_Q Q({name}) < delta"),
                    value,
                    Rel::Lt,
                    delta,
                );
            }
        }
        DSetKind::Dual => {
            t.claim(
                format!("{tag}: min_P P({name}) < delta"),
                &min_mass(&ctx.pv, &set),
                Rel::Lt,
                delta,
            );
            t.claim(
                format!("{tag}: min_Q Q({name})"),
                &min_mass(&ctx.qv, &set),
                Rel::Eq,
                value,
            );
            if w.holds {
                let best = extremal_event(
                    &ctx.rows(),
                    &ctx.support,
                    ctx.cap,
                    false,
                    |s| min_of(ctx.split(s).0) < *delta,
                    |s| min_of(ctx.split(s).1),
                )?
                .ok_or_else(|| bad_witness("no event qualifies"))?;
                t.claim(
                    format!("{tag}: max of min_Q Q(A) over events with min_P P(A) < delta"),
                    &best.0,
                    Rel::Eq,
                    value,
                );
                t.claim(format!("{tag}: max < eps"), value, Rel::Lt, eps);
            } else {
                t.claim(
                    format!("{tag}: min_Q Q({name}) >= eps"),
                    value,
                    Rel::Ge,
                    eps,
                );
            }
        }
    }
    Ok(())
}

fn holds_word(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsCheckWitness {
    pub primal: HypJson,
    pub dual: HypJson,
}

pub struct HsCheck;

impl Procedure for HsCheck {
    const NAME: &'static str = "hs-check";
    type Witness = HsCheckWitness;

    fn compute(inputs: &Inputs) -> CliResult<HsCheckWitness> {
        let ctx = PairCtx::new(inputs)?;
        let inst = ctx.instance(inputs.epsilon()?, inputs.delta()?)?;
        Ok(HsCheckWitness {
            primal: hyp_json(&ctx.space, check_hypothesis_primal(&inst)?),
            dual: hyp_json(&ctx.space, check_hypothesis_dual(&inst)?),
        })
    }

    fn check(inputs: &Inputs, w: &HsCheckWitness) -> CliResult<Checked> {
        let ctx = PairCtx::new(inputs)?;
        let (eps, delta) = (inputs.epsilon()?, inputs.delta()?);
        ctx.instance(eps.clone(), delta.clone())?;
        let mut t = Transcript::default();
        ctx.source_claims(&mut t, inputs)?;
        hyp_claims(&mut t, &ctx, DSetKind::Primal, &eps, &delta, &w.primal)?;
        hyp_claims(&mut t, &ctx, DSetKind::Dual, &eps, &delta, &w.dual)?;
        Ok(Checked {
            verdict: format!(
                "primal hypothesis {}; dual hypothesis {}",
                holds_word(w.primal.holds),
                holds_word(w.dual.holds)
            ),
            transcript: t.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundCertificate {
    pub multiplier: Rat,
    /// One per outcome of the quasi-sure support, in outcome order.
    pub slacks: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominatingJson {
    pub p_index: usize,
    pub q_star: Vec<Rat>,
    /// Mixture weights over the `Q` vertices.
    pub weights: Vec<Rat>,
    pub guaranteed_bound: Rat,
    pub vacuous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<BoundCertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsWitnessJson {
    pub hypothesis: HypJson,
    pub per_vertex: Vec<DominatingJson>,
}

fn compute_witnesses(inputs: &Inputs, kind: DSetKind) -> CliResult<HsWitnessJson> {
    let ctx = PairCtx::new(inputs)?;
    let inst = ctx.instance(inputs.epsilon()?, inputs.delta()?)?;
    let check = match kind {
        DSetKind::Primal => check_hypothesis_primal(&inst)?,
        DSetKind::Dual => check_hypothesis_dual(&inst)?,
    };
    let holds = check.holds;
    let mut per_vertex = Vec::new();
    if holds {
        for (k, p) in ctx.p.vertices().iter().enumerate() {
            let w = match kind {
                DSetKind::Primal => construct_hs_witness(&inst, p)?,
                DSetKind::Dual => construct_dual_hs_witness(&inst, p)?,
            };
            per_vertex.push(DominatingJson {
                p_index: k,
                q_star: rats(w.q_star.mass()),
                weights: rats(&w.weights),
                guaranteed_bound: w.guaranteed_bound.into(),
                vacuous: w.vacuous,
                certificate: w.certificate.map(|c| BoundCertificate {
                    multiplier: c.multiplier.into(),
                    slacks: rats(&c.slacks),
                }),
            });
        }
    }
    Ok(HsWitnessJson {
        hypothesis: hyp_json(&ctx.space, check),
        per_vertex,
    })
}

fn check_witnesses(inputs: &Inputs, w: &HsWitnessJson, kind: DSetKind) -> CliResult<Checked> {
    let ctx = PairCtx::new(inputs)?;
    let (eps, delta) = (inputs.epsilon()?, inputs.delta()?);
    ctx.instance(eps.clone(), delta.clone())?;
    let mut t = Transcript::default();
    ctx.source_claims(&mut t, inputs)?;
    hyp_claims(&mut t, &ctx, kind, &eps, &delta, &w.hypothesis)?;
    let two = two();
    if !w.hypothesis.holds {
        if !w.per_vertex.is_empty() {
            return Err(bad_witness("witnesses given although the hypothesis fails"));
        }
        return Ok(Checked {
            verdict: "hypothesis fails; no dominating measure is claimed".into(),
            transcript: t.0,
        });
    }
    expect_len(&w.per_vertex, ctx.pv.len(), "per_vertex")?;
    for (k, (d, p)) in w.per_vertex.iter().zip(&ctx.pv).enumerate() {
        if d.p_index != k {
            return Err(bad_witness("per_vertex entries must be in vertex order"));
        }
        let tag = format!("Q*^{}", k + 1);
        let q = unrat(&d.q_star);
        mixture_claims(&mut t, &tag, &unrat(&d.weights), &ctx.qv, &q, &ctx.space)?;
        let bound = &d.guaranteed_bound.0;
        match (kind, d.vacuous, &d.certificate) {
            (DSetKind::Primal, true, None) => {
                t.claim(
                    format!("{tag}: 2 eps > 1, so no event qualifies"),
                    &(&two * &eps),
                    Rel::Gt,
                    &Rational::one(),
                );
                t.claim(
                    format!("{tag}: bound"),
                    bound,
                    Rel::Eq,
                    &(&eps * &delta / &two),
                );
            }
            (_, false, Some(c)) => {
                let mult = &c.multiplier.0;
                let slacks = unrat(&c.slacks);
                expect_len(&slacks, ctx.support.len(), "slacks")?;
                t.claim(
                    format!("{tag}: multiplier >= 0"),
                    mult,
                    Rel::Ge,
                    &Rational::zero(),
                );
                for (&o, u) in ctx.support.indices().iter().zip(&slacks) {
                    let label = ctx.space.label(o);
                    t.claim(
                        format!("{tag}: slack at {label} >= 0"),
                        u,
                        Rel::Ge,
                        &Rational::zero(),
                    );
                    match kind {
                        DSetKind::Primal => t.claim(
                            format!(
                                "{tag}: multiplier * P^{}({label}) - slack <= Q*({label})",
                                k + 1
                            ),
                            &(mult * &p[o] - u),
                            Rel::Le,
                            &q[o],
                        ),
                        DSetKind::Dual => t.claim(
                            format!(
                                "{tag}: multiplier * P^{}({label}) + slack >= Q*({label})",
                                k + 1
                            ),
                            &(mult * &p[o] + u),
                            Rel::Ge,
                            &q[o],
                        ),
                    }
                }
                let total = sum(&slacks);
                match kind {
                    DSetKind::Primal => {
                        t.claim(
                            format!("{tag}: 2 eps * multiplier - sum of slacks"),
                            &(&two * &eps * mult - total),
                            Rel::Eq,
                            bound,
                        );
                        t.claim(
                            format!("{tag}: bound >= eps delta / 2"),
                            bound,
                            Rel::Ge,
                            &(&eps * &delta / &two),
                        );
                    }
                    DSetKind::Dual => {
                        t.claim(
                            format!("{tag}: eps delta * multiplier + sum of slacks"),
                            &(&eps * &delta * mult + total),
                            Rel::Eq,
                            bound,
                        );
                        t.claim(
                            format!("{tag}: bound < 2 eps"),
                            bound,
                            Rel::Lt,
                            &(&two * &eps),
                        );
                    }
                }
            }
            _ => {
                return Err(bad_witness(format!(
                    "{tag} needs either a certificate or a vacuity claim"
                )))
            }
        }
    }
    let conclusion = match kind {
        DSetKind::Primal => "Q*(A) >= eps delta / 2 whenever P(A) >= 2 eps",
        DSetKind::Dual => "Q*(A) < 2 eps whenever P(A) < eps delta",
    };
    Ok(Checked {
        verdict: format!("{conclusion}, for each of {} prior vertices", ctx.pv.len()),
        transcript: t.0,
    })
}

fn witness_notes(w: &HsWitnessJson) -> Vec<String> {
    w.per_vertex
        .iter()
        .map(|d| {
            format!(
                "P^{}: Q* = {} with bound {}",
                d.p_index + 1,
                super::single::join(&d.q_star),
                d.guaranteed_bound.0
            )
        })
        .collect()
}

pub struct HsWitnessCmd;

impl Procedure for HsWitnessCmd {
    const NAME: &'static str = "hs-witness";
    type Witness = HsWitnessJson;

    fn compute(inputs: &Inputs) -> CliResult<HsWitnessJson> {
        compute_witnesses(inputs, DSetKind::Primal)
    }

    fn check(inputs: &Inputs, w: &HsWitnessJson) -> CliResult<Checked> {
        check_witnesses(inputs, w, DSetKind::Primal)
    }

    fn notes(_: &Inputs, w: &HsWitnessJson) -> CliResult<Vec<String>> {
        Ok(witness_notes(w))
    }
}

pub struct HsDualWitnessCmd;

impl Procedure for HsDualWitnessCmd {
    const NAME: &'static str = "hs-dual-witness";
    type Witness = HsWitnessJson;

    fn compute(inputs: &Inputs) -> CliResult<HsWitnessJson> {
        compute_witnesses(inputs, DSetKind::Dual)
    }

    fn check(inputs: &Inputs, w: &HsWitnessJson) -> CliResult<Checked> {
        check_witnesses(inputs, w, DSetKind::Dual)
    }

    fn notes(_: &Inputs, w: &HsWitnessJson) -> CliResult<Vec<String>> {
        Ok(witness_notes(w))
    }
}

pub fn parse_kind(kind: Option<&str>) -> CliResult<DSetKind> {
    match kind.unwrap_or("primal") {
        "primal" => Ok(DSetKind::Primal),
        "dual" => Ok(DSetKind::Dual),
        other => Err(CliError::input(format!(
            "kind must be primal or dual, got {other:?}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusWitness {
    pub modulus: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attaining_set: Option<Vec<String>>,
}

fn modulus_of(
    ctx: &PairCtx,
    kind: DSetKind,
    eps: &Rational,
) -> CliResult<Option<(Rational, OutcomeSet)>> {
    modulus_event(&ctx.pv, &ctx.qv, &ctx.support, ctx.cap, kind, eps)
}

pub struct HsModulus;

impl Procedure for HsModulus {
    const NAME: &'static str = "hs-modulus";
    type Witness = ModulusWitness;

    fn compute(inputs: &Inputs) -> CliResult<ModulusWitness> {
        let ctx = PairCtx::new(inputs)?;
        let eps = inputs.epsilon()?;
        let kind = parse_kind(inputs.kind.as_deref())?;
        let value = match kind {
            DSetKind::Primal => hs_modulus(&ctx.p, &ctx.q, &eps, ctx.cap)?,
            DSetKind::Dual => dual_hs_modulus(&ctx.p, &ctx.q, &eps, ctx.cap)?,
        };
        let event = modulus_of(&ctx, kind, &eps)?;
        let expected = event
            .as_ref()
            .map(|e| e.0.clone())
            .unwrap_or_else(no_qualifying_set);
        if expected != value {
            return Err(CliError::Internal(format!(
                "modulus {value} differs from the enumerated {expected}"
            )));
        }
        Ok(ModulusWitness {
            modulus: value.into(),
            attaining_set: event.map(|(_, s)| labels(&ctx.space, &s)),
        })
    }

    fn check(inputs: &Inputs, w: &ModulusWitness) -> CliResult<Checked> {
        let ctx = PairCtx::new(inputs)?;
        let eps = inputs.epsilon()?;
        let kind = parse_kind(inputs.kind.as_deref())?;
        ctx.instance(eps.clone(), Rational::one())?;
        let mut t = Transcript::default();
        ctx.source_claims(&mut t, inputs)?;
        let value = &w.modulus.0;
        let verdict = match &w.attaining_set {
            Some(s) => {
                let set = ctx.event(s)?;
                let name = fmt_set(&ctx.space, &set);
                match kind {
                    DSetKind::Primal => {
                        t.claim(
                            format!("max_P P({name}) >= eps"),
                            &max_mass(&ctx.pv, &set),
                            Rel::Ge,
                            &eps,
                        );
                        t.claim(
                            format!("max_Q Q({name})"),
                            &max_mass(&ctx.qv, &set),
                            Rel::Eq,
                            value,
                        );
                    }
                    DSetKind::Dual => {
                        t.claim(
                            format!("min_Q Q({name}) >= eps"),
                            &min_mass(&ctx.qv, &set),
                            Rel::Ge,
                            &eps,
                        );
                        t.claim(
                            format!("min_P P({name})"),
                            &min_mass(&ctx.pv, &set),
                            Rel::Eq,
                            value,
                        );
                    }
                }
                let best = modulus_of(&ctx, kind, &eps)?
                    .ok_or_else(|| bad_witness("no event qualifies"))?;
                t.claim("minimum over qualifying events", &best.0, Rel::Eq, value);
                format!("modulus {value}")
            }
            None => {
                let whole = match kind {
                    DSetKind::Primal => max_mass(&ctx.pv, &ctx.support),
                    DSetKind::Dual => min_mass(&ctx.qv, &ctx.support),
                };
                t.claim("largest qualifying mass < eps", &whole, Rel::Lt, &eps);
                t.claim(
                    "sentinel for an empty family",
                    value,
                    Rel::Eq,
                    &no_qualifying_set(),
                );
                format!(
                    "no event qualifies; modulus reported as {}",
                    no_qualifying_set()
                )
            }
        };
        Ok(Checked {
            verdict,
            transcript: t.0,
        })
    }
}
