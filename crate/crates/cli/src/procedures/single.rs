//! One-period market commands.

use crate::cert::{Checked, Inputs, Procedure, Rel, Transcript};
use crate::checks::*;
use crate::error::{CliError, CliResult};
use crate::files::{rats, unrat, Rat};
use num_traits::{One, Signed, Zero};
use robust_ftap::lp::{LinearProgram, LpStatus, Relation, Sense, VarBounds};
use robust_ftap::market::{
    arbitrage_charging, check_ftap, check_na, full_support_martingale_measure, martingale_polytope,
    superhedge, Market,
};
use robust_ftap::measures::BoundedFunction;
use robust_ftap::Rational;
use serde::{Deserialize, Serialize};

fn market(inputs: &Inputs) -> CliResult<Market> {
    inputs.market()?.to_market(inputs.cap())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArbitrageJson {
    pub h: Vec<Rat>,
    pub strict_outcome: String,
}

fn arbitrage_json(m: &Market, h: Vec<Rational>, strict: usize) -> ArbitrageJson {
    ArbitrageJson {
        h: rats(&h),
        strict_outcome: m.space().label(strict).to_string(),
    }
}

/// Claims that `a` is an arbitrage; returns the strict outcome's index.
fn arbitrage_claims(
    t: &mut Transcript,
    name: &str,
    m: &Market,
    a: &ArbitrageJson,
) -> CliResult<usize> {
    let h = unrat(&a.h);
    expect_len(&h, m.num_assets(), name)?;
    let strict = m
        .space()
        .index_of(&a.strict_outcome)
        .ok_or_else(|| bad_witness(format!("unknown outcome {:?}", a.strict_outcome)))?;
    let support = m.support();
    if !support.contains(strict) {
        return Err(bad_witness(
            "strict outcome lies outside the quasi-sure support",
        ));
    }
    box_claims(t, name, &h);
    for &w in support.indices() {
        t.claim(
            format!("{name}.dS({}) >= 0", m.space().label(w)),
            &gain(m, &h, w),
            Rel::Ge,
            &Rational::zero(),
        );
    }
    t.claim(
        format!("{name}.dS({}) > 0", a.strict_outcome),
        &gain(m, &h, strict),
        Rel::Gt,
        &Rational::zero(),
    );
    Ok(strict)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaWitness {
    pub holds: bool,
    /// Martingale measure charging every outcome of the quasi-sure support.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub martingale_measure: Option<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arbitrage: Option<ArbitrageJson>,
}

fn na_witness(m: &Market) -> CliResult<NaWitness> {
    let na = check_na(m)?;
    match na.witness {
        Some(w) => Ok(NaWitness {
            holds: false,
            martingale_measure: None,
            arbitrage: Some(arbitrage_json(m, w.h, w.strict_outcome)),
        }),
        None => {
            let q = full_support_martingale_measure(m)?.ok_or_else(|| {
                CliError::Internal("NA holds but no full-support martingale measure exists".into())
            })?;
            Ok(NaWitness {
                holds: true,
                martingale_measure: Some(rats(q.mass())),
                arbitrage: None,
            })
        }
    }
}

fn na_claims(t: &mut Transcript, m: &Market, w: &NaWitness) -> CliResult<()> {
    match (w.holds, &w.martingale_measure, &w.arbitrage) {
        (true, Some(q), None) => martingale_claims(t, "Q", &unrat(q), m, true),
        (false, None, Some(a)) => arbitrage_claims(t, "H", m, a).map(|_| ()),
        _ => Err(bad_witness("NA verdict and payload disagree")),
    }
}

pub struct CheckNa;

impl Procedure for CheckNa {
    const NAME: &'static str = "check-na";
    type Witness = NaWitness;

    fn compute(inputs: &Inputs) -> CliResult<NaWitness> {
        na_witness(&market(inputs)?)
    }

    fn check(inputs: &Inputs, w: &NaWitness) -> CliResult<Checked> {
        let m = market(inputs)?;
        let mut t = Transcript::default();
        na_claims(&mut t, &m, w)?;
        Ok(Checked {
            verdict: if w.holds {
                "NA holds"
            } else {
                "arbitrage found"
            }
            .into(),
            transcript: t.0,
        })
    }

    fn notes(_: &Inputs, w: &NaWitness) -> CliResult<Vec<String>> {
        Ok(match (&w.martingale_measure, &w.arbitrage) {
            (Some(q), _) => vec![format!("equivalent martingale measure: {}", join(q))],
            (_, Some(a)) => vec![format!(
                "arbitrage H = {} (strict gain in {})",
                join(&a.h),
                a.strict_outcome
            )],
            _ => Vec::new(),
        })
    }
}

pub fn join(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(|r| r.0.to_string()).collect();
    format!("({})", parts.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeWitness {
    pub vertices: Vec<Vec<Rat>>,
    /// Strategy with strictly positive gain everywhere, proving emptiness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emptiness: Option<Vec<Rat>>,
}

/// Maximizes the worst gain over the support within the unit box.
fn strictly_positive_strategy(m: &Market) -> CliResult<Option<Vec<Rational>>> {
    let d = m.num_assets();
    let mut obj = vec![Rational::zero(); d + 1];
    obj[d] = Rational::one();
    let mut lp = LinearProgram::new(Sense::Maximize, obj);
    for j in 0..d {
        lp.set_bounds(j, VarBounds::boxed(-Rational::one(), Rational::one()));
    }
    lp.set_bounds(
        d,
        VarBounds {
            lower: None,
            upper: Some(Rational::one()),
        },
    );
    for &w in m.support().indices() {
        let mut row = m.increments()[w].clone();
        row.push(-Rational::one());
        lp.add_constraint(row, Relation::Ge, Rational::zero());
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(CliError::Internal(format!(
            "emptiness program ended {:?}",
            sol.status
        )));
    }
    Ok(sol.value.is_positive().then(|| sol.primal[..d].to_vec()))
}

pub struct MartingalePolytopeCmd;

impl Procedure for MartingalePolytopeCmd {
    const NAME: &'static str = "martingale-polytope";
    type Witness = PolytopeWitness;

    fn compute(inputs: &Inputs) -> CliResult<PolytopeWitness> {
        let m = market(inputs)?;
        let poly = martingale_polytope(&m)?;
        let emptiness = if poly.is_empty() {
            Some(strictly_positive_strategy(&m)?.ok_or_else(|| {
                CliError::Internal("empty polytope without a separating strategy".into())
            })?)
        } else {
            None
        };
        Ok(PolytopeWitness {
            vertices: poly.vertices().iter().map(|q| rats(q.mass())).collect(),
            emptiness: emptiness.map(|h| rats(&h)),
        })
    }

    fn check(inputs: &Inputs, w: &PolytopeWitness) -> CliResult<Checked> {
        let m = market(inputs)?;
        let mut t = Transcript::default();
        let verdict = match (&w.emptiness, w.vertices.is_empty()) {
            (None, false) => {
                for (k, v) in w.vertices.iter().enumerate() {
                    martingale_claims(&mut t, &format!("Q^{}", k + 1), &unrat(v), &m, false)?;
                }
                match w.vertices.len() {
                    1 => "martingale polytope has 1 vertex".to_string(),
                    k => format!("martingale polytope has {k} vertices"),
                }
            }
            (Some(h), true) => {
                let h = unrat(h);
                expect_len(&h, m.num_assets(), "emptiness strategy")?;
                box_claims(&mut t, "H", &h);
                for &o in m.support().indices() {
                    t.claim(
                        format!("H.dS({}) > 0", m.space().label(o)),
                        &gain(&m, &h, o),
                        Rel::Gt,
                        &Rational::zero(),
                    );
                }
                "martingale polytope is empty".into()
            }
            _ => return Err(bad_witness("vertex list and emptiness proof disagree")),
        };
        Ok(Checked {
            verdict,
            transcript: t.0,
        })
    }

    fn notes(_: &Inputs, w: &PolytopeWitness) -> CliResult<Vec<String>> {
        Ok(w.vertices
            .iter()
            .map(|v| format!("vertex {}", join(v)))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexJson {
    pub p_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dominating_q: Option<Vec<Rat>>,
    /// Arbitrage with strict gain on an outcome this vertex charges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arbitrage: Option<ArbitrageJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FtapWitness {
    pub na: NaWitness,
    pub per_vertex: Vec<VertexJson>,
    pub all_dominated: bool,
    pub na_equivalent: bool,
}

pub struct Ftap;

impl Procedure for Ftap {
    const NAME: &'static str = "ftap";
    type Witness = FtapWitness;

    fn compute(inputs: &Inputs) -> CliResult<FtapWitness> {
        let m = market(inputs)?;
        let report = check_ftap(&m)?;
        let mut per_vertex = Vec::new();
        for (v, p) in report.per_vertex.iter().zip(m.ambiguity().vertices()) {
            let arbitrage = match &v.dominating_q {
                Some(_) => None,
                None => {
                    let a = arbitrage_charging(&m, &p.support())?.ok_or_else(|| {
                        CliError::Internal(format!(
                            "vertex {} is undominated but admits no arbitrage",
                            v.p_index + 1
                        ))
                    })?;
                    Some(arbitrage_json(&m, a.h, a.strict_outcome))
                }
            };
            per_vertex.push(VertexJson {
                p_index: v.p_index,
                dominating_q: v.dominating_q.as_ref().map(|q| rats(q.mass())),
                arbitrage,
            });
        }
        Ok(FtapWitness {
            na: na_witness(&m)?,
            per_vertex,
            all_dominated: report.all_dominated,
            na_equivalent: report.na_equivalent,
        })
    }

    fn check(inputs: &Inputs, w: &FtapWitness) -> CliResult<Checked> {
        let m = market(inputs)?;
        let space = m.space();
        let mut t = Transcript::default();
        na_claims(&mut t, &m, &w.na)?;
        let vertices = m.ambiguity().vertices();
        expect_len(&w.per_vertex, vertices.len(), "per_vertex")?;
        for (k, (v, p)) in w.per_vertex.iter().zip(vertices).enumerate() {
            if v.p_index != k {
                return Err(bad_witness("per_vertex entries must be in vertex order"));
            }
            let tag = k + 1;
            match (&v.dominating_q, &v.arbitrage) {
                (Some(q), None) => {
                    let q = unrat(q);
                    let name = format!("Q^{tag}");
                    martingale_claims(&mut t, &name, &q, &m, false)?;
                    for &o in p.support().indices() {
                        t.claim(
                            format!("P^{tag} << {name} at {}", space.label(o)),
                            &q[o],
                            Rel::Gt,
                            &Rational::zero(),
                        );
                    }
                }
                (None, Some(a)) => {
                    let strict = arbitrage_claims(&mut t, &format!("H^{tag}"), &m, a)?;
                    t.claim(
                        format!("P^{tag}({}) > 0", a.strict_outcome),
                        &p.mass()[strict],
                        Rel::Gt,
                        &Rational::zero(),
                    );
                }
                _ => {
                    return Err(bad_witness(format!(
                        "vertex {tag} needs exactly one of dominating_q, arbitrage"
                    )))
                }
            }
        }
        let all = w.per_vertex.iter().all(|v| v.dominating_q.is_some());
        if all != w.all_dominated || w.na_equivalent != (w.na.holds == all) {
            return Err(bad_witness(
                "summary flags disagree with the per-vertex data",
            ));
        }
        let verdict = match (w.na.holds, all) {
            (true, true) => "NA holds and every prior vertex has a dominating martingale measure",
            (false, false) => {
                "arbitrage exists and some prior vertex has no dominating martingale measure"
            }
            (true, false) => "equivalence broken: NA holds but some prior vertex is undominated",
            (false, true) => {
                "equivalence broken: arbitrage exists but every prior vertex is dominated"
            }
        };
        Ok(Checked {
            verdict: verdict.into(),
            transcript: t.0,
        })
    }

    fn contradiction(w: &FtapWitness) -> Option<String> {
        (!w.na_equivalent).then(|| "NA verdict and martingale domination disagree".into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeWitness {
    pub price: Rat,
    pub h: Vec<Rat>,
    pub attaining_q: Vec<Rat>,
}

fn payoff(inputs: &Inputs, m: &Market) -> CliResult<Vec<Rational>> {
    let f = unrat(
        inputs
            .payoff
            .as_ref()
            .ok_or_else(|| CliError::input("missing required input `payoff`"))?,
    );
    if f.len() != m.space().len() {
        return Err(CliError::input(format!(
            "field `payoff`: expected {} values, found {}",
            m.space().len(),
            f.len()
        )));
    }
    Ok(f)
}

pub struct Superhedge;

impl Procedure for Superhedge {
    const NAME: &'static str = "superhedge";
    type Witness = HedgeWitness;

    fn compute(inputs: &Inputs) -> CliResult<HedgeWitness> {
        let m = market(inputs)?;
        let f = BoundedFunction::new(m.space(), payoff(inputs, &m)?)?;
        let c = superhedge(&m, &f)?;
        Ok(HedgeWitness {
            price: c.price.into(),
            h: rats(&c.h),
            attaining_q: rats(c.attaining_q.mass()),
        })
    }

    fn check(inputs: &Inputs, w: &HedgeWitness) -> CliResult<Checked> {
        let m = market(inputs)?;
        let f = payoff(inputs, &m)?;
        let h = unrat(&w.h);
        let q = unrat(&w.attaining_q);
        expect_len(&h, m.num_assets(), "hedge")?;
        let price = &w.price.0;
        let mut t = Transcript::default();
        let l1 = h.iter().fold(Rational::zero(), |a, v| a + v.abs());
        t.claim("l1 norm of H >= 0", &l1, Rel::Ge, &Rational::zero());
        for &o in m.support().indices() {
            t.claim(
                format!("price + H.dS({0}) >= f({0})", m.space().label(o)),
                &(price + gain(&m, &h, o)),
                Rel::Ge,
                &f[o],
            );
        }
        martingale_claims(&mut t, "Q", &q, &m, false)?;
        t.claim(
            "E_Q[f] == price",
            &robust_ftap::rational::dot(&q, &f),
            Rel::Eq,
            price,
        );
        Ok(Checked {
            verdict: format!("superhedging price {price}"),
            transcript: t.0,
        })
    }

    fn notes(_: &Inputs, w: &HedgeWitness) -> CliResult<Vec<String>> {
        Ok(vec![
            format!("price: {}", w.price.0),
            format!("H: {}", join(&w.h)),
            format!("attaining Q: {}", join(&w.attaining_q)),
        ])
    }
}
