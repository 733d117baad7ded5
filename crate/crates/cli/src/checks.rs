//! Claim builders shared by the procedures. Nothing here solves an LP.

use crate::cert::{Rel, Transcript};
use crate::error::{CliError, CliResult};
use num_traits::{One, Zero};
use robust_ftap::halmos_savage::DSetKind;
use robust_ftap::market::Market;
use robust_ftap::measures::{OutcomeSet, SampleSpace};
use robust_ftap::rational::{dot, int, sum};
use robust_ftap::subsets::for_each_subset;
use robust_ftap::{EnumerationCap, Rational};

pub fn bad_witness(msg: impl Into<String>) -> CliError {
    CliError::input(format!("malformed witness: {}", msg.into()))
}

pub fn expect_len<T>(v: &[T], n: usize, what: &str) -> CliResult<()> {
    if v.len() != n {
        return Err(bad_witness(format!(
            "{what} has {} entries, expected {n}",
            v.len()
        )));
    }
    Ok(())
}

pub fn labels(space: &SampleSpace, set: &OutcomeSet) -> Vec<String> {
    set.labels(space).map(str::to_string).collect()
}

pub fn set_from_labels(space: &SampleSpace, labels: &[String]) -> CliResult<OutcomeSet> {
    let idx = labels
        .iter()
        .map(|l| {
            space
                .index_of(l)
                .ok_or_else(|| bad_witness(format!("unknown outcome {l:?}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let set = OutcomeSet::new(idx);
    if set.len() != labels.len() {
        return Err(bad_witness("repeated outcome label"));
    }
    if set.labels(space).ne(labels.iter().map(String::as_str)) {
        return Err(bad_witness("event labels must be listed in outcome order"));
    }
    Ok(set)
}

pub fn fmt_set(space: &SampleSpace, set: &OutcomeSet) -> String {
    format!("{{{}}}", labels(space, set).join(","))
}

pub fn mass_of(mass: &[Rational], set: &OutcomeSet) -> Rational {
    sum(set.indices().iter().map(|&i| &mass[i]))
}

pub fn max_mass(vertices: &[Vec<Rational>], set: &OutcomeSet) -> Rational {
    vertices
        .iter()
        .map(|v| mass_of(v, set))
        .max()
        .expect("nonempty vertex list")
}

pub fn min_mass(vertices: &[Vec<Rational>], set: &OutcomeSet) -> Rational {
    vertices
        .iter()
        .map(|v| mass_of(v, set))
        .min()
        .expect("nonempty vertex list")
}

pub fn gain(m: &Market, h: &[Rational], w: usize) -> Rational {
    dot(h, &m.increments()[w])
}

/// `-1 <= h_i <= 1`.
pub fn box_claims(t: &mut Transcript, name: &str, h: &[Rational]) {
    for (i, v) in h.iter().enumerate() {
        t.claim(
            format!("{name}_{} >= -1", i + 1),
            v,
            Rel::Ge,
            &-Rational::one(),
        );
        t.claim(
            format!("{name}_{} <= 1", i + 1),
            v,
            Rel::Le,
            &Rational::one(),
        );
    }
}

/// Membership of `q` in the martingale polytope of `m`; with `strict`, also
/// positivity on the whole quasi-sure support.
pub fn martingale_claims(
    t: &mut Transcript,
    name: &str,
    q: &[Rational],
    m: &Market,
    strict: bool,
) -> CliResult<()> {
    let space = m.space();
    expect_len(q, space.len(), name)?;
    let support = m.support();
    for (w, v) in q.iter().enumerate() {
        let label = space.label(w);
        if !support.contains(w) {
            t.claim(
                format!("{name}({label}) == 0 off the quasi-sure support"),
                v,
                Rel::Eq,
                &Rational::zero(),
            );
        } else if strict {
            t.claim(
                format!("{name}({label}) > 0"),
                v,
                Rel::Gt,
                &Rational::zero(),
            );
        } else {
            t.claim(
                format!("{name}({label}) >= 0"),
                v,
                Rel::Ge,
                &Rational::zero(),
            );
        }
    }
    t.claim(
        format!("total mass of {name}"),
        &sum(q),
        Rel::Eq,
        &Rational::one(),
    );
    for i in 0..m.num_assets() {
        let col: Vec<Rational> = m.increments().iter().map(|r| r[i].clone()).collect();
        t.claim(
            format!("E_{name}[dS_{}] == 0", i + 1),
            &dot(q, &col),
            Rel::Eq,
            &Rational::zero(),
        );
    }
    Ok(())
}

/// Convex weights `w` reproduce `target` from `vertices`.
pub fn mixture_claims(
    t: &mut Transcript,
    name: &str,
    weights: &[Rational],
    vertices: &[Vec<Rational>],
    target: &[Rational],
    space: &SampleSpace,
) -> CliResult<()> {
    expect_len(weights, vertices.len(), &format!("weights of {name}"))?;
    expect_len(target, space.len(), name)?;
    for (j, w) in weights.iter().enumerate() {
        t.claim(
            format!("weight {} of {name} >= 0", j + 1),
            w,
            Rel::Ge,
            &Rational::zero(),
        );
    }
    t.claim(
        format!("weights of {name} sum to 1"),
        &sum(weights),
        Rel::Eq,
        &Rational::one(),
    );
    for (i, v) in target.iter().enumerate() {
        let mixed = weights
            .iter()
            .zip(vertices)
            .fold(Rational::zero(), |acc, (w, vert)| acc + w * &vert[i]);
        t.claim(
            format!("{name}({}) == mixture", space.label(i)),
            v,
            Rel::Eq,
            &mixed,
        );
    }
    Ok(())
}

/// Best value of `score` over events satisfying `qualifies`.
pub fn extremal_event<Q, S>(
    rows: &[&[Rational]],
    support: &OutcomeSet,
    cap: EnumerationCap,
    minimize: bool,
    qualifies: Q,
    score: S,
) -> CliResult<Option<(Rational, OutcomeSet)>>
where
    Q: Fn(&[Rational]) -> bool,
    S: Fn(&[Rational]) -> Rational,
{
    cap.check(support.len())?;
    let restricted: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| support.indices().iter().map(|&i| r[i].clone()).collect())
        .collect();
    let mut best: Option<(Rational, u64)> = None;
    for_each_subset(&restricted, support.len(), |mask, sums| {
        if !qualifies(sums) {
            return;
        }
        let v = score(sums);
        let better = match &best {
            None => true,
            Some((b, bm)) => {
                if minimize {
                    v < *b || (v == *b && key(mask) < key(*bm))
                } else {
                    v > *b || (v == *b && key(mask) < key(*bm))
                }
            }
        };
        if better {
            best = Some((v, mask));
        }
    });
    Ok(best.map(|(v, mask)| (v, OutcomeSet::from_mask(mask, support.indices()))))
}

fn key(mask: u64) -> (u32, u64) {
    robust_ftap::subsets::subset_order_key(mask)
}

pub fn two() -> Rational {
    int(2)
}

fn max_of(v: &[Rational]) -> Rational {
    v.iter().max().cloned().unwrap_or_else(Rational::zero)
}

fn min_of(v: &[Rational]) -> Rational {
    v.iter().min().cloned().unwrap_or_else(Rational::zero)
}

/// Event attaining the Halmos-Savage modulus at `eps`, with its value.
///
/// Primal: `min max_Q Q(A)` over `max_P P(A) >= eps`.
/// Dual: `min min_P P(A)` over `min_Q Q(A) >= eps`.
pub fn modulus_event(
    pv: &[Vec<Rational>],
    qv: &[Vec<Rational>],
    support: &OutcomeSet,
    cap: EnumerationCap,
    kind: DSetKind,
    eps: &Rational,
) -> CliResult<Option<(Rational, OutcomeSet)>> {
    let rows: Vec<&[Rational]> = pv.iter().chain(qv).map(|v| v.as_slice()).collect();
    let k = pv.len();
    match kind {
        DSetKind::Primal => extremal_event(
            &rows,
            support,
            cap,
            true,
            |s| max_of(&s[..k]) >= *eps,
            |s| max_of(&s[k..]),
        ),
        DSetKind::Dual => extremal_event(
            &rows,
            support,
            cap,
            true,
            |s| min_of(&s[k..]) >= *eps,
            |s| min_of(&s[..k]),
        ),
    }
}
