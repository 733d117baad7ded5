//! Acceptance gate. Prints one `[PASS]`/`[FAIL] criterion N` line per
//! criterion and exits non-zero if any fails.

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_ftap::halmos_savage::{
    basic_lemma_value, check_hypothesis_dual, check_hypothesis_primal, construct_dual_hs_witness,
    construct_hs_witness, DSetKind, HsInstance,
};
use robust_ftap::large_market::{
    build_contiguous_sequence, certify_moduli, default_c_schedule, default_grid,
    default_target_levels, scan_aa1, scan_aa2, MarketSequence,
};
use robust_ftap::lp::{
    minimax_value, Constraint, LinearProgram, LpStatus, MinimaxInstance, Polytope, Relation, Sense,
    VarBounds,
};
use robust_ftap::market::{
    arbitrage_charging, check_ftap, martingale_polytope, superhedge, Market,
};
use robust_ftap::measures::{AmbiguitySet, BoundedFunction, SampleSpace};
use robust_ftap::rational::{dot, int, pow2_neg, rat, sum};
use robust_ftap::{EnumerationCap, Rational};
use robust_ftap_cli::cert::{Certificate, Inputs};
use robust_ftap_cli::files::{MarketFile, PairFile, Rat, SequenceFile};
use robust_ftap_cli::{emit_named, verify_certificate};
use serde_json::Value;
use std::time::Instant;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ratio(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    rat(rng.gen_range(lo..=hi), rng.gen_range(1..=10))
}

/// Probability vector with denominator at most 10, optionally sparse.
fn probability(rng: &mut ChaCha8Rng, n: usize, allowed: &[usize]) -> Vec<Rational> {
    let den = rng.gen_range(1..=10i64);
    let mut units = vec![0i64; n];
    for _ in 0..den {
        units[*allowed.choose(rng).unwrap()] += 1;
    }
    units.into_iter().map(|u| rat(u, den)).collect()
}

fn random_market(rng: &mut ChaCha8Rng) -> Market {
    let n = rng.gen_range(1..=6usize);
    let d = rng.gen_range(1..=3usize);
    let space = SampleSpace::numbered(n).unwrap();
    let s0: Vec<Rational> = (0..d).map(|_| ratio(rng, 1, 10)).collect();
    let s1: Vec<Vec<Rational>> = (0..n)
        .map(|_| s0.iter().map(|s| s + ratio(rng, -10, 10)).collect())
        .collect();
    let all: Vec<usize> = (0..n).collect();
    let k = rng.gen_range(1..=4usize);
    let masses = (0..k)
        .map(|_| {
            let width = rng.gen_range(1..=n);
            let allowed: Vec<usize> = all.choose_multiple(rng, width).cloned().collect();
            probability(rng, n, &allowed)
        })
        .collect();
    let amb = AmbiguitySet::from_masses(&space, masses).unwrap();
    Market::new(&space, s0, s1, amb).unwrap()
}

fn column(m: &Market, i: usize) -> Vec<Rational> {
    m.increments().iter().map(|r| r[i].clone()).collect()
}

fn is_martingale(m: &Market, q: &[Rational]) -> bool {
    let support = m.support();
    q.iter()
        .enumerate()
        .all(|(w, v)| !v.is_negative() && (support.contains(w) || v.is_zero()))
        && sum(q).is_one()
        && (0..m.num_assets()).all(|i| dot(q, &column(m, i)).is_zero())
}

fn gain(m: &Market, h: &[Rational], w: usize) -> Rational {
    dot(h, &m.increments()[w])
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..1 << n).map(move |mask| (0..n).filter(|b| mask >> b & 1 == 1).collect())
}

fn mass(v: &[Rational], set: &[usize]) -> Rational {
    set.iter().fold(Rational::zero(), |a, &i| a + &v[i])
}

fn criterion_1(rng: &mut ChaCha8Rng, na_markets: &mut Vec<Market>) -> Check {
    let total = 1000;
    let mut arbitrage = 0;
    for idx in 0..total {
        let m = random_market(rng);
        let r = check_ftap(&m).map_err(|e| format!("market {idx}: {e}"))?;
        ensure(r.na_equivalent, || {
            format!("market {idx}: verdicts disagree")
        })?;
        for (v, p) in r.per_vertex.iter().zip(m.ambiguity().vertices()) {
            match &v.dominating_q {
                Some(q) => ensure(
                    is_martingale(&m, q.mass())
                        && p.support()
                            .indices()
                            .iter()
                            .all(|&w| q.mass()[w].is_positive()),
                    || format!("market {idx}: dominating measure fails its checks"),
                )?,
                None => {
                    // Oracle for the negative side: an arbitrage charging this vertex.
                    let a = arbitrage_charging(&m, &p.support())
                        .map_err(|e| e.to_string())?
                        .ok_or_else(|| {
                            format!("market {idx}: undominated vertex without arbitrage")
                        })?;
                    let support = m.support();
                    ensure(
                        p.mass()[a.strict_outcome].is_positive()
                            && gain(&m, &a.h, a.strict_outcome).is_positive()
                            && support
                                .indices()
                                .iter()
                                .all(|&w| !gain(&m, &a.h, w).is_negative()),
                        || format!("market {idx}: arbitrage witness fails"),
                    )?;
                }
            }
        }
        match &r.na.witness {
            Some(a) => {
                arbitrage += 1;
                ensure(a.verify(&m), || format!("market {idx}: NA witness fails"))?;
            }
            None => na_markets.push(m),
        }
    }
    Ok(format!(
        "{total} markets, {} NA, {arbitrage} with arbitrage",
        total - arbitrage
    ))
}

fn criterion_2(rng: &mut ChaCha8Rng, na_markets: &[Market]) -> Check {
    let mut count = 0;
    for (idx, m) in na_markets.iter().enumerate() {
        let poly = martingale_polytope(m).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let values: Vec<Rational> = (0..m.space().len()).map(|_| ratio(rng, -10, 10)).collect();
            let f = BoundedFunction::new(m.space(), values.clone()).unwrap();
            let c = superhedge(m, &f).map_err(|e| format!("market {idx}: {e}"))?;
            let best = poly
                .vertices()
                .iter()
                .map(|q| q.expectation(&values))
                .max()
                .unwrap();
            ensure(c.price == best, || {
                format!("market {idx}: price {} vs vertex max {best}", c.price)
            })?;
            ensure(
                m.support()
                    .indices()
                    .iter()
                    .all(|&w| &c.price + gain(m, &c.h, w) >= values[w]),
                || format!("market {idx}: hedge fails"),
            )?;
            count += 1;
        }
    }
    Ok(format!(
        "{count} payoffs on {} NA markets",
        na_markets.len()
    ))
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<Rational>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| ratio(rng, -10, 10)).collect())
        .collect()
}

/// `min_{y in Y} y . c`, computed independently of the minimax solver.
fn min_over_y(y: &Polytope, c: &[Rational]) -> Result<Rational, String> {
    match y {
        Polytope::Vertices(ws) => Ok(ws.iter().map(|w| dot(w, c)).min().unwrap()),
        Polytope::Halfspaces {
            constraints,
            bounds,
            ..
        } if constraints.is_empty() => Ok(bounds
            .iter()
            .zip(c)
            .map(|(b, ci)| {
                let l = b.lower.clone().unwrap();
                let u = b.upper.clone().unwrap();
                if ci.is_negative() {
                    ci * u
                } else {
                    ci * l
                }
            })
            .fold(Rational::zero(), |a, v| a + v)),
        Polytope::Halfspaces {
            constraints,
            bounds,
            ..
        } => {
            let mut lp = LinearProgram::new(Sense::Minimize, c.to_vec());
            for (j, b) in bounds.iter().enumerate() {
                lp.set_bounds(j, b.clone());
            }
            for k in constraints {
                lp.add_constraint(k.coeffs.clone(), k.relation, k.rhs.clone());
            }
            let s = lp.solve().map_err(|e| e.to_string())?;
            ensure(s.status == LpStatus::Optimal, || {
                "Y program not optimal".into()
            })?;
            Ok(s.value)
        }
    }
}

fn in_y(y: &Polytope, point: &[Rational]) -> bool {
    match y {
        Polytope::Vertices(_) => true,
        Polytope::Halfspaces {
            constraints,
            bounds,
            ..
        } => {
            bounds.iter().zip(point).all(|(b, v)| {
                b.lower.as_ref().is_none_or(|l| v >= l) && b.upper.as_ref().is_none_or(|u| v <= u)
            }) && constraints
                .iter()
                .all(|k| k.relation.holds(&dot(&k.coeffs, point), &k.rhs))
        }
    }
}

fn criterion_3(rng: &mut ChaCha8Rng) -> Check {
    let total = 500;
    for idx in 0..total {
        let xd = rng.gen_range(1..=6usize);
        let yd = rng.gen_range(1..=6usize);
        let k = rng.gen_range(1..=6usize);
        let x_vertices = random_matrix(rng, k, xd);
        let payoff = random_matrix(rng, yd, xd);
        let y = match rng.gen_range(0..4) {
            0 | 1 => {
                let r = rng.gen_range(1..=6);
                Polytope::Vertices(random_matrix(rng, r, yd))
            }
            shape => {
                let bounds: Vec<VarBounds> = (0..yd)
                    .map(|_| {
                        let l = ratio(rng, -10, 0);
                        let u = &l + ratio(rng, 0, 10);
                        VarBounds::boxed(l, u)
                    })
                    .collect();
                let constraints = if shape == 3 {
                    let floor = bounds
                        .iter()
                        .fold(Rational::zero(), |a, b| a + b.lower.clone().unwrap());
                    vec![Constraint {
                        coeffs: vec![Rational::one(); yd],
                        relation: Relation::Le,
                        rhs: floor + ratio(rng, 0, 10),
                    }]
                } else {
                    Vec::new()
                };
                Polytope::Halfspaces {
                    dim: yd,
                    constraints,
                    bounds,
                }
            }
        };
        let inst = MinimaxInstance {
            payoff: payoff.clone(),
            x_vertices: x_vertices.clone(),
            y: y.clone(),
        };
        let sol = minimax_value(&inst).map_err(|e| format!("instance {idx}: {e}"))?;
        // Saddle point: y* caps every x, x* floors every y.
        let sup_at_y = x_vertices
            .iter()
            .map(|v| {
                dot(
                    &sol.y_star,
                    &payoff.iter().map(|row| dot(row, v)).collect::<Vec<_>>(),
                )
            })
            .max()
            .unwrap();
        let bx: Vec<Rational> = payoff.iter().map(|row| dot(row, &sol.x_star)).collect();
        let inf_at_x = min_over_y(&y, &bx)?;
        ensure(
            sum(&sol.x_weights).is_one() && sol.x_weights.iter().all(|w| !w.is_negative()),
            || format!("instance {idx}: x weights not convex"),
        )?;
        ensure(in_y(&y, &sol.y_star), || {
            format!("instance {idx}: y* outside Y")
        })?;
        ensure(sup_at_y == sol.value && inf_at_x == sol.value, || {
            format!(
                "instance {idx}: sup at y* {sup_at_y}, inf at x* {inf_at_x}, value {}",
                sol.value
            )
        })?;
    }
    Ok(format!("{total} instances, zero gap"))
}

struct HsCase {
    inst: HsInstance,
    kind: DSetKind,
}

fn random_pair(rng: &mut ChaCha8Rng) -> (AmbiguitySet, AmbiguitySet) {
    let n = rng.gen_range(2..=8usize);
    let space = SampleSpace::numbered(n).unwrap();
    let all: Vec<usize> = (0..n).collect();
    let ps: Vec<Vec<Rational>> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let width = rng.gen_range(1..=n);
            let allowed: Vec<usize> = all.choose_multiple(rng, width).cloned().collect();
            probability(rng, n, &allowed)
        })
        .collect();
    let charged: Vec<usize> = all
        .iter()
        .cloned()
        .filter(|&i| ps.iter().any(|p| p[i].is_positive()))
        .collect();
    let qs = (0..rng.gen_range(1..=3))
        .map(|_| {
            let width = rng.gen_range(1..=charged.len());
            let allowed: Vec<usize> = charged.choose_multiple(rng, width).cloned().collect();
            probability(rng, n, &allowed)
        })
        .collect();
    (
        AmbiguitySet::from_masses(&space, ps).unwrap(),
        AmbiguitySet::from_masses(&space, qs).unwrap(),
    )
}

fn masses(set: &AmbiguitySet) -> Vec<Vec<Rational>> {
    set.vertices().iter().map(|v| v.mass().to_vec()).collect()
}

/// Brute-force hypothesis oracle over all events of the full space.
fn oracle_holds(
    p: &[Vec<Rational>],
    q: &[Vec<Rational>],
    eps: &Rational,
    delta: &Rational,
    kind: DSetKind,
) -> bool {
    let n = p[0].len();
    subsets(n).all(|a| match kind {
        DSetKind::Primal => {
            !p.iter().any(|v| mass(v, &a) >= *eps) || q.iter().any(|v| mass(v, &a) >= *delta)
        }
        DSetKind::Dual => {
            !p.iter().any(|v| mass(v, &a) < *delta) || q.iter().any(|v| mass(v, &a) < *eps)
        }
    })
}

/// Largest delta for which the hypothesis holds, by brute force; `None` when
/// every positive delta works.
fn oracle_modulus(
    p: &[Vec<Rational>],
    q: &[Vec<Rational>],
    eps: &Rational,
    kind: DSetKind,
) -> Option<Rational> {
    let n = p[0].len();
    subsets(n)
        .filter_map(|a| match kind {
            DSetKind::Primal => p
                .iter()
                .any(|v| mass(v, &a) >= *eps)
                .then(|| q.iter().map(|v| mass(v, &a)).max().unwrap()),
            DSetKind::Dual => q
                .iter()
                .all(|v| mass(v, &a) >= *eps)
                .then(|| p.iter().map(|v| mass(v, &a)).min().unwrap()),
        })
        .min()
}

fn criterion_4(rng: &mut ChaCha8Rng, cases: &mut Vec<HsCase>) -> Check {
    let eps_choices = [
        rat(1, 10),
        rat(1, 8),
        rat(1, 5),
        rat(1, 4),
        rat(3, 10),
        rat(1, 3),
        rat(2, 5),
        rat(1, 2),
    ];
    let (mut primal, mut dual, mut tried) = (0, 0, 0);
    while primal < 300 || dual < 300 {
        tried += 1;
        if tried > 20_000 {
            return Err(format!(
                "only {primal} primal and {dual} dual instances satisfied the hypothesis"
            ));
        }
        let (p, q) = random_pair(rng);
        let (pm, qm) = (masses(&p), masses(&q));
        let eps = eps_choices.choose(rng).unwrap().clone();
        let kind = if primal < 300 && (dual >= 300 || rng.gen_bool(0.5)) {
            DSetKind::Primal
        } else {
            DSetKind::Dual
        };
        let delta = match oracle_modulus(&pm, &qm, &eps, kind) {
            Some(m) if m.is_positive() => {
                let m = if kind == DSetKind::Primal {
                    m
                } else {
                    m.min(Rational::one())
                };
                m / int(rng.gen_range(1..=3))
            }
            Some(_) => continue,
            None => rat(1, 2),
        };
        let inst = HsInstance::new(p.clone(), q.clone(), eps.clone(), delta.clone())
            .map_err(|e| e.to_string())?;
        let check = match kind {
            DSetKind::Primal => check_hypothesis_primal(&inst),
            DSetKind::Dual => check_hypothesis_dual(&inst),
        }
        .map_err(|e| e.to_string())?;
        ensure(
            check.holds == oracle_holds(&pm, &qm, &eps, &delta, kind),
            || format!("hypothesis check disagrees with brute force ({kind:?})"),
        )?;
        if !check.holds {
            return Err(format!(
                "delta at the modulus should satisfy the {kind:?} hypothesis"
            ));
        }
        let n = pm[0].len();
        let two = int(2);
        for pv in p.vertices() {
            let w = match kind {
                DSetKind::Primal => construct_hs_witness(&inst, pv),
                DSetKind::Dual => construct_dual_hs_witness(&inst, pv),
            }
            .map_err(|e| format!("{kind:?} witness: {e}"))?;
            let mixed = q.mixture(&w.weights).map_err(|e| e.to_string())?;
            ensure(mixed == w.q_star, || "Q* is not the stated mixture".into())?;
            let qs = w.q_star.mass();
            for a in subsets(n) {
                let pa = mass(pv.mass(), &a);
                let qa = mass(qs, &a);
                let ok = match kind {
                    DSetKind::Primal => pa < &two * &eps || qa >= &eps * &delta / &two,
                    DSetKind::Dual => pa >= &eps * &delta || qa < &two * &eps,
                };
                ensure(ok, || {
                    format!("{kind:?}: event {a:?} breaks the conclusion")
                })?;
            }
        }
        match kind {
            DSetKind::Primal => primal += 1,
            DSetKind::Dual => dual += 1,
        }
        cases.push(HsCase { inst, kind });
    }
    Ok(format!(
        "{primal} primal and {dual} dual instances, every event checked"
    ))
}

fn criterion_5(cases: &[HsCase]) -> Check {
    let mut checked = 0;
    for c in cases {
        let (eps, delta) = (&c.inst.epsilon, &c.inst.delta);
        for p in c.inst.p.vertices() {
            let v = basic_lemma_value(&c.inst, p, c.kind).map_err(|e| e.to_string())?;
            match c.kind {
                DSetKind::Primal => {
                    ensure(v >= eps * delta, || format!("primal value {v} < eps delta"))?
                }
                DSetKind::Dual => ensure(v <= int(2) * eps, || format!("dual value {v} > 2 eps"))?,
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} lemma values"))
}

fn control_file(positive: bool) -> SequenceFile {
    let market = |n: i64| MarketFile {
        outcomes: vec!["up".into(), "down".into()],
        d: 1,
        s0: vec![Rat(int(0))],
        s1: vec![
            vec![Rat(int(1))],
            vec![Rat(if positive { rat(-1, n) } else { int(-1) })],
        ],
        ambiguity_vertices: vec![vec![Rat(rat(1, 2)), Rat(rat(1, 2))]],
        max_enum: None,
    };
    SequenceFile {
        markets: (1..=20).map(market).collect(),
    }
}

fn control_sequence(positive: bool) -> MarketSequence {
    let file = control_file(positive);
    MarketSequence::new(
        file.markets
            .iter()
            .map(|m| m.to_market(EnumerationCap::DEFAULT).unwrap())
            .collect(),
    )
    .unwrap()
}

fn sequence_inputs(positive: bool) -> Inputs {
    Inputs {
        sequence: Some(control_file(positive)),
        alpha_grid: Some(default_grid().into_iter().map(Rat).collect()),
        schedule: Some(default_c_schedule(20).into_iter().map(Rat).collect()),
        max_enum: 20,
        ..Inputs::default()
    }
}

fn criterion_6() -> Check {
    let seq = control_sequence(true);
    let w = scan_aa1(&seq, &default_grid(), &default_c_schedule(20))
        .map_err(|e| e.to_string())?
        .ok_or("no AA1 witness on the positive control")?;
    ensure(w.alpha == rat(1, 2), || format!("alpha {}", w.alpha))?;
    ensure(w.verify(&seq), || "witness does not verify".into())?;
    let bounds = w.martingale_bounds(&seq).map_err(|e| e.to_string())?;
    for (k, (e, (worst, bound))) in w.entries.iter().zip(&bounds).enumerate() {
        ensure(w.c[k] == rat(1, k as i64 + 1), || {
            format!("c_{} = {}", k + 1, w.c[k])
        })?;
        let n = e.market as i64;
        ensure(*worst == rat(1, n + 1), || {
            format!("market {n}: max Q = {worst}")
        })?;
        ensure(worst <= bound, || format!("market {n}: {worst} > {bound}"))?;
    }
    let cert = emit_named("scan-aa1", &sequence_inputs(true)).map_err(|e| e.to_string())?;
    ensure(cert.certificate.witness["alpha"] == "1/2", || {
        "CLI alpha differs".into()
    })?;
    Ok(format!(
        "alpha 1/2 along {} markets, c_k = 1/k",
        w.entries.len()
    ))
}

fn criterion_7() -> Check {
    let seq = control_sequence(false);
    let grid = default_grid();
    let table = certify_moduli(&seq, &grid, DSetKind::Primal).map_err(|e| e.to_string())?;
    ensure(table.uniform_delta.iter().all(|d| *d == rat(1, 2)), || {
        format!(
            "uniform deltas {:?}",
            table
                .uniform_delta
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
        )
    })?;
    let aa1 = scan_aa1(&seq, &grid, &default_c_schedule(20)).map_err(|e| e.to_string())?;
    let aa2 = scan_aa2(&seq, &grid, &default_target_levels(20)).map_err(|e| e.to_string())?;
    ensure(aa1.is_none() && aa2.is_none(), || {
        "a scanner found an arbitrage".into()
    })?;
    let cert = emit_named(
        "certify-naa1",
        &Inputs {
            epsilon_grid: Some(grid.into_iter().map(Rat).collect()),
            alpha_grid: None,
            schedule: None,
            ..sequence_inputs(false)
        },
    )
    .map_err(|e| e.to_string())?;
    ensure(
        cert.certificate.witness["uniform_delta"]
            .as_array()
            .unwrap()
            .iter()
            .all(|d| d == "1/2"),
        || "CLI table differs".into(),
    )?;
    Ok("uniform delta 1/2 at every grid point; both scanners empty".into())
}

fn criterion_8() -> Check {
    let seq = control_sequence(false);
    let c = build_contiguous_sequence(&seq, None).map_err(|e| e.to_string())?;
    let p = vec![rat(1, 2), rat(1, 2)];
    let mut pairs = 0;
    for (k, e) in c.per_market.iter().enumerate() {
        let n = k + 1;
        ensure(sum(&e.weights).is_one(), || {
            format!("market {n}: weights do not sum to 1")
        })?;
        ensure(e.p.mass() == p.as_slice(), || {
            format!("market {n}: unexpected P")
        })?;
        for m in 1..=n {
            let (eps, delta) = &c.schedule[m - 1];
            ensure(*eps == rat(1, m as i64), || format!("eps_{m} = {eps}"))?;
            let beta = pow2_neg(m as u32) * eps * delta / int(2);
            for a in subsets(2) {
                let pa = mass(&p, &a);
                let qa = mass(e.q.mass(), &a);
                ensure(pa < int(2) * eps || qa >= beta, || {
                    format!("n={n}, m={m}, event {a:?}")
                })?;
            }
            pairs += 1;
        }
    }
    let mut inputs = sequence_inputs(false);
    inputs.alpha_grid = None;
    inputs.schedule = None;
    emit_named("build-contiguous", &inputs).map_err(|e| e.to_string())?;
    Ok(format!("{pairs} (n, m) pairs verified by enumeration"))
}

fn pair_inputs(eps: Rational, delta: Option<Rational>) -> Inputs {
    Inputs {
        pair: Some(PairFile {
            outcomes: vec!["w1".into(), "w2".into(), "w3".into()],
            p_vertices: vec![
                vec![Rat(rat(1, 2)), Rat(rat(1, 2)), Rat(int(0))],
                vec![Rat(rat(1, 5)), Rat(rat(1, 5)), Rat(rat(3, 5))],
            ],
            q_vertices: vec![
                vec![Rat(rat(1, 3)), Rat(rat(1, 3)), Rat(rat(1, 3))],
                vec![Rat(rat(1, 10)), Rat(rat(7, 10)), Rat(rat(1, 5))],
            ],
            max_enum: None,
        }),
        epsilon: Some(Rat(eps)),
        delta: delta.map(Rat),
        max_enum: 20,
        ..Inputs::default()
    }
}

fn market_file(m: &Market) -> MarketFile {
    MarketFile {
        outcomes: m.space().labels().to_vec(),
        d: m.num_assets(),
        s0: m.s0().iter().cloned().map(Rat).collect(),
        s1: m
            .s1()
            .iter()
            .map(|r| r.iter().cloned().map(Rat).collect())
            .collect(),
        ambiguity_vertices: m
            .ambiguity()
            .vertices()
            .iter()
            .map(|v| v.mass().iter().cloned().map(Rat).collect())
            .collect(),
        max_enum: None,
    }
}

fn all_certificates(rng: &mut ChaCha8Rng) -> Result<Vec<Certificate>, String> {
    let mut jobs: Vec<(&str, Inputs)> = Vec::new();
    for _ in 0..12 {
        let m = random_market(rng);
        let base = Inputs {
            market: Some(market_file(&m)),
            max_enum: 20,
            ..Inputs::default()
        };
        jobs.push(("check-na", base.clone()));
        jobs.push(("martingale-polytope", base.clone()));
        jobs.push(("ftap", base.clone()));
        let m = loop {
            let m = random_market(rng);
            if check_ftap(&m).map_err(|e| e.to_string())?.na.holds {
                break m;
            }
        };
        let payoff = (0..m.space().len())
            .map(|_| Rat(ratio(rng, -10, 10)))
            .collect();
        jobs.push((
            "superhedge",
            Inputs {
                market: Some(market_file(&m)),
                payoff: Some(payoff),
                ..base
            },
        ));
    }
    for (eps, delta) in [
        (rat(1, 4), rat(1, 10)),
        (rat(1, 2), rat(1, 5)),
        (rat(1, 10), rat(1, 2)),
    ] {
        jobs.push(("hs-check", pair_inputs(eps.clone(), Some(delta.clone()))));
        jobs.push(("hs-witness", pair_inputs(eps.clone(), Some(delta.clone()))));
        jobs.push(("hs-dual-witness", pair_inputs(eps.clone(), Some(delta))));
        jobs.push(("hs-modulus", pair_inputs(eps, None)));
    }
    let mut dual = pair_inputs(rat(1, 4), None);
    dual.kind = Some("dual".into());
    jobs.push(("hs-modulus", dual));
    for positive in [true, false] {
        let scan = sequence_inputs(positive);
        jobs.push(("scan-aa1", scan.clone()));
        let mut aa2 = scan.clone();
        aa2.schedule = Some(default_target_levels(20).into_iter().map(Rat).collect());
        jobs.push(("scan-aa2", aa2));
        let plain = Inputs {
            alpha_grid: None,
            schedule: None,
            ..scan
        };
        let table = Inputs {
            epsilon_grid: Some(default_grid().into_iter().map(Rat).collect()),
            ..plain.clone()
        };
        jobs.push(("certify-naa1", table.clone()));
        jobs.push(("certify-naa2", table));
        jobs.push(("build-contiguous", plain.clone()));
        jobs.push((
            "weak-contiguity",
            Inputs {
                epsilon: Some(Rat(rat(1, 2))),
                ..plain
            },
        ));
    }
    // A short sequence where the second-kind scanner succeeds.
    let aa2_seq = SequenceFile {
        markets: (1..=4)
            .map(|n: i64| MarketFile {
                outcomes: vec!["up".into(), "down".into()],
                d: 1,
                s0: vec![Rat(int(0))],
                s1: vec![vec![Rat(int(1))], vec![Rat(-int(n))]],
                ambiguity_vertices: vec![vec![Rat(rat(n, n + 1)), Rat(rat(1, n + 1))]],
                max_enum: None,
            })
            .collect(),
    };
    jobs.push((
        "scan-aa2",
        Inputs {
            sequence: Some(aa2_seq),
            alpha_grid: Some(default_grid().into_iter().map(Rat).collect()),
            schedule: Some(default_target_levels(4).into_iter().map(Rat).collect()),
            max_enum: 20,
            ..Inputs::default()
        },
    ));
    jobs.into_iter()
        .map(|(cmd, inputs)| {
            emit_named(cmd, &inputs)
                .map(|e| e.certificate)
                .map_err(|e| format!("{cmd}: {e}"))
        })
        .collect()
}

fn rational_leaves(v: &Value, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    match v {
        Value::String(s) if robust_ftap::parse_rational(s).is_ok() => out.push(path.clone()),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                path.push(i.to_string());
                rational_leaves(item, path, out);
                path.pop();
            }
        }
        Value::Object(map) => {
            for (k, item) in map {
                path.push(k.clone());
                rational_leaves(item, path, out);
                path.pop();
            }
        }
        _ => {}
    }
}

fn leaf_mut<'a>(v: &'a mut Value, path: &[String]) -> &'a mut Value {
    path.iter().fold(v, |node, key| match node {
        Value::Array(items) => &mut items[key.parse::<usize>().unwrap()],
        Value::Object(map) => map.get_mut(key).unwrap(),
        _ => unreachable!(),
    })
}

fn criterion_9(rng: &mut ChaCha8Rng) -> Check {
    let certs = all_certificates(rng)?;
    let mut commands: Vec<&str> = certs.iter().map(|c| c.command.as_str()).collect();
    commands.sort();
    commands.dedup();
    ensure(commands.len() == 14, || {
        format!("only {} commands covered", commands.len())
    })?;
    for c in &certs {
        let round: Certificate = serde_json::from_str(&serde_json::to_string(c).unwrap()).unwrap();
        let r = verify_certificate(&round);
        ensure(r.accepted, || {
            format!("{} rejected: {:?}", c.command, r.reason)
        })?;
    }
    let mutations = 200;
    let mut by_section = std::collections::BTreeMap::<String, usize>::new();
    for i in 0..mutations {
        let cert = certs.choose(rng).unwrap();
        let mut value = serde_json::to_value(cert).unwrap();
        let mut leaves = Vec::new();
        rational_leaves(&value, &mut Vec::new(), &mut leaves);
        let path = leaves.choose(rng).unwrap().clone();
        let leaf = leaf_mut(&mut value, &path);
        let original = leaf.as_str().unwrap().to_string();
        let digits: Vec<usize> = original
            .char_indices()
            .filter(|(_, ch)| ch.is_ascii_digit())
            .map(|(i, _)| i)
            .collect();
        let at = *digits.choose(rng).unwrap();
        let old = original.as_bytes()[at];
        let new = loop {
            let d = b'0' + rng.gen_range(0..10u8);
            if d != old {
                break d;
            }
        };
        let mut bytes = original.into_bytes();
        bytes[at] = new;
        *leaf = Value::String(String::from_utf8(bytes).unwrap());
        *by_section.entry(path[0].clone()).or_default() += 1;
        let accepted = match serde_json::from_value::<Certificate>(value) {
            Ok(c) => verify_certificate(&c).accepted,
            Err(_) => false,
        };
        ensure(!accepted, || {
            format!("mutation {i} at {} was accepted", path.join("."))
        })?;
    }
    Ok(format!(
        "{} certificates over {} commands accepted; {mutations} digit flips rejected ({:?})",
        certs.len(),
        commands.len(),
        by_section
    ))
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f7a9);
    let mut na_markets = Vec::new();
    let mut hs_cases = Vec::new();
    let mut failures = 0;
    let mut report = |n: u32, name: &str, limit: Option<f64>, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if secs > l => Err(format!("took {secs:.1}s, limit {l}s")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("[PASS] criterion {n}: {name}: {detail} ({secs:.2}s)"),
            Err(why) => {
                failures += 1;
                println!("[FAIL] criterion {n}: {name}: {why} ({secs:.2}s)");
            }
        }
    };
    report(1, "FTAP equivalence", Some(60.0), &mut || {
        criterion_1(&mut rng, &mut na_markets)
    });
    report(2, "superhedging duality", None, &mut || {
        criterion_2(&mut rng, &na_markets)
    });
    report(3, "minimax exchange", None, &mut || criterion_3(&mut rng));
    let start = Instant::now();
    report(4, "quantitative Halmos-Savage", Some(120.0), &mut || {
        criterion_4(&mut rng, &mut hs_cases)
    });
    let remaining = 120.0 - start.elapsed().as_secs_f64();
    report(
        5,
        "basic lemma bounds",
        Some(remaining.max(0.0)),
        &mut || criterion_5(&hs_cases),
    );
    report(
        6,
        "large-market positive control",
        Some(5.0),
        &mut criterion_6,
    );
    report(
        7,
        "large-market negative control",
        Some(5.0),
        &mut criterion_7,
    );
    report(8, "contiguous sequence", None, &mut criterion_8);
    report(9, "certificate self-verification", None, &mut || {
        criterion_9(&mut rng)
    });
    if failures > 0 {
        std::process::exit(1);
    }
}
