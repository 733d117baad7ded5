mod common;

use common::*;
use num_traits::{One, Zero};
use proptest::prelude::*;
use robust_ftap::halmos_savage::*;
use robust_ftap::measures::{quasi_sure_support, AmbiguitySet, SampleSpace};
use robust_ftap::{rat, EnumerationCap, Rational};

fn levels() -> impl Strategy<Value = Rational> {
    (1i64..=5).prop_map(|k| rat(k, 10))
}

/// (P, Q) with every Q vertex supported inside the quasi-sure support of P.
fn pair(max_n: usize) -> impl Strategy<Value = (AmbiguitySet, AmbiguitySet)> {
    (1usize..=max_n)
        .prop_flat_map(|n| {
            (
                ambiguity(n, 3),
                proptest::collection::vec(prob_vector(n), 1..=3),
            )
        })
        .prop_map(|(p, raw)| {
            let support = quasi_sure_support(&p);
            let allowed: Vec<bool> = (0..p.space().len()).map(|i| support.contains(i)).collect();
            let fallback = p.vertices()[0].mass().to_vec();
            let qs = raw
                .iter()
                .map(|v| restrict_to(v, &allowed, &fallback))
                .collect();
            let q = AmbiguitySet::from_masses(p.space(), qs).unwrap();
            (p, q)
        })
}

/// Direct evaluation of the primal hypothesis over every subset of the space.
fn primal_oracle(p: &AmbiguitySet, q: &AmbiguitySet, eps: &Rational, delta: &Rational) -> bool {
    all_subsets(p.space().len()).iter().all(|a| {
        let charged = p.vertices().iter().any(|v| mass_of(v.mass(), a) >= *eps);
        !charged || q.vertices().iter().any(|v| mass_of(v.mass(), a) >= *delta)
    })
}

fn dual_oracle(p: &AmbiguitySet, q: &AmbiguitySet, eps: &Rational, delta: &Rational) -> bool {
    all_subsets(p.space().len()).iter().all(|a| {
        let light = p.vertices().iter().any(|v| mass_of(v.mass(), a) < *delta);
        !light || q.vertices().iter().any(|v| mass_of(v.mass(), a) < *eps)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hypothesis_checks_match_direct_enumeration((p, q) in pair(6), eps in levels(), delta in levels()) {
        let inst = HsInstance::new(p.clone(), q.clone(), eps.clone(), delta.clone()).unwrap();
        prop_assert_eq!(check_hypothesis_primal(&inst).unwrap().holds, primal_oracle(&p, &q, &eps, &delta));
        prop_assert_eq!(check_hypothesis_dual(&inst).unwrap().holds, dual_oracle(&p, &q, &eps, &delta));
    }

    #[test]
    fn lemma_bounds_and_witnesses((p, q) in pair(6), eps in levels(), delta in levels(), pick in 0usize..3) {
        let inst = HsInstance::new(p.clone(), q.clone(), eps.clone(), delta.clone()).unwrap();
        let pv = p.vertices()[pick % p.vertices().len()].clone();
        if check_hypothesis_primal(&inst).unwrap().holds {
            if rat(2, 1) * &eps <= Rational::one() {
                let v = basic_lemma_value(&inst, &pv, DSetKind::Primal).unwrap();
                prop_assert!(v >= &eps * &delta);
            }
            let w = construct_hs_witness(&inst, &pv).unwrap();
            prop_assert!(w.verify(&inst).unwrap());
            prop_assert!(w.guaranteed_bound >= &eps * &delta / rat(2, 1));
        }
        if check_hypothesis_dual(&inst).unwrap().holds {
            let v = basic_lemma_value(&inst, &pv, DSetKind::Dual).unwrap();
            prop_assert!(v <= rat(2, 1) * &eps);
            let w = construct_dual_hs_witness(&inst, &pv).unwrap();
            prop_assert!(w.verify(&inst).unwrap());
            prop_assert!(w.guaranteed_bound <= dual_inner_threshold(&eps));
        }
    }

    #[test]
    fn modulus_is_monotone_and_sharp((p, q) in pair(6), a in levels(), b in levels()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let cap = EnumerationCap::DEFAULT;
        let m_lo = hs_modulus(&p, &q, &lo, cap).unwrap();
        let m_hi = hs_modulus(&p, &q, &hi, cap).unwrap();
        prop_assert!(m_lo <= m_hi);
        if m_lo.is_zero() || m_lo > Rational::one() {
            return Ok(());
        }
        let at = HsInstance::new(p.clone(), q.clone(), lo.clone(), m_lo.clone()).unwrap();
        prop_assert!(check_hypothesis_primal(&at).unwrap().holds);
        let above = HsInstance::new(p, q, lo, m_lo + rat(1, 1000)).unwrap();
        prop_assert!(!check_hypothesis_primal(&above).unwrap().holds);
    }

    #[test]
    fn indicator_optimum_dominates_relaxation((p, q) in pair(5), eps in levels()) {
        let inst = HsInstance::new(p.clone(), q, eps, rat(1, 10)).unwrap();
        let pv = p.vertices()[0].clone();
        if let Some(ind) = indicator_lemma_value(&inst, &pv).unwrap() {
            let relaxed = basic_lemma_value(&inst, &pv, DSetKind::Primal).unwrap();
            prop_assert!(ind >= relaxed);
        }
    }

    #[test]
    fn d_set_certificates_bound_every_indicator((p, q) in pair(5), eps in levels(), delta in levels()) {
        let inst = HsInstance::new(p.clone(), q.clone(), eps, delta).unwrap();
        let pv = p.vertices()[0].clone();
        let qv = q.vertices()[0].clone();
        for kind in [DSetKind::Primal, DSetKind::Dual] {
            let d = DSet::new(&inst, &pv, kind);
            let Ok(cert) = d_set_certificate(&d, &qv) else { continue };
            prop_assert!(cert.verify(&d, &qv));
            for a in all_subsets(p.space().len()) {
                let h: Vec<Rational> = (0..p.space().len())
                    .map(|i| if a.contains(&i) { Rational::one() } else { Rational::zero() })
                    .collect();
                if d.contains(&h) {
                    let e = qv.expectation(&h);
                    match kind {
                        DSetKind::Primal => prop_assert!(e >= cert.bound),
                        DSetKind::Dual => prop_assert!(e <= cert.bound),
                    }
                }
            }
        }
    }
}

#[test]
fn all_outcomes_polar_except_one() {
    let space = SampleSpace::numbered(3).unwrap();
    let p = AmbiguitySet::from_masses(&space, vec![vec![rat(0, 1), rat(1, 1), rat(0, 1)]]).unwrap();
    let inst = HsInstance::new(p.clone(), p.clone(), rat(1, 4), rat(1, 2)).unwrap();
    let w = construct_hs_witness(&inst, &p.vertices()[0]).unwrap();
    assert!(w.verify(&inst).unwrap());
    assert_eq!(w.guaranteed_bound, rat(1, 2));
}
