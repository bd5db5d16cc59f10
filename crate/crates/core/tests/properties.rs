use gl2measure::checks::{run_property, INVARIANTS, ORACLES};
use gl2measure::matrix::{coset_compare, enumerate_cosets, index, Index, Relation};
use gl2measure::sample::Sampler;
use gl2measure::value::{geometric_closed_form, rat};
use gl2measure::{
    f_integrate, f_mu, integrate, Coset, FDDSet, FieldElem, GlobalParams, Level, MeasureContext, Rational, Shell,
    SimpleFn, ValueElem,
};
use num_bigint::BigUint;
use proptest::prelude::*;

fn params(q: u32) -> GlobalParams {
    GlobalParams::new(q).unwrap()
}

fn value() -> impl Strategy<Value = ValueElem> {
    prop::collection::vec((-3i64..6, -5i64..=5, 1i64..=4), 0..4)
        .prop_map(|ts| ValueElem::from_terms(ts.into_iter().map(|(e, n, d)| (e, rat(n, d)))))
}

fn small_rat() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

fn q() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3u32)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn value_ring_laws(a in value(), b in value(), c in value()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, ValueElem::zero());
        prop_assert_eq!(&a * &ValueElem::one(), a.clone());
    }

    #[test]
    fn rendering_parses_back(a in value()) {
        prop_assert_eq!(a.to_string().parse::<ValueElem>().unwrap(), a);
    }

    #[test]
    fn dominant_term_is_lowest_monomial(a in value()) {
        match a.min_exponent() {
            None => prop_assert!(a.dominant_term().is_err()),
            Some(e) => {
                let d = a.dominant_term().unwrap();
                prop_assert_eq!(d, ValueElem::monomial(a.coeff(e), e));
            }
        }
    }

    #[test]
    fn geometric_sums_match_partial_sums(first in -2i64..3, c in small_rat(), r in small_rat(), step in 1i64..3, t in 0i64..8) {
        let got = geometric_closed_form(first, &c, &r, step, t).unwrap();
        let mut want = ValueElem::zero();
        let (mut k, mut ck) = (first, c.clone());
        while k <= t {
            want = &want + &ValueElem::monomial(ck.clone(), k);
            ck *= &r;
            k += step;
        }
        prop_assert_eq!(got.truncated_at(), Some(t));
        for e in first..=t {
            prop_assert_eq!(got.coeff(e), want.coeff(e));
        }
    }

    #[test]
    fn real_geometric_sums_close(c in small_rat(), n in -5i64..=5) {
        let r = rat(n, 6);
        let s = geometric_closed_form(0, &c, &r, 0, 8).unwrap();
        prop_assert_eq!(s.coeff(0) * (Rational::from_integer(1.into()) - &r), c.clone());
        prop_assert!(geometric_closed_form(0, &c, &rat(7, 6), 0, 8).is_err());
    }

    #[test]
    fn valuation_is_additive(q in q(), seed in any::<u64>()) {
        let p = params(q);
        let mut s = Sampler::new(&p, seed).unwrap();
        let x = s.monomial().unwrap().add(&s.in_ideal(Level::new(3, 2)).unwrap()).unwrap();
        let y = s.unit().unwrap();
        let xy = x.mul(&y).unwrap();
        prop_assert_eq!(xy.valuation().unwrap(), x.valuation().unwrap());
        let z = s.monomial().unwrap();
        let vz = z.valuation().unwrap();
        let vx = x.valuation().unwrap();
        prop_assert_eq!(x.mul(&z).unwrap().valuation().unwrap(), Level::new(vx.i + vz.i, vx.j + vz.j));
        prop_assert_eq!(x.mul(&z).unwrap().module_of().unwrap(), &x.module_of().unwrap() * &z.module_of().unwrap());
    }

    #[test]
    fn unit_inverse(q in q(), seed in any::<u64>()) {
        let p = params(q);
        let mut s = Sampler::new(&p, seed).unwrap();
        let u = s.unit().unwrap();
        let v = u.inv().unwrap();
        prop_assert!(u.mul(&v).unwrap().agrees_with(&FieldElem::one(&p)).unwrap());
    }

    #[test]
    fn tower_law(q in q(), i in 1i32..3, a in 0i32..2, b in 0i32..2, j in 0i32..2) {
        let (l0, l1, l2) = (Level::new(i, j), Level::new(i + a, j), Level::new(i + a + b, j));
        let f = |x, y| match index(q, x, y).unwrap() { Index::Finite(n) => n, Index::Infinite => unreachable!() };
        prop_assert_eq!(f(l0, l1) * f(l1, l2), f(l0, l2));
        prop_assert_eq!(index(q, l0, Level::new(i, j + 1)).unwrap(), Index::Infinite);
    }

    #[test]
    fn enumerated_cosets_are_distinct(q in q(), i in 1i32..3, j in 0i32..2) {
        let p = params(q);
        let (a, b) = (Level::new(i, j), Level::new(i + 1, j));
        let reps = enumerate_cosets(&p, a, b).unwrap();
        prop_assert_eq!(BigUint::from(reps.len()), BigUint::from(q).pow(4));
        let cosets: Vec<Coset> = reps.into_iter().map(|g| Coset::new(g, b).unwrap()).collect();
        let parent = Coset::subgroup(&p, a).unwrap();
        for (ix, x) in cosets.iter().enumerate() {
            prop_assert!(parent.contains(x.rep()).unwrap());
            for y in &cosets[ix + 1..] {
                prop_assert_eq!(coset_compare(x, y).unwrap(), Relation::Disjoint);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Every randomised suite, one case per drawn seed.
    #[test]
    fn suites_hold_for_any_seed(q in q(), seed in any::<u64>()) {
        let p = params(q);
        for (name, case) in INVARIANTS.iter().chain(ORACLES) {
            let r = run_property(&p, name, *case, seed, 1);
            prop_assert!(r.passed(), "{}: {:?}", name, r.counterexample);
        }
    }

    #[test]
    fn measure_is_additive(q in q(), seed in any::<u64>()) {
        let p = params(q);
        let ctx = MeasureContext::new(p.clone());
        let mut s = Sampler::new(&p, seed).unwrap();
        let a = s.dddset(3).unwrap();
        let b = s.dddset(3).unwrap();
        let lhs = &ctx.mu(&a.union(&b).unwrap()) + &ctx.mu(&a.intersect(&b).unwrap());
        prop_assert_eq!(lhs, &ctx.mu(&a) + &ctx.mu(&b));
        prop_assert_eq!(&ctx.mu(&a.difference(&b).unwrap()) + &ctx.mu(&a.intersect(&b).unwrap()), ctx.mu(&a));
    }

    #[test]
    fn reduce_is_idempotent(q in q(), seed in any::<u64>()) {
        let p = params(q);
        let ctx = MeasureContext::new(p.clone());
        let mut s = Sampler::new(&p, seed).unwrap();
        let a = s.dddset(3).unwrap();
        let b = s.dddset(3).unwrap().difference(&a).unwrap();
        let r = b.reduce().unwrap();
        prop_assert!(r.is_reduced().unwrap());
        prop_assert_eq!(r.reduce().unwrap(), r.clone());
        prop_assert!(r.set_equal(&b, &p).unwrap());
        prop_assert_eq!(ctx.mu(&r), ctx.mu(&b));
    }

    #[test]
    fn children_partition_a_coset(q in q(), seed in any::<u64>()) {
        let p = params(q);
        let ctx = MeasureContext::new(p.clone());
        let mut s = Sampler::new(&p, seed).unwrap();
        let level = s.level();
        let c = Coset::new(s.k_elem().unwrap(), level).unwrap();
        let kids = c.children(&p).unwrap();
        let total: ValueElem = kids.iter().map(|k| ctx.mu_level(k.level())).sum();
        prop_assert_eq!(total, ctx.mu_level(level));
        let g = s.point_near(&gl2measure::DDDSet::coset(c.clone())).unwrap();
        let hits = kids.iter().filter(|k| k.contains(&g).unwrap()).count();
        prop_assert_eq!(hits, usize::from(c.contains(&g).unwrap()));
    }

    #[test]
    fn integral_is_linear(q in q(), seed in any::<u64>()) {
        let p = params(q);
        let ctx = MeasureContext::new(p.clone());
        let mut s = Sampler::new(&p, seed).unwrap();
        let (a, b) = (s.dddset(2).unwrap(), s.dddset(2).unwrap());
        let (x, y) = (s.value(), s.value());
        let f = SimpleFn::scaled_indicator(x.clone(), &a);
        let g = SimpleFn::scaled_indicator(y.clone(), &b);
        let sum = f.add(&g).unwrap();
        prop_assert_eq!(integrate(&ctx, &sum), &integrate(&ctx, &f) + &integrate(&ctx, &g));
        prop_assert_eq!(integrate(&ctx, &f), &x * &ctx.mu(&a));
        let c = s.value();
        prop_assert_eq!(integrate(&ctx, &f.scale(&c)), &c * &integrate(&ctx, &f));
        let h = s.point_near(&a).unwrap();
        let want = if a.contains(&h).unwrap() { x.clone() } else { ValueElem::zero() };
        prop_assert_eq!(f.eval(&h).unwrap(), want);
    }

    #[test]
    fn f_measure_is_additive(q in q(), seed in any::<u64>()) {
        let p = params(q);
        let mut s = Sampler::new(&p, seed).unwrap();
        let c = s.f_ideal_coset().unwrap();
        let kids = c.children(&p).unwrap();
        prop_assert_eq!(kids.len(), q as usize);
        let total: ValueElem = kids.iter().map(|k| k.mu()).sum();
        prop_assert_eq!(&total, &c.mu());
        let holed = FDDSet::new(vec![c.clone()], vec![kids[0].clone()]).unwrap();
        prop_assert_eq!(&f_mu(&holed) + &kids[0].mu(), c.mu());
        let f = s.f_simple_fn().unwrap();
        let k = s.value();
        prop_assert_eq!(f_integrate(&f.scale(&k)), &k * &f_integrate(&f));
    }
}
