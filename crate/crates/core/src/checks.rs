//! Randomised property suites, shared by the command line `check` command
//! and the test suites.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::Rng;

use crate::error::Result;
use crate::field::Level;
use crate::field_integration::{f_integrate, factor_rhs, iterated_product_integral, lift_integral, lift_to_f, FSimpleFn};
use crate::integration::{convolve_k, SimpleFn};
use crate::matrix::{coset_compare, enumerate_cosets, Coset, Mat2, Relation};
use crate::measure::MeasureContext;
use crate::params::GlobalParams;
use crate::sample::Sampler;
use crate::sets::{common_refinement, full_k, full_k_at, is_refinement, DDDSet};
use crate::serial::dddset_to_doc;
use crate::value::ValueElem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Invariants,
    Oracle,
    All,
}

/// Outcome of one property over `cases` random instances.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: usize,
    /// Description of the first failing case.
    pub counterexample: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

type Case = fn(&mut Sampler, &MeasureContext) -> Result<Option<String>>;

pub const INVARIANTS: &[(&str, Case)] = &[
    ("normality", normality),
    ("trichotomy", trichotomy),
    ("ring_closure", ring_closure),
    ("presentation_independence", presentation_independence),
    ("refinement_soundness", refinement_soundness),
    ("left_invariance", left_invariance),
    ("right_invariance", right_invariance),
    ("fubini_orders", fubini_orders),
    ("lift_agreement", lift_agreement),
];

pub const ORACLES: &[(&str, Case)] = &[
    ("factorization", factorization),
    ("measure_formula", measure_formula),
    ("convolution_idempotent", convolution_idempotent),
];

fn sets_json(a: &DDDSet) -> String {
    serde_json::to_string(&dddset_to_doc(a)).expect("documents serialise")
}

fn seed_for(seed: u64, name: &str) -> u64 {
    let mut h = DefaultHasher::new();
    name.hash(&mut h);
    seed ^ h.finish()
}

pub fn run_property(p: &GlobalParams, name: &'static str, case: Case, seed: u64, count: usize) -> PropertyResult {
    let ctx = MeasureContext::new(p.clone());
    let mut s = match Sampler::new(p, seed_for(seed, name)) {
        Ok(s) => s,
        Err(e) => return PropertyResult { name, cases: 0, counterexample: Some(format!("setup failed: {e}")) },
    };
    for n in 0..count {
        let outcome = match case(&mut s, &ctx) {
            Ok(None) => continue,
            Ok(Some(c)) => c,
            Err(e) => format!("error: {e}"),
        };
        return PropertyResult { name, cases: n + 1, counterexample: Some(outcome) };
    }
    PropertyResult { name, cases: count, counterexample: None }
}

pub fn run_suite(p: &GlobalParams, suite: Suite, seed: u64, count: usize, parallel: bool) -> Vec<PropertyResult> {
    let props: Vec<(&'static str, Case)> = match suite {
        Suite::Invariants => INVARIANTS.to_vec(),
        Suite::Oracle => ORACLES.to_vec(),
        Suite::All => INVARIANTS.iter().chain(ORACLES).copied().collect(),
    };
    if !parallel {
        return props.into_iter().map(|(n, c)| run_property(p, n, c, seed, count)).collect();
    }
    std::thread::scope(|sc| {
        let handles: Vec<_> = props.into_iter().map(|(n, c)| sc.spawn(move || run_property(p, n, c, seed, count))).collect();
        handles.into_iter().map(|h| h.join().expect("property threads do not panic")).collect()
    })
}

fn normality(s: &mut Sampler, _: &MeasureContext) -> Result<Option<String>> {
    let g = s.k_elem()?;
    let level = s.level();
    let k = s.kij_elem(level)?;
    // g k g^{-1} = g k adj(g) / det g with det g a unit, so the exact
    // product g k adj(g) − det g·I decides membership without a series inverse.
    let d = g.det()?;
    let diff = g.mul(&k)?.mul(&g.adj())?.sub(&Mat2::identity(s.params()).scale(&d)?)?;
    let mut inside = true;
    for x in diff.entries() {
        inside &= x.in_ideal(level)?;
    }
    Ok((!inside).then(|| format!("g = {g}, k = {k}, level {level}")))
}

fn trichotomy(s: &mut Sampler, _: &MeasureContext) -> Result<Option<String>> {
    let a = Coset::new(s.k_elem()?, s.level())?;
    let b = match s.rng().gen_range(0..3) {
        0 => Coset::new(s.k_elem()?, s.level())?,
        1 => {
            let l = s.deeper(a.level());
            s.coset_inside(&a, l)?
        }
        _ => s.rerepresent(&a)?,
    };
    let rel = coset_compare(&a, &b)?;
    for _ in 0..4 {
        let from_a = a.rep().mul(&s.kij_elem(a.level())?)?;
        let from_b = b.rep().mul(&s.kij_elem(b.level())?)?;
        let ok = match rel {
            Relation::Equal => b.contains(&from_a)? && a.contains(&from_b)?,
            Relation::LeftContainsRight => a.contains(&from_b)?,
            Relation::RightContainsLeft => b.contains(&from_a)?,
            Relation::Disjoint => !b.contains(&from_a)? && !a.contains(&from_b)?,
        };
        if !ok {
            return Ok(Some(format!("{a} vs {b}: verdict {rel:?} contradicted by sampling")));
        }
    }
    Ok(None)
}

fn ring_closure(s: &mut Sampler, _: &MeasureContext) -> Result<Option<String>> {
    let p = s.params().clone();
    let a = s.dddset(3)?;
    let b = if s.rng().gen_bool(0.5) { s.dddset(3)? } else { s.rewrite(&a, 1)?.difference(&s.dddset(2)?)? };
    let ops = [("∩", a.intersect(&b)?), ("\\", a.difference(&b)?), ("∪", a.union(&b)?)];
    for (op, r) in &ops {
        if let Some(x) = disjointness_violation(r, &p)? {
            return Ok(Some(format!("A {op} B has overlapping components at {x}; A = {}, B = {}", sets_json(&a), sets_json(&b))));
        }
    }
    for _ in 0..12 {
        let x = if s.rng().gen_bool(0.5) { s.point_near(&a)? } else { s.point_near(&b)? };
        let (ia, ib) = (a.contains(&x)?, b.contains(&x)?);
        let expect = [ia && ib, ia && !ib, ia || ib];
        for ((op, r), want) in ops.iter().zip(expect) {
            let n = r.multiplicity(&x)?;
            if n > 1 || (n == 1) != want {
                return Ok(Some(format!("x = {x} in A {op} B: multiplicity {n}, expected {want}; A = {}, B = {}", sets_json(&a), sets_json(&b))));
            }
        }
    }
    Ok(None)
}

fn disjointness_violation(a: &DDDSet, p: &GlobalParams) -> Result<Option<String>> {
    let comps = a.components();
    for (ix, x) in comps.iter().enumerate() {
        for y in &comps[ix + 1..] {
            if let Some(g) = x.intersect(y)?.witness(p)? {
                return Ok(Some(g.to_string()));
            }
        }
    }
    Ok(None)
}

fn equal_pair(s: &mut Sampler) -> Result<(DDDSet, DDDSet)> {
    let a = s.dddset(3)?.reduce()?;
    let steps = s.rng().gen_range(1..=3);
    let b = s.rewrite(&a, steps)?;
    Ok((a, b))
}

fn presentation_independence(s: &mut Sampler, m: &MeasureContext) -> Result<Option<String>> {
    let (a, b) = equal_pair(s)?;
    if !a.set_equal(&b, s.params())? {
        return Ok(Some(format!("rewrite changed the set: A = {}, B = {}", sets_json(&a), sets_json(&b))));
    }
    let (ma, mb) = (m.mu(&a), m.mu(&b));
    Ok((ma != mb).then(|| format!("μ(A) = {ma}, μ(B) = {mb}; A = {}, B = {}", sets_json(&a), sets_json(&b))))
}

fn refinement_soundness(s: &mut Sampler, m: &MeasureContext) -> Result<Option<String>> {
    let p = s.params().clone();
    let (a, b) = equal_pair(s)?;
    let r = common_refinement(&a, &b, &p)?;
    let bound = (b.shell_count() + 1).pow(2);
    let show = || format!("A = {}, B = {}", sets_json(&a), sets_json(&b));
    if r.iterations > bound {
        return Ok(Some(format!("{} iterations exceed {bound}; {}", r.iterations, show())));
    }
    if !is_refinement(&a, &r.set, &p)? || !is_refinement(&b, &r.set, &p)? {
        return Ok(Some(format!("not a common refinement: R = {}; {}", sets_json(&r.set), show())));
    }
    let (ma, mb, mr) = (m.mu(&a), m.mu(&b), m.mu(&r.set));
    Ok((ma != mb || ma != mr).then(|| format!("μ(A) = {ma}, μ(B) = {mb}, μ(R) = {mr}; {}", show())))
}

fn left_invariance(s: &mut Sampler, m: &MeasureContext) -> Result<Option<String>> {
    let a = s.dddset(3)?;
    let (_, g) = s.gl2_elem(3)?;
    let ga = a.left_translate(&g)?;
    let f = SimpleFn::scaled_indicator(s.value(), &a);
    let gf = crate::integration::translate_fn(s.params(), &f, &g, crate::integration::Side::Left)?;
    let (i0, i1) = (crate::integration::integrate(m, &f), crate::integration::integrate(m, &gf));
    let ok = m.mu(&ga) == m.mu(&a) && i0 == i1;
    Ok((!ok).then(|| format!("g = {g}, A = {}", sets_json(&a))))
}

fn right_invariance(s: &mut Sampler, m: &MeasureContext) -> Result<Option<String>> {
    let a = s.dddset(3)?;
    let k = s.k_elem()?;
    let ak = a.right_translate(s.params(), &k)?;
    Ok((m.mu(&ak) != m.mu(&a)).then(|| format!("k = {k}, A = {}", sets_json(&a))))
}

const ORDERS: [[usize; 4]; 24] = {
    let mut out = [[0usize; 4]; 24];
    let mut n = 0;
    let mut code = 0;
    while code < 256 {
        let o = [code & 3, (code >> 2) & 3, (code >> 4) & 3, (code >> 6) & 3];
        if o[0] != o[1] && o[0] != o[2] && o[0] != o[3] && o[1] != o[2] && o[1] != o[3] && o[2] != o[3] {
            out[n] = o;
            n += 1;
        }
        code += 1;
    }
    out
};

/// The 24 orders in which the four matrix coordinates can be integrated out.
pub fn all_orders() -> [[usize; 4]; 24] {
    ORDERS
}

fn fubini_orders(s: &mut Sampler, _: &MeasureContext) -> Result<Option<String>> {
    let fs: [FSimpleFn; 4] = [s.f_simple_fn()?, s.f_simple_fn()?, s.f_simple_fn()?, s.f_simple_fn()?];
    let first = iterated_product_integral(&fs, ORDERS[0])?;
    for o in &ORDERS[1..] {
        let v = iterated_product_integral(&fs, *o)?;
        if v != first {
            return Ok(Some(format!("order {o:?} gives {v}, order {:?} gives {first}", ORDERS[0])));
        }
    }
    Ok(None)
}

fn lift_agreement(s: &mut Sampler, _: &MeasureContext) -> Result<Option<String>> {
    let p = s.params().clone();
    let g = s.e_step_fn()?;
    let a = s.in_ideal(Level::new(-2, -1))?;
    let n = s.rng().gen_range(-1..=2);
    let direct = f_integrate(&lift_to_f(&p, &g, &a, n)?);
    let formula = lift_integral(&g, n);
    Ok((direct != formula).then(|| format!("g = {g:?}, a = {a}, n = {n}: {direct} vs {formula}")))
}

fn factorization(s: &mut Sampler, m: &MeasureContext) -> Result<Option<String>> {
    let (factors, h) = s.gl2_elem(5)?;
    let level = loop {
        let l = Level::new(s.rng().gen_range(-2..=3), s.rng().gen_range(0..=2));
        if l.is_positive() {
            break l;
        }
    };
    let rhs = factor_rhs(s.params(), &h, level)?.value;
    let lhs = m.mu_distinguished(&Coset::new(h.clone(), level)?);
    Ok((rhs != lhs).then(|| format!("h = {h} ({factors:?}), level {level}: {rhs} vs {lhs}")))
}

fn measure_formula(s: &mut Sampler, m: &MeasureContext) -> Result<Option<String>> {
    let p = s.params().clone();
    let j = s.rng().gen_range(0..=2);
    let i = if j == 0 { s.rng().gen_range(1..=2) } else { s.rng().gen_range(-2..=2) };
    let (l, deeper) = (Level::new(i, j), Level::new(i + 1, j));
    let parts: ValueElem = enumerate_cosets(&p, l, deeper)?.iter().map(|_| m.mu_level(deeper)).sum();
    let q4 = ValueElem::constant(crate::value::int((p.q as i64).pow(4)));
    let ok = parts == m.mu_level(l) && m.mu_level(l) == &q4 * &m.mu_level(deeper) && m.mu(&full_k(&p)?) == ValueElem::one();
    Ok((!ok).then(|| format!("level {l}: children sum to {parts}, μ = {}", m.mu_level(l))))
}

fn convolution_idempotent(s: &mut Sampler, m: &MeasureContext) -> Result<Option<String>> {
    let p = s.params().clone();
    let i = if p.q == 2 { s.rng().gen_range(1..=2) } else { 1 };
    let level = Level::new(i, 0);
    let one_k = SimpleFn::indicator(&full_k_at(&p, level)?);
    let sq = convolve_k(m, &one_k, &one_k, level)?;
    let ok = sq.terms().len() == one_k.terms().len() && sq.terms().iter().all(|(c, _)| *c == ValueElem::one());
    Ok((!ok).then(|| format!("𝟙_K * 𝟙_K differs from 𝟙_K at level {level}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_are_the_permutations() {
        let mut v = all_orders().to_vec();
        v.sort();
        v.dedup();
        assert_eq!(v.len(), 24);
    }

    #[test]
    fn suites_pass_small() {
        let p = GlobalParams::default();
        for r in run_suite(&p, Suite::All, 7, 4, true) {
            assert!(r.passed(), "{}: {:?}", r.name, r.counterexample);
        }
    }
}
