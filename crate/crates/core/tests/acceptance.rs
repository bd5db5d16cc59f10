//! Acceptance run: one PASS/FAIL line per criterion. All comparisons are
//! exact unless a line says otherwise; every criterion has a wall-clock budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gl2measure::checks::{run_property, INVARIANTS, ORACLES};
use gl2measure::matrix::{enumerate_cosets, enumerate_k_mod_k10, index_in_k, Index};
use gl2measure::value::rat_pow;
use gl2measure::{
    convolve_k, family_integral, full_k, full_k_at, integrate, CircleFamily, Coset, Error, GlobalParams, Level,
    MeasureContext, Rational, Relation, SimpleFn, ValueElem,
};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

const SEED: u64 = 20_240_917;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(q: u32) -> GlobalParams {
    GlobalParams::new(q).expect("prime q")
}

fn q_rat(q: u32) -> Rational {
    Rational::from_integer(BigInt::from(q))
}

/// `q^3 / ((q^2 − 1)(q − 1))`, written out independently of the library.
fn lambda_oracle(q: u32) -> Rational {
    let q = q as i64;
    Rational::new(BigInt::from(q * q * q), BigInt::from((q * q - 1) * (q - 1)))
}

fn property(name: &str, q: u32, count: usize) -> Result<usize, String> {
    let (n, case) = INVARIANTS
        .iter()
        .chain(ORACLES)
        .find(|(n, _)| *n == name)
        .copied()
        .unwrap_or_else(|| panic!("no property {name}"));
    let r = run_property(&params(q), n, case, SEED, count);
    match r.counterexample {
        None => Ok(r.cases),
        Some(c) => Err(format!("{name} at q={q}, case {}: {c}", r.cases)),
    }
}

fn normalization() -> Outcome {
    let mut out = Vec::new();
    for q in [2u32, 3] {
        let p = params(q);
        let m = MeasureContext::new(p.clone());
        let k = full_k(&p).map_err(|e| e.to_string())?;
        let n = k.components().len();
        let want = ((q * q - 1) * (q * q - q)) as usize;
        ensure(n == want, || format!("q={q}: {n} cosets, expected {want}"))?;
        let total: ValueElem = k.components().iter().map(|d| m.mu_dd(d)).sum();
        ensure(total == ValueElem::one(), || format!("q={q}: μ(K) = {total}"))?;
        out.push(format!("q={q}: {n} cosets sum to 1"));
    }
    Ok(out.join("; "))
}

fn measure_formula() -> Outcome {
    let mut levels = 0;
    for q in [2u32, 3] {
        let p = params(q);
        let m = MeasureContext::new(p.clone());
        let lam = lambda_oracle(q);
        for j in 0..=2 {
            for i in -2..=3 {
                let l = Level::new(i, j);
                if !l.is_positive() {
                    continue;
                }
                let want = ValueElem::monomial(&lam * rat_pow(&q_rat(q), -4 * i as i64), 4 * j as i64);
                let sub = Coset::subgroup(&p, l).map_err(|e| e.to_string())?;
                let got = m.mu_distinguished(&sub);
                ensure(got == want, || format!("q={q} {l}: μ = {got}, expected {want}"))?;
                if j == 0 {
                    // Counting oracle: μ(K_{i,0}) = μ(K) / |K : K_{i,0}|.
                    let index = enumerate_k_mod_k10(&p).map_err(|e| e.to_string())?.len()
                        * enumerate_cosets(&p, Level::new(1, 0), l).map_err(|e| e.to_string())?.len();
                    ensure(got == ValueElem::constant(Rational::new(1.into(), BigInt::from(index))), || {
                        format!("q={q} {l}: μ = {got} but |K : K{l}| = {index}")
                    })?;
                    let formula = index_in_k(q, l).map_err(|e| e.to_string())?;
                    ensure(formula == Index::Finite(index.into()), || format!("q={q} {l}: index formula {formula:?} vs {index}"))?;
                }
                let deeper = Level::new(i + 1, j);
                let reps = enumerate_cosets(&p, l, deeper).map_err(|e| e.to_string())?;
                ensure(reps.len() == (q as usize).pow(4), || format!("q={q} {l}: {} children", reps.len()))?;
                let kids: Vec<Coset> = reps.into_iter().map(|r| Coset::new(r, deeper)).collect::<Result<_, Error>>().map_err(|e| e.to_string())?;
                for (a, x) in kids.iter().enumerate() {
                    ensure(sub.contains(x.rep()).map_err(|e| e.to_string())?, || format!("{x} escapes {sub}"))?;
                    for y in &kids[a + 1..] {
                        let rel = gl2measure::coset_compare(x, y).map_err(|e| e.to_string())?;
                        ensure(rel == Relation::Disjoint, || format!("{x} and {y} overlap"))?;
                    }
                }
                let parts: ValueElem = kids.iter().map(|c| m.mu_distinguished(c)).sum();
                ensure(parts == got, || format!("q={q} {l}: children sum to {parts}, μ = {got}"))?;
                let q4 = ValueElem::constant(Rational::from_integer(BigInt::from(q).pow(4)));
                ensure(got == &q4 * &m.mu_level(deeper), || format!("q={q} {l}: q^4 relation fails"))?;
                levels += 1;
            }
        }
    }
    Ok(format!("{levels} (q, level) pairs, each split into q^4 disjoint children"))
}

fn refinement() -> Outcome {
    let a = property("refinement_soundness", 2, 200)?;
    let b = property("refinement_soundness", 3, 200)?;
    Ok(format!("{a} pairs at q=2 and {b} at q=3: terminating, refining both inputs, μ equal on all three"))
}

fn factorization() -> Outcome {
    let a = property("factorization", 2, 100)?;
    let b = property("factorization", 3, 100)?;
    Ok(format!("{a} elements at q=2 and {b} at q=3"))
}

fn convolution() -> Outcome {
    let run = |q: u32| -> Result<String, String> {
        let p = params(q);
        let m = MeasureContext::new(p.clone());
        for i in 1..=3 {
            let l = Level::new(i, 0);
            let one_k = SimpleFn::indicator(&full_k_at(&p, l).map_err(|e| e.to_string())?);
            let sq = convolve_k(&m, &one_k, &one_k, l).map_err(|e| e.to_string())?;
            let Index::Finite(n) = index_in_k(q, l).map_err(|e| e.to_string())? else {
                return Err("infinite index".into());
            };
            ensure(n == sq.terms().len().into(), || format!("q={q} {l}: {} cosets in the square", sq.terms().len()))?;
            ensure(sq.terms().iter().all(|(c, _)| *c == ValueElem::one()), || format!("q={q} {l}: a coefficient differs from 1"))?;
            ensure(integrate(&m, &sq) == ValueElem::one(), || format!("q={q} {l}: ∫ 𝟙_K * 𝟙_K ≠ 1"))?;
        }
        Ok(format!("q={q}: levels (1,0)..(3,0)"))
    };
    let (a, b) = std::thread::scope(|s| {
        let h2 = s.spawn(|| run(2));
        let h3 = s.spawn(|| run(3));
        (h2.join().expect("no panic"), h3.join().expect("no panic"))
    });
    Ok(format!("{}; {}", a?, b?))
}

fn fubini() -> Outcome {
    let a = property("fubini_orders", 2, 100)?;
    let b = property("fubini_orders", 3, 100)?;
    Ok(format!("{a} integrands at q=2 and {b} at q=3, 24 orders each"))
}

/// Rows `j ≥ 0` of the lattice, each row the geometric sum over `i ≥ start(j)`
/// of `q^{-is}`: exact partial sums up to `i_max` plus the closed tail,
/// and a float check of the partial sums alone.
fn lattice_check(q: u32, s: i64, trunc: i64, start: impl Fn(i64) -> i64, got: &ValueElem) -> Result<(), String> {
    let qr = q_rat(q);
    let ratio = rat_pow(&qr, -s);
    let i_max = 60;
    for e in 0..=trunc {
        let want = if e % s == 0 {
            let j = e / s;
            let a = start(j);
            let partial: Rational = (a..=i_max).map(|i| rat_pow(&qr, -i * s)).sum();
            let tail = rat_pow(&qr, -(i_max + 1) * s) / (Rational::one() - &ratio);
            let closed = rat_pow(&qr, -a * s) / (Rational::one() - &ratio);
            ensure(&partial + &tail == closed, || format!("row {j}: partial sum and tail disagree"))?;
            let drift = (closed.to_f64().unwrap() - partial.to_f64().unwrap()).abs();
            ensure(drift < 1e-12, || format!("row {j}: partial sums off by {drift}"))?;
            closed
        } else {
            Rational::zero()
        };
        ensure(got.coeff(e) == want, || format!("X^{e}: {} vs {want}", got.coeff(e)))?;
    }
    ensure(got.truncated_at() == Some(trunc), || format!("truncation marker {:?}, expected {trunc}", got.truncated_at()))?;
    Ok(())
}

fn series() -> Outcome {
    let mut n = 0;
    for q in [2u32, 3] {
        for s in 1..=3 {
            for trunc in 0..=8 {
                for m in [-1i64, -2] {
                    let got = family_integral(q, CircleFamily::QuarterPlane { m, n: 0 }, s, trunc).map_err(|e| e.to_string())?;
                    // Row 0 starts at i = 0, the others at i = m.
                    lattice_check(q, s, trunc, |j| if j == 0 { 0 } else { m }, &got)
                        .map_err(|e| format!("I_{m} q={q} s={s} trunc={trunc}: {e}"))?;
                    n += 1;
                }
                let got = family_integral(q, CircleFamily::Triangle, s, trunc).map_err(|e| e.to_string())?;
                lattice_check(q, s, trunc, |j| j, &got).map_err(|e| format!("T q={q} s={s} trunc={trunc}: {e}"))?;
                n += 1;
                match family_integral(q, CircleFamily::Disc, s, trunc) {
                    Err(Error::DivergentSeries(_)) => {}
                    other => return Err(format!("disc q={q} s={s}: {other:?}")),
                }
            }
        }
    }
    let i1 = family_integral(2, CircleFamily::QuarterPlane { m: -1, n: 0 }, 1, 2).map_err(|e| e.to_string())?;
    ensure(i1.to_string() == "2 + 4*X + 4*X^2 + O(X^3)", || format!("I_-1 renders as {i1}"))?;
    let t = family_integral(2, CircleFamily::Triangle, 1, 2).map_err(|e| e.to_string())?;
    ensure(t.to_string() == "2 + 1*X + 1/2*X^2 + O(X^3)", || format!("T renders as {t}"))?;
    Ok(format!("{n} truncations against lattice sums (float drift < 1e-12 at i ≤ 60); disc diverges"))
}

fn lifts() -> Outcome {
    let a = property("lift_agreement", 2, 100)?;
    let b = property("lift_agreement", 3, 100)?;
    Ok(format!("{a} step functions at q=2 and {b} at q=3"))
}

fn invariance() -> Outcome {
    let mut parts = Vec::new();
    for q in [2u32, 3] {
        let l = property("left_invariance", q, 100)?;
        let r = property("right_invariance", q, 100)?;
        parts.push(format!("q={q}: {l} left (GL2(F)), {r} right (K)"));
    }
    Ok(parts.join("; "))
}

fn normality() -> Outcome {
    let a = property("normality", 2, 500)?;
    let b = property("normality", 3, 500)?;
    Ok(format!("{a} conjugations at q=2 and {b} at q=3"))
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("normalization", 1, normalization),
        ("measure formula", 5, measure_formula),
        ("refinement soundness", 60, refinement),
        ("factorization oracle", 60, factorization),
        ("convolution", 10, convolution),
        ("order independence", 30, fubini),
        ("series examples", 5, series),
        ("lift agreement", 10, lifts),
        ("invariance", 30, invariance),
        ("normality", 10, normality),
    ];
    let mut failed = 0;
    for (ix, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let budget = Duration::from_secs(*budget);
        let (status, detail) = match outcome {
            Ok(d) if took <= budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("over time budget; {d}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "{status} {:>2} {name}: {detail} [{:.2} s of {} s, exact]",
            ix + 1,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
