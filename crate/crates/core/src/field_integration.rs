//! The measure on `F` itself, product integrals in matrix coordinates, lifts
//! of step functions from the residue field, and the coordinate form of the
//! Haar integral on `GL_2(F)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{module_of_level, FieldElem, Level};
use crate::matrix::{elementary_decompose, ElementaryFactor, Mat2, Relation};
use crate::measure::lambda;
use crate::params::GlobalParams;
use crate::sets::{DDSetOf, Shell};
use crate::value::{rat_pow, Rational, ValueElem};

/// `α + t1^i t2^j O_F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FIdealCoset {
    pub center: FieldElem,
    pub level: Level,
}

impl FIdealCoset {
    pub fn new(center: FieldElem, level: Level) -> Self {
        FIdealCoset { center, level }
    }

    /// `t1^i t2^j O_F`
    pub fn ideal(p: &GlobalParams, level: Level) -> Self {
        FIdealCoset::new(FieldElem::zero(p), level)
    }

    pub fn contains(&self, x: &FieldElem) -> Result<bool> {
        x.sub(&self.center)?.in_ideal(self.level)
    }

    /// `μ_F(α + t1^i t2^j O_F) = q^{-i} X^j`
    pub fn mu(&self) -> ValueElem {
        module_of_level(self.center.q(), self.level)
    }
}

impl fmt::Display for FIdealCoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + t^{}O", self.center, self.level)
    }
}

impl Shell for FIdealCoset {
    type Point = FieldElem;
    const FANOUT: u32 = 1;

    fn level(&self) -> Level {
        self.level
    }

    fn compare(&self, other: &Self) -> Result<Relation> {
        use std::cmp::Ordering::*;
        Ok(match self.level.cmp(&other.level) {
            Equal if self.contains(&other.center)? => Relation::Equal,
            Less if self.contains(&other.center)? => Relation::LeftContainsRight,
            Greater if other.contains(&self.center)? => Relation::RightContainsLeft,
            _ => Relation::Disjoint,
        })
    }

    fn holds(&self, x: &FieldElem) -> Result<bool> {
        self.contains(x)
    }

    fn children(&self, p: &GlobalParams) -> Result<Vec<Self>> {
        let deeper = Level::new(self.level.i + 1, self.level.j);
        (0..p.q as i64)
            .map(|c| {
                let shift = FieldElem::monomial(p, c, self.level)?;
                Ok(FIdealCoset::new(self.center.add(&shift)?, deeper))
            })
            .collect()
    }

    fn probe(&self, p: &GlobalParams, r: i32) -> Result<FieldElem> {
        let bump = FieldElem::monomial(p, 1, Level::new(self.level.i + r, self.level.j))?;
        self.center.add(&bump)
    }
}

/// dd-sets in `F`.
pub type FDDSet = DDSetOf<FIdealCoset>;

pub fn f_mu(s: &FDDSet) -> ValueElem {
    let big: ValueElem = s.big().iter().map(FIdealCoset::mu).sum();
    let small: ValueElem = s.small().iter().map(FIdealCoset::mu).sum();
    big - small
}

/// `Σ c_i 𝟙_{U_i}` on `F` with pairwise disjoint supports.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FSimpleFn {
    terms: Vec<(ValueElem, FDDSet)>,
}

impl FSimpleFn {
    pub fn zero() -> Self {
        FSimpleFn::default()
    }

    pub fn new(p: &GlobalParams, terms: Vec<(ValueElem, FDDSet)>) -> Result<Self> {
        let live = |c: &ValueElem, u: &FDDSet| !c.is_zero() && !u.is_trivially_empty();
        for (ix, (_, u)) in terms.iter().enumerate().filter(|(_, (c, u))| live(c, u)) {
            for (jx, (_, v)) in terms.iter().enumerate().skip(ix + 1).filter(|(_, (c, v))| live(c, v)) {
                if let Some(x) = u.intersect(v)?.witness(p)? {
                    return Err(Error::InvalidPresentation(format!("supports of terms {ix} and {jx} overlap at {x}")));
                }
            }
        }
        let terms: Vec<_> = terms.into_iter().filter(|(c, u)| live(c, u)).collect();
        Ok(FSimpleFn { terms })
    }

    pub fn indicator(c: FIdealCoset) -> Self {
        FSimpleFn { terms: vec![(ValueElem::one(), FDDSet::coset(c))] }
    }

    pub fn terms(&self) -> &[(ValueElem, FDDSet)] {
        &self.terms
    }

    pub fn scale(&self, c: &ValueElem) -> Self {
        if c.is_zero() {
            return FSimpleFn::zero();
        }
        FSimpleFn { terms: self.terms.iter().map(|(x, u)| (x * c, u.clone())).collect() }
    }

    pub fn eval(&self, x: &FieldElem) -> Result<ValueElem> {
        for (c, u) in &self.terms {
            if u.contains(x)? {
                return Ok(c.clone());
            }
        }
        Ok(ValueElem::zero())
    }
}

pub fn f_integrate(f: &FSimpleFn) -> ValueElem {
    f.terms.iter().map(|(c, u)| c * &f_mu(u)).sum()
}

/// `∫∫∫∫ f1(α) f2(β) f3(γ) f4(δ)`, integrating out the variables in `order`
/// (indices into `factors`).
pub fn iterated_product_integral(factors: &[FSimpleFn; 4], order: [usize; 4]) -> Result<ValueElem> {
    let mut seen = [false; 4];
    for &k in &order {
        if k >= 4 || seen[k] {
            return Err(Error::InvalidParams(format!("{order:?} is not a permutation of the four variables")));
        }
        seen[k] = true;
    }
    // Each elimination replaces one factor of every product cell by its
    // measure; with separated variables that is a scalar factor.
    let mut acc = ValueElem::one();
    for k in order {
        acc = &acc * &f_integrate(&factors[k]);
    }
    Ok(acc)
}

/// `ā + ū^k O_E` in the residue field `E = F_q((ū))`; the centre is a finite
/// Laurent polynomial given as `(exponent, residue)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ECoset {
    pub center: Vec<(i32, u32)>,
    pub k: i32,
}

impl ECoset {
    fn lowest_difference(&self, o: &ECoset, q: u32) -> Option<i32> {
        let mut diff = std::collections::BTreeMap::new();
        for &(e, c) in &self.center {
            *diff.entry(e).or_insert(0u32) += c % q;
        }
        for &(e, c) in &o.center {
            let v = diff.entry(e).or_insert(0u32);
            *v = (*v + q - c % q) % q;
        }
        diff.into_iter().find(|&(_, c)| c % q != 0).map(|(e, _)| e)
    }

    fn meets(&self, o: &ECoset, q: u32) -> bool {
        self.lowest_difference(o, q).is_none_or(|e| e >= self.k.min(o.k))
    }
}

/// A step function on `E` with rational values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EStepFn {
    q: u32,
    terms: Vec<(Rational, ECoset)>,
}

impl EStepFn {
    pub fn new(q: u32, terms: Vec<(Rational, ECoset)>) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        for (ix, (_, u)) in terms.iter().enumerate() {
            for (jx, (_, v)) in terms.iter().enumerate().skip(ix + 1) {
                if u.meets(v, q) {
                    return Err(Error::InvalidPresentation(format!("supports of terms {ix} and {jx} overlap")));
                }
            }
        }
        Ok(EStepFn { q, terms })
    }

    pub fn terms(&self) -> &[(Rational, ECoset)] {
        &self.terms
    }

    /// Haar integral on `E` with `μ(O_E) = 1`.
    pub fn integral(&self) -> Rational {
        let q = Rational::from_integer(BigInt::from(self.q));
        self.terms.iter().map(|(c, u)| c * rat_pow(&q, -(u.k as i64))).sum()
    }
}

/// `∫_F g_{a,n} = X^n ∫_E g`, where `g_{a,n}(x) = g(res((x − a)/t2^n))` on
/// `a + t2^n O_F` and zero elsewhere.
pub fn lift_integral(g: &EStepFn, n: i32) -> ValueElem {
    ValueElem::monomial(g.integral(), n as i64)
}

/// The lift `g_{a,n}` as a simple function on `F`: the term on
/// `ā + ū^k O_E` becomes `a + t2^n·lift(ā) + t1^k t2^n O_F`.
pub fn lift_to_f(p: &GlobalParams, g: &EStepFn, a: &FieldElem, n: i32) -> Result<FSimpleFn> {
    let mut terms = Vec::with_capacity(g.terms.len());
    for (c, u) in &g.terms {
        let lifted = FieldElem::from_terms(p, u.center.iter().map(|&(e, r)| (Level::new(e, n), r as i64)))?;
        let center = a.add(&lifted)?;
        terms.push((ValueElem::constant(c.clone()), FDDSet::coset(FIdealCoset::new(center, Level::new(u.k, n)))));
    }
    FSimpleFn::new(p, terms)
}

/// Trace of one evaluation of the coordinate-form integral.
#[derive(Clone, Debug)]
pub struct FactorTrace {
    pub factors: Vec<ElementaryFactor>,
    /// Order in which `(α, β, γ, δ)` end up being integrated.
    pub order: [usize; 4],
    /// Product of the per-factor substitution multipliers.
    pub multiplier: ValueElem,
    pub value: ValueElem,
}

/// Right-hand side of the coordinate form of the Haar integral,
/// `λ ∫∫∫∫ f(α,β,γ,δ) |αδ − βγ|^{-2} dα dβ dγ dδ`, for `f = 𝟙_{hK_level}`.
///
/// `h` is peeled one elementary factor at a time. A diagonal factor `x`
/// rescales one row, so two differentials pick up `|x|_F` each while
/// `|det|^{-2}` picks up `|x|_F^{-2}`; unipotent factors are additive shifts
/// of two coordinates; the swap permutes the coordinates. What remains is
/// the box integral over `K_level` itself.
pub fn factor_rhs(p: &GlobalParams, h: &Mat2, level: Level) -> Result<FactorTrace> {
    if !level.is_positive() {
        return Err(Error::InvalidLevel { i: level.i, j: level.j, reason: "subgroup levels must exceed (0,0)".into() });
    }
    let factors = elementary_decompose(p, h)?;
    let mut order = [0usize, 1, 2, 3];
    let mut multiplier = ValueElem::one();
    for f in &factors {
        match f {
            ElementaryFactor::DiagLeft(x) | ElementaryFactor::DiagRight(x) => {
                let m = x.module_of()?;
                let sq = &m * &m;
                multiplier = &(&multiplier * &sq) * &sq.inv_monomial()?;
            }
            ElementaryFactor::Upper(_) | ElementaryFactor::Lower(_) => {}
            ElementaryFactor::Swap => {
                order = [order[2], order[3], order[0], order[1]];
            }
        }
    }
    let one = FieldElem::one(p);
    let unit = FSimpleFn::indicator(FIdealCoset::new(one, level));
    let small = FSimpleFn::indicator(FIdealCoset::ideal(p, level));
    let base = iterated_product_integral(&[unit.clone(), small.clone(), small, unit], order)?;
    let value = &(&base * &multiplier) * &ValueElem::constant(lambda(p.q));
    Ok(FactorTrace { factors, order, multiplier, value })
}
