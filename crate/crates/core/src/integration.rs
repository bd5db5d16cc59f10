//! Integrals of simple functions on `GL_2(F)`, convolution of K-supported
//! functions, and the determinant series over families of circles.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::field::Level;
use crate::matrix::{enumerate_cosets, in_k, Coset, Mat2};
use crate::measure::MeasureContext;
use crate::params::GlobalParams;
use crate::sets::{DDDSet, DDSet};
use crate::value::{geometric_closed_form, rat_pow, Rational, ValueElem};

/// `Σ c_i 𝟙_{U_i}` over pairwise disjoint dd-sets, optionally overridden at
/// finitely many points.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SimpleFn {
    terms: Vec<(ValueElem, DDSet)>,
    exceptional: Vec<(Mat2, ValueElem)>,
}

impl SimpleFn {
    pub fn zero() -> Self {
        SimpleFn::default()
    }

    /// Validates pairwise disjointness of the supports.
    pub fn new(p: &GlobalParams, terms: Vec<(ValueElem, DDSet)>, exceptional: Vec<(Mat2, ValueElem)>) -> Result<Self> {
        let live = |c: &ValueElem, u: &DDSet| !c.is_zero() && !u.is_trivially_empty();
        for (ix, (_, u)) in terms.iter().enumerate().filter(|(_, (c, u))| live(c, u)) {
            for (jx, (_, v)) in terms.iter().enumerate().skip(ix + 1).filter(|(_, (c, v))| live(c, v)) {
                if let Some(g) = u.intersect(v)?.witness(p)? {
                    return Err(Error::InvalidPresentation(format!("supports of terms {ix} and {jx} overlap at {g}")));
                }
            }
        }
        let terms: Vec<_> = terms.into_iter().filter(|(c, u)| live(c, u)).collect();
        Ok(SimpleFn { terms, exceptional })
    }

    pub fn indicator(set: &DDDSet) -> Self {
        Self::scaled_indicator(ValueElem::one(), set)
    }

    pub fn scaled_indicator(c: ValueElem, set: &DDDSet) -> Self {
        if c.is_zero() {
            return SimpleFn::zero();
        }
        let terms = set
            .components()
            .iter()
            .filter(|d| !d.is_trivially_empty())
            .map(|d| (c.clone(), d.clone()))
            .collect();
        SimpleFn { terms, exceptional: Vec::new() }
    }

    /// A function that is zero except at finitely many points.
    pub fn pointwise(exceptional: Vec<(Mat2, ValueElem)>) -> Self {
        SimpleFn { terms: Vec::new(), exceptional }
    }

    pub fn terms(&self) -> &[(ValueElem, DDSet)] {
        &self.terms
    }

    pub fn exceptional(&self) -> &[(Mat2, ValueElem)] {
        &self.exceptional
    }

    pub fn eval(&self, g: &Mat2) -> Result<ValueElem> {
        for (x, v) in &self.exceptional {
            if x.agrees_with(g)? {
                return Ok(v.clone());
            }
        }
        for (c, u) in &self.terms {
            if u.contains(g)? {
                return Ok(c.clone());
            }
        }
        Ok(ValueElem::zero())
    }

    pub fn scale(&self, c: &ValueElem) -> SimpleFn {
        if c.is_zero() {
            return SimpleFn::zero();
        }
        SimpleFn {
            terms: self.terms.iter().map(|(x, u)| (x * c, u.clone())).collect(),
            exceptional: self.exceptional.iter().map(|(g, x)| (g.clone(), x * c)).collect(),
        }
    }

    /// Pointwise sum, re-split so the supports stay disjoint. Exceptional
    /// points of both summands are kept, `self`'s first.
    pub fn add(&self, o: &SimpleFn) -> Result<SimpleFn> {
        let mut terms = Vec::new();
        let others = |fs: &[(ValueElem, DDSet)]| {
            DDDSet::from_components(fs.iter().map(|(_, u)| u.clone()).collect())
        };
        let (mine, theirs) = (others(&self.terms), others(&o.terms));
        for (c, u) in &self.terms {
            for d in DDDSet::single(u.clone()).difference(&theirs)?.components() {
                terms.push((c.clone(), d.clone()));
            }
        }
        for (c, v) in &o.terms {
            for d in DDDSet::single(v.clone()).difference(&mine)?.components() {
                terms.push((c.clone(), d.clone()));
            }
        }
        for (c, u) in &self.terms {
            for (d, v) in &o.terms {
                let both = u.intersect(v)?;
                let sum = c + d;
                if !both.is_trivially_empty() && !sum.is_zero() {
                    terms.push((sum, both));
                }
            }
        }
        let mut exceptional = self.exceptional.clone();
        exceptional.extend(o.exceptional.iter().cloned());
        Ok(SimpleFn { terms, exceptional })
    }

    /// Splits every support that is a single coset above `level` (same
    /// t2-level) into its cosets of `K_level`.
    pub fn split_supports(&self, p: &GlobalParams, level: Level) -> Result<SimpleFn> {
        let mut terms = Vec::new();
        for (c, u) in &self.terms {
            match single_coset(u) {
                Some(x) if x.level() < level && x.level().j == level.j => {
                    for k in enumerate_cosets(p, x.level(), level)? {
                        terms.push((c.clone(), DDSet::coset(Coset::new(x.rep().mul(&k)?, level)?)));
                    }
                }
                _ => terms.push((c.clone(), u.clone())),
            }
        }
        Ok(SimpleFn { terms, exceptional: self.exceptional.clone() })
    }
}

fn single_coset(u: &DDSet) -> Option<&Coset> {
    match (u.big(), u.small()) {
        ([c], []) => Some(c),
        _ => None,
    }
}

/// `Σ c_i μ(U_i)`; the exceptional points carry no mass.
pub fn integrate(ctx: &MeasureContext, f: &SimpleFn) -> ValueElem {
    let mut weights: BTreeMap<Level, ValueElem> = BTreeMap::new();
    for (c, u) in &f.terms {
        for b in u.big() {
            let w = weights.entry(b.level()).or_default();
            *w = &*w + c;
        }
        for s in u.small() {
            let w = weights.entry(s.level()).or_default();
            *w = &*w - c;
        }
    }
    weights.into_iter().map(|(l, w)| &w * &ctx.mu_level(l)).sum()
}

/// `∫ f · 𝟙_E`.
pub fn integrate_over(ctx: &MeasureContext, f: &SimpleFn, e: &DDDSet) -> Result<ValueElem> {
    let mut total = ValueElem::zero();
    for (c, u) in &f.terms {
        let part = DDDSet::single(u.clone()).intersect(e)?;
        total = total + c * &ctx.mu(&part);
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `(L_g f)(x) = f(g^{-1} x)` has supports `g·U`; `(R_g f)(x) = f(x g^{-1})`
/// has supports `U·g`, which stay distinguished only for `g ∈ F^× K`.
pub fn translate_fn(p: &GlobalParams, f: &SimpleFn, g: &Mat2, side: Side) -> Result<SimpleFn> {
    let mut terms = Vec::with_capacity(f.terms.len());
    for (c, u) in &f.terms {
        let moved = match side {
            Side::Left => u.left_translate(g)?,
            Side::Right => u.right_translate(p, g)?,
        };
        terms.push((c.clone(), moved));
    }
    let mut exceptional = Vec::with_capacity(f.exceptional.len());
    for (x, v) in &f.exceptional {
        let moved = match side {
            Side::Left => g.mul(x)?,
            Side::Right => x.mul(g)?,
        };
        exceptional.push((moved, v.clone()));
    }
    Ok(SimpleFn { terms, exceptional })
}

type CosetKey = Vec<Vec<(Level, u32)>>;

/// For `a ∈ K` and `H = K_level` normal in `K`, `aH = bH` iff `a ≡ b` modulo
/// `t^level M_2(O_F)`, so the residues below `level` name the coset.
fn coset_key(a: &Mat2, level: Level) -> Result<CosetKey> {
    a.entries().iter().map(|x| x.residue_below(level)).collect()
}

/// A term `c·𝟙_{aK_level}` with `a ∈ K`.
struct Piece {
    coeff: ValueElem,
    rep: Mat2,
    level: Level,
}

/// Replaces every complete family of `q^4` sibling cosets carrying one
/// coefficient by their parent, level by level, while the parent is still
/// normal in `K`.
fn coarsen(p: &GlobalParams, mut pieces: Vec<Piece>, level: Level) -> Result<Vec<Piece>> {
    let fan = (p.q as usize).pow(4);
    let mut l = level;
    loop {
        let parent = Level::new(l.i - 1, l.j);
        if !parent.is_positive() {
            return Ok(pieces);
        }
        let (here, mut out): (Vec<Piece>, Vec<Piece>) = pieces.into_iter().partition(|x| x.level == l);
        let mut groups: BTreeMap<CosetKey, Vec<Piece>> = BTreeMap::new();
        for x in here {
            groups.entry(coset_key(&x.rep, parent)?).or_default().push(x);
        }
        let mut merged = false;
        for (_, g) in groups {
            if g.len() == fan && g.iter().all(|x| x.coeff == g[0].coeff) {
                let first = g.into_iter().next().expect("nonempty group");
                out.push(Piece { coeff: first.coeff, rep: first.rep, level: parent });
                merged = true;
            } else {
                out.extend(g);
            }
        }
        pieces = out;
        if !merged {
            return Ok(pieces);
        }
        l = parent;
    }
}

/// Convolution `∫ f(y) h(y^{-1}x) dμ(y)` of functions supported on cosets
/// `aH ⊂ K`, `H = K_level`, via `𝟙_{aH} * 𝟙_{bH} = μ(H) 𝟙_{abH}`.
///
/// Both sides are first coarsened; for normal subgroups `G ⊇ H` of `K` one
/// has `𝟙_{aG} * 𝟙_{bH} = 𝟙_{aH} * 𝟙_{bG} = μ(H) 𝟙_{abG}`, and the result is
/// split back into `H`-cosets at the end.
pub fn convolve_k(ctx: &MeasureContext, f: &SimpleFn, h: &SimpleFn, level: Level) -> Result<SimpleFn> {
    let p = &ctx.params;
    if !level.is_positive() {
        return Err(Error::UnsupportedSupport(format!("K{level} is not a proper congruence subgroup")));
    }
    let pieces = |g: &SimpleFn| -> Result<Vec<Piece>> {
        g.terms
            .iter()
            .map(|(c, u)| {
                let x = single_coset(u)
                    .filter(|x| x.level() == level)
                    .ok_or_else(|| Error::UnsupportedSupport(format!("{u} is not a single coset of K{level}")))?;
                if !in_k(x.rep())? {
                    return Err(Error::UnsupportedSupport(format!("representative {} lies outside K", x.rep())));
                }
                Ok(Piece { coeff: c.clone(), rep: x.rep().clone(), level })
            })
            .collect()
    };
    let fs = coarsen(p, pieces(f)?, level)?;
    let hs_own;
    let hs = if std::ptr::eq(f, h) {
        &fs
    } else {
        hs_own = coarsen(p, pieces(h)?, level)?;
        &hs_own
    };
    let mut coarse: BTreeMap<(Level, CosetKey), (Mat2, ValueElem)> = BTreeMap::new();
    for a in &fs {
        for b in hs {
            let (outer, inner) = if a.level <= b.level { (a.level, b.level) } else { (b.level, a.level) };
            let ab = a.rep.mul(&b.rep)?;
            let coeff = &(&a.coeff * &b.coeff) * &ctx.mu_level(inner);
            coarse
                .entry((outer, coset_key(&ab, outer)?))
                .and_modify(|(_, v)| *v = &*v + &coeff)
                .or_insert((ab, coeff));
        }
    }
    let mut splits: BTreeMap<Level, Vec<Mat2>> = BTreeMap::new();
    let mut fine: BTreeMap<CosetKey, (Mat2, ValueElem)> = BTreeMap::new();
    for ((outer, _), (rep, c)) in coarse {
        if c.is_zero() {
            continue;
        }
        if let std::collections::btree_map::Entry::Vacant(e) = splits.entry(outer) {
            e.insert(enumerate_cosets(p, outer, level)?);
        }
        for s in &splits[&outer] {
            let x = rep.mul(s)?;
            fine.entry(coset_key(&x, level)?).and_modify(|(_, v)| *v = &*v + &c).or_insert((x, c.clone()));
        }
    }
    let mut terms = Vec::with_capacity(fine.len());
    for (_, (rep, c)) in fine {
        if !c.is_zero() {
            terms.push((c, DDSet::coset(Coset::new(rep, level)?)));
        }
    }
    Ok(SimpleFn { terms, exceptional: Vec::new() })
}

/// Unions of the circles `D_{i,j} = {g ∈ M_2(O_F) : det g ∈ t1^i t2^j O_F^×}`,
/// each of measure 1, on which `|det g|^s = q^{-is} X^{js}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircleFamily {
    /// All `(i, j) >= (0, 0)`.
    Disc,
    /// `i >= m`, `j >= n`, `(i, j) >= (0, 0)`.
    QuarterPlane { m: i64, n: i64 },
    /// `i >= j >= 0`.
    Triangle,
}

/// `∫ |det g|_F^s` over the family, modulo `X^(x_trunc+1)`.
pub fn family_integral(q: u32, fam: CircleFamily, s: i64, x_trunc: i64) -> Result<ValueElem> {
    if s < 1 {
        return Err(Error::InvalidParams(format!("the exponent s must be a positive integer, got {s}")));
    }
    if x_trunc < 0 {
        return Err(Error::InvalidParams("x_trunc must be non-negative".into()));
    }
    let qr = Rational::from_integer(BigInt::from(q));
    let ratio = rat_pow(&qr, -s);
    // Σ_{i >= a} q^{-is}
    let tail = |a: i64| -> Result<Rational> {
        let v = geometric_closed_form(0, &rat_pow(&qr, -a * s), &ratio, 0, x_trunc)?;
        Ok(v.coeff(0))
    };
    match fam {
        CircleFamily::Disc => {
            // Row j = 1 needs Σ_{i<0} q^{-is} = Σ_{k>=1} q^{ks}.
            let up = rat_pow(&qr, s);
            geometric_closed_form(0, &up, &up, 0, x_trunc)?;
            Err(Error::Internal("bi-infinite row unexpectedly converged".into()))
        }
        CircleFamily::QuarterPlane { m, n } => {
            let mut total = ValueElem::zero().truncate(x_trunc);
            if n <= 0 {
                total = total + ValueElem::constant(tail(m.max(0))?);
            }
            let j0 = n.max(1);
            total = total + geometric_closed_form(j0 * s, &tail(m)?, &Rational::one(), s, x_trunc)?;
            Ok(total)
        }
        CircleFamily::Triangle => geometric_closed_form(0, &tail(0)?, &ratio, s, x_trunc),
    }
}
