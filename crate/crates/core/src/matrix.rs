//! 2×2 matrices over `F`, the subgroups `K` and `K_{i,j}`, and their cosets.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Pow};

use crate::error::{Error, Result};
use crate::field::{FieldElem, Level};
use crate::params::GlobalParams;

/// Row-major `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: FieldElem,
    pub b: FieldElem,
    pub c: FieldElem,
    pub d: FieldElem,
}

impl Mat2 {
    pub fn new(a: FieldElem, b: FieldElem, c: FieldElem, d: FieldElem) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity(p: &GlobalParams) -> Self {
        Self::diag(FieldElem::one(p), FieldElem::one(p))
    }

    pub fn zero(p: &GlobalParams) -> Self {
        let z = FieldElem::zero(p);
        Mat2::new(z.clone(), z.clone(), z.clone(), z)
    }

    pub fn diag(x: FieldElem, y: FieldElem) -> Self {
        let z = x.zero_like();
        Mat2::new(x, z.clone(), z, y)
    }

    pub fn upper(p: &GlobalParams, u: FieldElem) -> Self {
        Mat2::new(FieldElem::one(p), u, FieldElem::zero(p), FieldElem::one(p))
    }

    pub fn lower(p: &GlobalParams, u: FieldElem) -> Self {
        Mat2::new(FieldElem::one(p), FieldElem::zero(p), u, FieldElem::one(p))
    }

    pub fn swap(p: &GlobalParams) -> Self {
        Mat2::new(FieldElem::zero(p), FieldElem::one(p), FieldElem::one(p), FieldElem::zero(p))
    }

    /// Constant matrix with residue entries.
    pub fn from_ints(p: &GlobalParams, [[a, b], [c, d]]: [[i64; 2]; 2]) -> Self {
        Mat2::new(FieldElem::scalar(p, a), FieldElem::scalar(p, b), FieldElem::scalar(p, c), FieldElem::scalar(p, d))
    }

    /// Parses a 2×2 array of field-element strings.
    pub fn parse(rows: &[[&str; 2]; 2], p: &GlobalParams) -> Result<Self> {
        Ok(Mat2::new(
            FieldElem::parse(rows[0][0], p)?,
            FieldElem::parse(rows[0][1], p)?,
            FieldElem::parse(rows[1][0], p)?,
            FieldElem::parse(rows[1][1], p)?,
        ))
    }

    pub fn entries(&self) -> [&FieldElem; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn to_strings(&self) -> [[String; 2]; 2] {
        [[self.a.to_string(), self.b.to_string()], [self.c.to_string(), self.d.to_string()]]
    }

    pub fn mul(&self, o: &Mat2) -> Result<Mat2> {
        let dot = |x: &FieldElem, y: &FieldElem, z: &FieldElem, w: &FieldElem| -> Result<FieldElem> {
            x.mul(y)?.add(&z.mul(w)?)
        };
        Ok(Mat2::new(
            dot(&self.a, &o.a, &self.b, &o.c)?,
            dot(&self.a, &o.b, &self.b, &o.d)?,
            dot(&self.c, &o.a, &self.d, &o.c)?,
            dot(&self.c, &o.b, &self.d, &o.d)?,
        ))
    }

    pub fn add(&self, o: &Mat2) -> Result<Mat2> {
        Ok(Mat2::new(self.a.add(&o.a)?, self.b.add(&o.b)?, self.c.add(&o.c)?, self.d.add(&o.d)?))
    }

    pub fn sub(&self, o: &Mat2) -> Result<Mat2> {
        Ok(Mat2::new(self.a.sub(&o.a)?, self.b.sub(&o.b)?, self.c.sub(&o.c)?, self.d.sub(&o.d)?))
    }

    pub fn scale(&self, x: &FieldElem) -> Result<Mat2> {
        Ok(Mat2::new(x.mul(&self.a)?, x.mul(&self.b)?, x.mul(&self.c)?, x.mul(&self.d)?))
    }

    pub fn det(&self) -> Result<FieldElem> {
        self.a.mul(&self.d)?.sub(&self.b.mul(&self.c)?)
    }

    pub fn adj(&self) -> Mat2 {
        Mat2::new(self.d.clone(), self.b.neg(), self.c.neg(), self.a.clone())
    }

    pub fn inv(&self) -> Result<Mat2> {
        let det = self.det()?;
        if det.is_zero() {
            return Err(Error::NotInvertible);
        }
        self.adj().scale(&det.inv()?)
    }

    /// Entrywise agreement on the commonly known region.
    pub fn agrees_with(&self, o: &Mat2) -> Result<bool> {
        for (x, y) in self.entries().into_iter().zip(o.entries()) {
            if !x.agrees_with(y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_exact(&self) -> bool {
        self.entries().iter().all(|x| x.is_exact())
    }

    fn entries_in_ideal(&self, level: Level) -> Result<bool> {
        for x in self.entries() {
            if !x.in_ideal(level)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Membership in `K = GL_2(O_F)`.
pub fn in_k(g: &Mat2) -> Result<bool> {
    if !g.entries_in_ideal(Level::ZERO)? {
        return Ok(false);
    }
    Ok(!g.det()?.in_ideal(Level::new(1, 0))?)
}

fn check_level(level: Level) -> Result<()> {
    if level.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidLevel { i: level.i, j: level.j, reason: "subgroup levels must exceed (0,0)".into() })
    }
}

/// Membership in `K_{i,j} = I + t1^i t2^j M_2(O_F)`.
pub fn in_kij(g: &Mat2, level: Level) -> Result<bool> {
    check_level(level)?;
    let one = g.a.one_like();
    let id = Mat2::diag(one.clone(), one);
    g.sub(&id)?.entries_in_ideal(level)
}

/// A distinguished coset `g K_{i,j}`. The empty distinguished set is not a
/// `Coset`; collections simply omit it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coset {
    rep: Mat2,
    level: Level,
    adj: Mat2,
    det_val: Level,
}

impl Coset {
    pub fn new(rep: Mat2, level: Level) -> Result<Coset> {
        check_level(level)?;
        let det = rep.det()?;
        if det.is_zero() {
            return Err(Error::NotInvertible);
        }
        let det_val = det.valuation()?;
        let adj = rep.adj();
        Ok(Coset { rep, level, adj, det_val })
    }

    /// The subgroup `K_{i,j}` itself.
    pub fn subgroup(p: &GlobalParams, level: Level) -> Result<Coset> {
        Coset::new(Mat2::identity(p), level)
    }

    pub fn rep(&self) -> &Mat2 {
        &self.rep
    }

    pub fn level(&self) -> Level {
        self.level
    }

    /// `h ∈ g K_{i,j}`, decided as `adj(g)(h − g) ∈ det(g) t^{(i,j)} M_2(O_F)`
    /// so no inverse is ever expanded.
    pub fn contains(&self, h: &Mat2) -> Result<bool> {
        self.adj.mul(&h.sub(&self.rep)?)?.entries_in_ideal(self.det_val + self.level)
    }

    /// `x · gK = (xg)K`.
    pub fn left_translate(&self, x: &Mat2) -> Result<Coset> {
        Coset::new(x.mul(&self.rep)?, self.level)
    }

    /// `gK · x = gx K`, valid only when `x` normalises `M_2(O_F)`.
    pub fn right_translate(&self, p: &GlobalParams, x: &Mat2) -> Result<Coset> {
        if !normalizes_integral_matrices(p, x)? {
            return Err(Error::NotRepresentable(format!(
                "right translate of {self} by {x} is not a coset of K{}",
                self.level
            )));
        }
        Coset::new(self.rep.mul(x)?, self.level)
    }

    /// The cosets of `K_{level.i+1, level.j}` inside this one.
    pub fn children(&self, p: &GlobalParams) -> Result<Vec<Coset>> {
        let deeper = Level::new(self.level.i + 1, self.level.j);
        enumerate_cosets(p, self.level, deeper)?
            .into_iter()
            .map(|k| Coset::new(self.rep.mul(&k)?, deeper))
            .collect()
    }

    /// The coset of `K_{i-1,j}` containing this one, when that level is valid.
    pub fn parent(&self) -> Option<Result<Coset>> {
        let up = Level::new(self.level.i - 1, self.level.j);
        up.is_positive().then(|| Coset::new(self.rep.clone(), up))
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·K{}", self.rep, self.level)
    }
}

/// Whether `g^{-1} M_2(O_F) g = M_2(O_F)`, i.e. `g ∈ F^× · K`. Exactly then
/// `g^{-1} K_{i,j} g = K_{i,j}` for every level, so `hK_{i,j}·g = hg K_{i,j}`.
pub fn normalizes_integral_matrices(p: &GlobalParams, g: &Mat2) -> Result<bool> {
    let g_inv = g.inv()?;
    for (k, l) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut e = [[0i64; 2]; 2];
        e[k][l] = 1;
        let unit = Mat2::from_ints(p, e);
        let there = g_inv.mul(&unit)?.mul(g)?;
        let back = g.mul(&unit)?.mul(&g_inv)?;
        if !there.entries_in_ideal(Level::ZERO)? || !back.entries_in_ideal(Level::ZERO)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of comparing two distinguished cosets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Equal,
    LeftContainsRight,
    RightContainsLeft,
    Disjoint,
}

pub fn coset_compare(x: &Coset, y: &Coset) -> Result<Relation> {
    use std::cmp::Ordering::*;
    Ok(match x.level.cmp(&y.level) {
        Equal => {
            if x.contains(&y.rep)? {
                Relation::Equal
            } else {
                Relation::Disjoint
            }
        }
        Less => {
            if x.contains(&y.rep)? {
                Relation::LeftContainsRight
            } else {
                Relation::Disjoint
            }
        }
        Greater => {
            if y.contains(&x.rep)? {
                Relation::RightContainsLeft
            } else {
                Relation::Disjoint
            }
        }
    })
}

/// `x ⊆ y`.
pub fn coset_subset(x: &Coset, y: &Coset) -> Result<bool> {
    Ok(matches!(coset_compare(x, y)?, Relation::Equal | Relation::RightContainsLeft))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Index {
    Finite(BigUint),
    Infinite,
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => write!(f, "infinite"),
        }
    }
}

/// `|K_A : K_B|` for `A <= B`.
pub fn index(q: u32, a: Level, b: Level) -> Result<Index> {
    if a > b {
        return Err(Error::InvalidLevel { i: a.i, j: a.j, reason: format!("index needs {a} <= {b}") });
    }
    if a.j != b.j {
        return Ok(Index::Infinite);
    }
    Ok(Index::Finite(BigUint::from(q).pow(4 * (b.i - a.i) as u32)))
}

/// `|K : K_{i,j}|`.
pub fn index_in_k(q: u32, level: Level) -> Result<Index> {
    check_level(level)?;
    if level.j > 0 {
        return Ok(Index::Infinite);
    }
    let q = BigUint::from(q);
    let big_q: BigUint = q.clone().pow((4 * level.i - 3) as u32);
    Ok(Index::Finite(big_q * (&q * &q - 1u32) * (&q - 1u32)))
}

fn budget_check(p: &GlobalParams, needed: &BigUint) -> Result<()> {
    if *needed > BigUint::from(p.coset_budget) {
        return Err(Error::BudgetExceeded { needed: needed.to_string(), budget: p.coset_budget });
    }
    Ok(())
}

/// Representatives `I + t1^i t2^j P` of `K_A / K_B`, with `P` ranging over
/// matrices of t1-polynomials of degree `< m − i`.
pub fn enumerate_cosets(p: &GlobalParams, a: Level, b: Level) -> Result<Vec<Mat2>> {
    check_level(a)?;
    if a.j != b.j || a > b {
        return Err(Error::InvalidLevel {
            i: b.i,
            j: b.j,
            reason: format!("cosets of K{b} in K{a} need the same t2-level and {a} <= {b}"),
        });
    }
    let depth = (b.i - a.i) as usize;
    let needed = BigUint::from(p.q).pow(4 * depth as u32);
    budget_check(p, &needed)?;
    let count = usize::try_from(&needed).expect("within budget");
    let q = p.q as usize;
    let mut out = Vec::with_capacity(count);
    for mut code in 0..count {
        let mut entries: [Vec<(Level, i64)>; 4] = Default::default();
        for entry in entries.iter_mut() {
            for k in 0..depth {
                let c = code % q;
                code /= q;
                if c != 0 {
                    entry.push((Level::new(a.i + k as i32, a.j), c as i64));
                }
            }
        }
        let [ea, eb, ec, ed] = entries;
        let one = (Level::ZERO, 1);
        out.push(Mat2::new(
            FieldElem::from_terms(p, ea.into_iter().chain([one]))?,
            FieldElem::from_terms(p, eb)?,
            FieldElem::from_terms(p, ec)?,
            FieldElem::from_terms(p, ed.into_iter().chain([one]))?,
        ));
    }
    Ok(out)
}

/// Constant lifts of `GL_2(F_q)`, a full system of representatives of `K / K_{1,0}`.
pub fn enumerate_k_mod_k10(p: &GlobalParams) -> Result<Vec<Mat2>> {
    let q = p.q as i64;
    let needed = BigUint::from(((q * q - 1) * (q * q - q)) as u64);
    budget_check(p, &needed)?;
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if (a * d - b * c).rem_euclid(q) != 0 {
                        out.push(Mat2::from_ints(p, [[a, b], [c, d]]));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementaryFactor {
    /// `diag(x, 1)`
    DiagLeft(FieldElem),
    /// `diag(1, x)`
    DiagRight(FieldElem),
    /// `[[1, u], [0, 1]]`
    Upper(FieldElem),
    /// `[[1, 0], [u, 1]]`
    Lower(FieldElem),
    Swap,
}

impl ElementaryFactor {
    pub fn to_mat(&self, p: &GlobalParams) -> Mat2 {
        match self {
            ElementaryFactor::DiagLeft(x) => Mat2::diag(x.clone(), FieldElem::one(p)),
            ElementaryFactor::DiagRight(x) => Mat2::diag(FieldElem::one(p), x.clone()),
            ElementaryFactor::Upper(u) => Mat2::upper(p, u.clone()),
            ElementaryFactor::Lower(u) => Mat2::lower(p, u.clone()),
            ElementaryFactor::Swap => Mat2::swap(p),
        }
    }

    fn is_identity(&self, p: &GlobalParams) -> bool {
        match self {
            ElementaryFactor::DiagLeft(x) | ElementaryFactor::DiagRight(x) => *x == FieldElem::one(p),
            ElementaryFactor::Upper(u) | ElementaryFactor::Lower(u) => u.is_zero(),
            ElementaryFactor::Swap => false,
        }
    }
}

impl fmt::Display for ElementaryFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementaryFactor::DiagLeft(x) => write!(f, "diag({x}, 1)"),
            ElementaryFactor::DiagRight(x) => write!(f, "diag(1, {x})"),
            ElementaryFactor::Upper(u) => write!(f, "upper({u})"),
            ElementaryFactor::Lower(u) => write!(f, "lower({u})"),
            ElementaryFactor::Swap => write!(f, "swap"),
        }
    }
}

/// Writes `h` as an ordered product of elementary factors. The pivot of the
/// first column is the entry of minimal valuation (top entry on ties), and
/// `h = [swap] · lower(c/a) · diag(a,1) · diag(1,det/a) · upper(b/a)`.
pub fn elementary_decompose(p: &GlobalParams, h: &Mat2) -> Result<Vec<ElementaryFactor>> {
    let det = h.det()?;
    if det.is_zero() {
        return Err(Error::NotInvertible);
    }
    let swap = match (h.a.is_zero(), h.c.is_zero()) {
        (true, true) => return Err(Error::NotInvertible),
        (true, false) => true,
        (false, true) => false,
        (false, false) => h.c.valuation()? < h.a.valuation()?,
    };
    let (a, b, c) = if swap { (&h.c, &h.d, &h.a) } else { (&h.a, &h.b, &h.c) };
    let det = if swap { det.neg() } else { det };
    let a_inv = a.inv()?;
    let mut factors = Vec::new();
    if swap {
        factors.push(ElementaryFactor::Swap);
    }
    factors.extend([
        ElementaryFactor::Lower(c.mul(&a_inv)?),
        ElementaryFactor::DiagLeft(a.clone()),
        ElementaryFactor::DiagRight(det.mul(&a_inv)?),
        ElementaryFactor::Upper(b.mul(&a_inv)?),
    ]);
    factors.retain(|f| !f.is_identity(p));
    let product = factor_product(p, &factors)?;
    if !product.agrees_with(h)? {
        return Err(Error::Internal(format!("elementary factors of {h} multiply back to {product}")));
    }
    Ok(factors)
}

pub fn factor_product(p: &GlobalParams, factors: &[ElementaryFactor]) -> Result<Mat2> {
    let mut acc = Mat2::identity(p);
    for f in factors {
        acc = acc.mul(&f.to_mat(p))?;
    }
    Ok(acc)
}

impl One for Index {
    fn one() -> Self {
        Index::Finite(BigUint::one())
    }
}

impl std::ops::Mul for Index {
    type Output = Index;
    fn mul(self, o: Index) -> Index {
        match (self, o) {
            (Index::Finite(x), Index::Finite(y)) => Index::Finite(x * y),
            _ => Index::Infinite,
        }
    }
}
