//! Truncated arithmetic in `F = F_q((t1))((t2))`.
//!
//! An element stores the coefficients it knows together with a description
//! of the monomials it does *not* know. Everything outside that unknown
//! region is known exactly (and is zero unless stored). The unknown region
//! only ever sits "above" the known part: at each t2-level `b` it is either
//! empty or all t1-exponents from some bound upwards, plus every t2-level
//! from an optional cap upwards. This is exactly the shape produced by
//! dropping high-order terms, and it is what makes leading terms and ideal
//! membership certifiable.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::GlobalParams;
use crate::value::{rat_pow, Rational, ValueElem};

/// An exponent pair `(i, j)` of `t1^i t2^j`, ordered lexicographically from
/// the right: `(i, j) < (m, n)` iff `j < n`, or `j == n` and `i < m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(i32, i32)", into = "(i32, i32)")]
pub struct Level {
    pub i: i32,
    pub j: i32,
}

impl Level {
    pub const ZERO: Level = Level { i: 0, j: 0 };

    pub const fn new(i: i32, j: i32) -> Self {
        Level { i, j }
    }

    /// `true` for levels strictly above `(0, 0)`, the ones indexing subgroups.
    pub fn is_positive(self) -> bool {
        self > Level::ZERO
    }
}

impl From<(i32, i32)> for Level {
    fn from((i, j): (i32, i32)) -> Self {
        Level { i, j }
    }
}

impl From<Level> for (i32, i32) {
    fn from(l: Level) -> Self {
        (l.i, l.j)
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.j, self.i).cmp(&(other.j, other.i))
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Level {
    type Output = Level;
    fn add(self, o: Level) -> Level {
        Level::new(self.i + o.i, self.j + o.j)
    }
}

impl Sub for Level {
    type Output = Level;
    fn sub(self, o: Level) -> Level {
        Level::new(self.i - o.i, self.j - o.j)
    }
}

impl Neg for Level {
    type Output = Level;
    fn neg(self) -> Level {
        Level::new(-self.i, -self.j)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Storage rectangle for coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub t1: (i32, i32),
    pub t2: (i32, i32),
}

impl Window {
    pub fn from_params(p: &GlobalParams) -> Self {
        Window { t1: p.t1_window, t2: p.t2_window }
    }

    fn meet(self, o: Window) -> Result<Window> {
        let w = Window {
            t1: (self.t1.0.max(o.t1.0), self.t1.1.min(o.t1.1)),
            t2: (self.t2.0.max(o.t2.0), self.t2.1.min(o.t2.1)),
        };
        if w.t1.0 > w.t1.1 || w.t2.0 > w.t2.1 {
            return Err(Error::PrecisionExhausted("operand windows do not overlap".into()));
        }
        Ok(w)
    }
}

/// The unknown region of an element: at t2-level `b`, t1-exponents
/// `>= rows[b]`; and every level `>= cap`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
struct Precision {
    rows: BTreeMap<i32, i32>,
    cap: Option<i32>,
}

impl Precision {
    fn is_exact(&self) -> bool {
        self.rows.is_empty() && self.cap.is_none()
    }

    fn knows(&self, l: Level) -> bool {
        self.cap.is_none_or(|c| l.j < c) && self.rows.get(&l.j).is_none_or(|&r| l.i < r)
    }

    fn lower_row(&mut self, b: i32, a: i32) {
        self.rows.entry(b).and_modify(|r| *r = (*r).min(a)).or_insert(a);
    }

    fn lower_cap(&mut self, c: i32) {
        self.cap = Some(self.cap.map_or(c, |old| old.min(c)));
    }

    fn meet(&self, o: &Precision) -> Precision {
        let mut p = self.clone();
        for (&b, &a) in &o.rows {
            p.lower_row(b, a);
        }
        if let Some(c) = o.cap {
            p.lower_cap(c);
        }
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        if let Some(c) = self.cap {
            self.rows.retain(|&b, _| b < c);
        }
    }

    fn shift(&self, by: Level) -> Precision {
        Precision {
            rows: self.rows.iter().map(|(&b, &a)| (b + by.j, a + by.i)).collect(),
            cap: self.cap.map(|c| c + by.j),
        }
    }
}

pub(crate) fn inv_mod(c: u32, q: u32) -> u32 {
    debug_assert!(!c.is_multiple_of(q));
    let (mut base, mut exp, mut acc) = (c as u64 % q as u64, q as u64 - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q as u64;
        }
        base = base * base % q as u64;
        exp >>= 1;
    }
    acc as u32
}

/// An element of `F_q((t1))((t2))` known up to a precision region.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    q: u32,
    /// Sorted ascending by `Level`, nonzero residues in `1..q`.
    terms: Vec<(Level, u32)>,
    window: Window,
    prec: Precision,
}

impl FieldElem {
    pub fn zero(p: &GlobalParams) -> Self {
        FieldElem { q: p.q, terms: Vec::new(), window: Window::from_params(p), prec: Precision::default() }
    }

    pub fn one(p: &GlobalParams) -> Self {
        Self::from_terms(p, [(Level::ZERO, 1)]).expect("window contains the unit")
    }

    pub fn scalar(p: &GlobalParams, c: i64) -> Self {
        Self::from_terms(p, [(Level::ZERO, c)]).expect("window contains the unit")
    }

    /// `c * t1^i * t2^j`.
    pub fn monomial(p: &GlobalParams, c: i64, level: Level) -> Result<Self> {
        Self::from_terms(p, [(level, c)])
    }

    pub fn t1(p: &GlobalParams) -> Self {
        Self::monomial(p, 1, Level::new(1, 0)).expect("t1 in window")
    }

    pub fn t2(p: &GlobalParams) -> Self {
        Self::monomial(p, 1, Level::new(0, 1)).expect("t2 in window")
    }

    /// Exact element from integer coefficients (reduced mod q).
    pub fn from_terms<I: IntoIterator<Item = (Level, i64)>>(p: &GlobalParams, terms: I) -> Result<Self> {
        let q = p.q;
        let mut acc: BTreeMap<Level, u32> = BTreeMap::new();
        for (l, c) in terms {
            let c = c.rem_euclid(q as i64) as u32;
            let e = acc.entry(l).or_insert(0);
            *e = (*e + c) % q;
        }
        settle(q, acc, Window::from_params(p), Precision::default())
    }

    /// Exact zero sharing this element's field and window.
    pub fn zero_like(&self) -> FieldElem {
        FieldElem { q: self.q, terms: Vec::new(), window: self.window, prec: Precision::default() }
    }

    pub fn one_like(&self) -> FieldElem {
        FieldElem { terms: vec![(Level::ZERO, 1)], ..self.zero_like() }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn terms(&self) -> &[(Level, u32)] {
        &self.terms
    }

    /// Coefficient of `t1^i t2^j`, or `None` when it is not known.
    pub fn coeff(&self, l: Level) -> Option<u32> {
        if !self.prec.knows(l) {
            return None;
        }
        Some(self.terms.binary_search_by(|(k, _)| k.cmp(&l)).map_or(0, |ix| self.terms[ix].1))
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_exact()
    }

    /// Exactly zero (no known terms, nothing unknown).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_exact()
    }

    fn compatible(&self, o: &FieldElem) -> Result<Window> {
        if self.q != o.q {
            return Err(Error::InvalidParams(format!("mixing residue fields q={} and q={}", self.q, o.q)));
        }
        self.window.meet(o.window)
    }

    pub fn add(&self, o: &FieldElem) -> Result<FieldElem> {
        let window = self.compatible(o)?;
        let prec = self.prec.meet(&o.prec);
        let mut acc: BTreeMap<Level, u32> = self.terms.iter().copied().collect();
        for &(l, c) in &o.terms {
            let e = acc.entry(l).or_insert(0);
            *e = (*e + c) % self.q;
        }
        settle(self.q, acc, window, prec)
    }

    pub fn neg(&self) -> FieldElem {
        let q = self.q;
        FieldElem { terms: self.terms.iter().map(|&(l, c)| (l, q - c)).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &FieldElem) -> Result<FieldElem> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: u32) -> FieldElem {
        let c = c % self.q;
        if c == 0 {
            return FieldElem { terms: Vec::new(), ..self.clone() };
        }
        let q = self.q as u64;
        FieldElem {
            terms: self.terms.iter().map(|&(l, v)| (l, (v as u64 * c as u64 % q) as u32)).collect(),
            ..self.clone()
        }
    }

    /// Lowest t1-exponent the element can carry at each t2-level below the cap.
    fn profile(&self) -> BTreeMap<i32, i32> {
        let mut m: BTreeMap<i32, i32> = BTreeMap::new();
        let known = self.terms.iter().map(|(l, _)| (l.j, l.i));
        let unknown = self.prec.rows.iter().map(|(&b, &a)| (b, a));
        for (b, a) in known.chain(unknown) {
            m.entry(b).and_modify(|x| *x = (*x).min(a)).or_insert(a);
        }
        m
    }

    fn lowest_level(&self) -> Option<i32> {
        let p = self.profile().keys().next().copied();
        match (p, self.prec.cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn mul(&self, o: &FieldElem) -> Result<FieldElem> {
        let window = self.compatible(o)?;
        if self.is_zero() || o.is_zero() {
            return Ok(FieldElem { q: self.q, terms: Vec::new(), window, prec: Precision::default() });
        }
        let mut prec = Precision::default();
        for (x, y) in [(self, o), (o, self)] {
            let y_low = y.lowest_level().expect("nonzero operand");
            if let Some(c) = x.prec.cap {
                prec.lower_cap(c + y_low);
            }
            let y_profile = y.profile();
            for (&b, &r) in &x.prec.rows {
                for (&b2, &a2) in &y_profile {
                    prec.lower_row(b + b2, r + a2);
                }
            }
        }
        prec.normalize();
        let q = self.q as u64;
        let mut acc: BTreeMap<Level, u32> = BTreeMap::new();
        for &(la, ca) in &self.terms {
            for &(lb, cb) in &o.terms {
                let e = acc.entry(la + lb).or_insert(0);
                *e = ((*e as u64 + ca as u64 * cb as u64) % q) as u32;
            }
        }
        settle(self.q, acc, window, prec)
    }

    fn mul_monomial(&self, c: u32, by: Level) -> Result<FieldElem> {
        let q = self.q as u64;
        let acc = self
            .terms
            .iter()
            .map(|&(l, v)| (l + by, (v as u64 * c as u64 % q) as u32))
            .collect();
        settle(self.q, acc, self.window, self.prec.shift(by))
    }

    /// The leading (right-lex smallest) known term, if it is certified to be
    /// the leading term of the true element.
    fn leading(&self) -> Result<(Level, u32)> {
        let Some(&(l, c)) = self.terms.first() else {
            return Err(if self.prec.is_exact() {
                Error::ZeroValue
            } else {
                Error::PrecisionExhausted("no known nonzero coefficient".into())
            });
        };
        if self.prec.rows.keys().next().is_some_and(|&b| b < l.j) {
            return Err(Error::PrecisionExhausted(format!(
                "cannot certify {} as the leading exponent",
                l
            )));
        }
        Ok((l, c))
    }

    /// The rank-two valuation `v(x)`.
    pub fn valuation(&self) -> Result<Level> {
        self.leading().map(|(l, _)| l)
    }

    /// Leading residue coefficient (the angular component).
    pub fn leading_coeff(&self) -> Result<u32> {
        self.leading().map(|(_, c)| c)
    }

    /// The module `|x|_F = q^{-i} X^j` where `(i, j) = v(x)`; `|0|_F = 0`.
    pub fn module_of(&self) -> Result<ValueElem> {
        if self.is_zero() {
            return Ok(ValueElem::zero());
        }
        let v = self.valuation()?;
        Ok(module_of_level(self.q, v))
    }

    /// Whether `x` lies in `t1^i t2^j O_F`, i.e. `x = 0` or `v(x) >= (i, j)`.
    pub fn in_ideal(&self, level: Level) -> Result<bool> {
        if self.terms.first().is_some_and(|(l, _)| *l < level) {
            return Ok(false);
        }
        let below_known = self.prec.cap.is_none_or(|c| c > level.j)
            && self.prec.rows.range(..level.j).next().is_none()
            && self.prec.rows.get(&level.j).is_none_or(|&r| r >= level.i);
        if below_known {
            Ok(true)
        } else {
            Err(Error::PrecisionExhausted(format!("membership in the ideal at {level} is undecided")))
        }
    }

    /// Inverse by the geometric series in the principal unit part.
    pub fn inv(&self) -> Result<FieldElem> {
        let (v, u) = self.leading()?;
        let u_inv = inv_mod(u, self.q);
        let unit = self.mul_monomial(u_inv, -v)?;
        let one = self.one_like();
        let m = unit.sub(&one)?;
        let w = self.window;
        let max_iter = ((w.t1.1 - w.t1.0 + 2) * (w.t2.1 - w.t2.0 + 2)) as usize + 8;
        let mut s = one.clone();
        for _ in 0..max_iter {
            // Knowledge only ever shrinks across iterations, so this settles.
            let next = one.sub(&m.mul(&s)?)?.restrict(&s.prec)?;
            if next == s {
                return s.mul_monomial(u_inv, -v);
            }
            s = next;
        }
        Err(Error::PrecisionExhausted("inverse series did not stabilise inside the window".into()))
    }

    fn restrict(&self, prec: &Precision) -> Result<FieldElem> {
        settle(self.q, self.terms.iter().copied().collect(), self.window, self.prec.meet(prec))
    }

    /// `true` when the two elements agree wherever both are known.
    pub fn agrees_with(&self, o: &FieldElem) -> Result<bool> {
        Ok(self.sub(o)?.terms.is_empty())
    }

    /// Known coefficients strictly below `level`, i.e. the class of `x` modulo
    /// `t1^i t2^j O_F`. Fails if part of that region is unknown.
    pub fn residue_below(&self, level: Level) -> Result<Vec<(Level, u32)>> {
        let known = self.prec.cap.is_none_or(|c| c > level.j)
            && self.prec.rows.range(..level.j).next().is_none()
            && self.prec.rows.get(&level.j).is_none_or(|&r| r >= level.i);
        if !known {
            return Err(Error::PrecisionExhausted(format!("residue modulo level {level} is not known")));
        }
        Ok(self.terms.iter().copied().filter(|(l, _)| *l < level).collect())
    }

    /// Parses the textual form `c*t1^a*t2^b + ...`, optionally followed by
    /// precision markers `O(t1^a*t2^b)` (row bound) and `O(t2^b)` (cap).
    pub fn parse(s: &str, p: &GlobalParams) -> Result<FieldElem> {
        let q = p.q as i64;
        let mut prec = Precision::default();
        let mut acc: BTreeMap<Level, u32> = BTreeMap::new();
        let parts = crate::value::split_signed_terms(s);
        if parts.is_empty() {
            return Err(Error::Parse("empty field element".into()));
        }
        for (neg, term) in parts {
            if let Some(inner) = term.strip_prefix("O(").and_then(|t| t.strip_suffix(')')) {
                let (c, l, has_t1) = parse_monomial(inner)?;
                if c != 1 {
                    return Err(Error::Parse(format!("bad precision marker `{term}`")));
                }
                if has_t1 {
                    prec.lower_row(l.j, l.i);
                } else {
                    prec.lower_cap(l.j);
                }
                continue;
            }
            let (c, l, _) = parse_monomial(&term)?;
            let c = if neg { -c } else { c };
            let e = acc.entry(l).or_insert(0);
            *e = ((*e as i64 + c).rem_euclid(q)) as u32;
        }
        prec.normalize();
        settle(p.q, acc, Window::from_params(p), prec)
    }
}

pub(crate) fn module_of_level(q: u32, v: Level) -> ValueElem {
    let qr = Rational::from_integer(BigInt::from(q));
    ValueElem::monomial(rat_pow(&qr, -(v.i as i64)), v.j as i64)
}

/// Returns `(coefficient, level, mentions_t1)`.
fn parse_monomial(s: &str) -> Result<(i64, Level, bool)> {
    let bad = || Error::Parse(format!("bad monomial `{s}`"));
    let mut c = 1i64;
    let mut l = Level::ZERO;
    let mut has_t1 = false;
    if s.is_empty() {
        return Err(bad());
    }
    for factor in s.split('*') {
        let (var, exp) = match factor.split_once('^') {
            Some((v, e)) => (v, e.parse::<i32>().map_err(|_| bad())?),
            None => (factor, 1),
        };
        match var {
            "t1" => {
                l.i += exp;
                has_t1 = true;
            }
            "t2" => l.j += exp,
            _ if factor.chars().all(|ch| ch.is_ascii_digit()) => c *= factor.parse::<i64>().map_err(|_| bad())?,
            _ => return Err(bad()),
        }
    }
    Ok((c, l, has_t1))
}

/// Builds an element from accumulated coefficients: drops zeros and unknown
/// monomials, and turns monomials outside the window into unknown region.
/// A monomial below the t1 edge can only be forgotten together with its whole
/// t2-level and everything above it; one below the t2 edge is an error.
fn settle(q: u32, acc: BTreeMap<Level, u32>, window: Window, mut prec: Precision) -> Result<FieldElem> {
    for (&l, &c) in &acc {
        if c == 0 || !prec.knows(l) {
            continue;
        }
        if l.j > window.t2.1 || l.i < window.t1.0 {
            prec.lower_cap(l.j);
        }
    }
    if let Some((&b, _)) = prec.rows.range(window.t2.1 + 1..).next() {
        prec.lower_cap(b);
    }
    prec.normalize();
    for (&l, &c) in &acc {
        if c == 0 || !prec.knows(l) {
            continue;
        }
        if l.i > window.t1.1 {
            prec.lower_row(l.j, window.t1.1 + 1);
        }
    }
    prec.normalize();
    if prec.cap.is_some_and(|c| c <= window.t2.0) {
        return Err(Error::PrecisionExhausted("no coefficient inside the window is known".into()));
    }
    let mut terms = Vec::with_capacity(acc.len());
    for (l, c) in acc {
        if c == 0 || !prec.knows(l) {
            continue;
        }
        if l.j < window.t2.0 {
            return Err(Error::PrecisionExhausted(format!(
                "monomial t1^{}*t2^{} lies below the precision window",
                l.i, l.j
            )));
        }
        terms.push((l, c));
    }
    Ok(FieldElem { q, terms, window, prec })
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> =
            self.terms.iter().map(|(l, c)| format!("{}*t1^{}*t2^{}", c, l.i, l.j)).collect();
        for (b, a) in &self.prec.rows {
            parts.push(format!("O(t1^{a}*t2^{b})"));
        }
        if let Some(c) = self.prec.cap {
            parts.push(format!("O(t2^{c})"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rat;
    use proptest::prelude::*;

    fn p2() -> GlobalParams {
        GlobalParams::default()
    }

    fn fe(s: &str) -> FieldElem {
        FieldElem::parse(s, &p2()).unwrap()
    }

    #[test]
    fn right_lex_order() {
        assert!(Level::new(1, 0) < Level::new(0, 1));
        assert!(Level::new(-9, 1) > Level::new(1, 0));
        assert!(Level::new(2, 3) > Level::new(1, 3));
    }

    #[test]
    fn basic_arithmetic() {
        let p = p2();
        let t1 = FieldElem::t1(&p);
        let t2 = FieldElem::t2(&p);
        assert_eq!(t1.add(&t2).unwrap(), fe("t1 + t2"));
        let one = FieldElem::one(&p);
        let prod = one.add(&t1).unwrap().mul(&one.sub(&t1).unwrap()).unwrap();
        assert_eq!(prod, fe("1 - t1^2"));
        assert_eq!(fe("t1^-1*t2").mul(&fe("t1*t2")).unwrap(), fe("t2^2"));
    }

    #[test]
    fn valuations() {
        assert_eq!(fe("t1^-3*t2^2 + t1*t2^3").valuation().unwrap(), Level::new(-3, 2));
        assert_eq!(fe("t1^2").valuation().unwrap(), Level::new(2, 0));
        assert_eq!(fe("1 + t1").valuation().unwrap(), Level::ZERO);
        assert_eq!(FieldElem::zero(&p2()).valuation(), Err(Error::ZeroValue));
    }

    #[test]
    fn module_values() {
        let x = fe("t1^2*t2^-1").mul(&fe("1 + t1")).unwrap();
        assert_eq!(x.module_of().unwrap(), ValueElem::monomial(rat(1, 4), -1));
        assert_eq!(FieldElem::one(&p2()).module_of().unwrap(), ValueElem::one());
        assert_eq!(FieldElem::zero(&p2()).module_of().unwrap(), ValueElem::zero());
    }

    #[test]
    fn ideal_membership() {
        assert!(fe("t1^5").in_ideal(Level::new(1, 0)).unwrap());
        assert!(fe("t1^-9*t2").in_ideal(Level::new(1, 0)).unwrap());
        assert!(!fe("t1").in_ideal(Level::new(0, 1)).unwrap());
        assert!(FieldElem::zero(&p2()).in_ideal(Level::new(5, 5)).unwrap());
    }

    #[test]
    fn inverse_of_one_minus_t1() {
        let x = fe("1 - t1");
        let inv = x.inv().unwrap();
        for a in 0..=16 {
            assert_eq!(inv.coeff(Level::new(a, 0)), Some(1));
        }
        assert_eq!(inv.coeff(Level::new(17, 0)), None);
        assert!(x.mul(&inv).unwrap().agrees_with(&FieldElem::one(&p2())).unwrap());
    }

    #[test]
    fn inverse_of_monomials_is_exact() {
        let inv = fe("t2").inv().unwrap();
        assert_eq!(inv, fe("t2^-1"));
        assert!(inv.is_exact());
    }

    #[test]
    fn inverse_with_t2_series() {
        let x = fe("t1").mul(&fe("1 + t2")).unwrap();
        let inv = x.inv().unwrap();
        assert_eq!(inv.valuation().unwrap(), Level::new(-1, 0));
        for b in 0..=8 {
            assert_eq!(inv.coeff(Level::new(-1, b)), Some(1), "q = 2 so signs vanish");
        }
        let prod = x.mul(&inv).unwrap();
        assert!(prod.agrees_with(&FieldElem::one(&p2())).unwrap());
        assert_eq!(prod.valuation().unwrap(), Level::ZERO);
    }

    #[test]
    fn inverse_mixing_levels_q3() {
        let p = GlobalParams::new(3).unwrap();
        let x = FieldElem::parse("t1 + t2", &p).unwrap();
        let inv = x.inv().unwrap();
        // (t1 + t2)^-1 = sum (-1)^k t1^(-1-k) t2^k
        assert_eq!(inv.coeff(Level::new(-1, 0)), Some(1));
        assert_eq!(inv.coeff(Level::new(-2, 1)), Some(2));
        assert_eq!(inv.coeff(Level::new(-3, 2)), Some(1));
        assert!(x.mul(&inv).unwrap().agrees_with(&FieldElem::one(&p)).unwrap());
    }

    #[test]
    fn precision_blocks_certification() {
        // Level 0 known only below t1^3; the true leading term might hide there.
        let x = fe("t2 + O(t1^3*t2^0)");
        assert!(matches!(x.valuation(), Err(Error::PrecisionExhausted(_))));
        assert!(matches!(x.in_ideal(Level::new(0, 1)), Err(Error::PrecisionExhausted(_))));
        assert!(x.in_ideal(Level::new(3, 0)).unwrap());
        assert!(!fe("1 + O(t2^1)").in_ideal(Level::new(1, 0)).unwrap());
    }

    #[test]
    fn below_window_is_an_error() {
        let x = fe("t2^-5");
        assert!(matches!(x.mul(&x), Err(Error::PrecisionExhausted(_))));
        let y = fe("t1^-10 + t2^-1");
        let sq = y.mul(&y).unwrap();
        assert_eq!(sq.to_string(), "1*t1^0*t2^-2 + O(t2^0)");
    }

    #[test]
    fn display_round_trip() {
        let x = fe("t1^-3*t2^2 + t1*t2^3");
        assert_eq!(x.to_string(), "1*t1^-3*t2^2 + 1*t1^1*t2^3");
        let inv = fe("1 + t1 + t2").inv().unwrap();
        assert_eq!(FieldElem::parse(&inv.to_string(), &p2()).unwrap(), inv);
    }

    fn arb_elem(q: u32) -> impl Strategy<Value = FieldElem> {
        prop::collection::vec((-3i32..4, -1i32..3, 1i64..q as i64), 1..4).prop_map(move |ts| {
            let p = GlobalParams::new(q).unwrap();
            FieldElem::from_terms(&p, ts.into_iter().map(|(i, j, c)| (Level::new(i, j), c))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn valuation_is_multiplicative(x in arb_elem(3), y in arb_elem(3)) {
            prop_assume!(!x.is_zero() && !y.is_zero());
            let vx = x.valuation().unwrap();
            let vy = y.valuation().unwrap();
            prop_assert_eq!(x.mul(&y).unwrap().valuation().unwrap(), vx + vy);
            prop_assert_eq!(
                x.mul(&y).unwrap().module_of().unwrap(),
                &x.module_of().unwrap() * &y.module_of().unwrap()
            );
            let s = x.add(&y).unwrap();
            if !s.is_zero() {
                prop_assert!(s.valuation().unwrap() >= vx.min(vy));
            }
        }

        #[test]
        fn inverse_is_inverse(x in arb_elem(3)) {
            prop_assume!(!x.is_zero());
            let p = GlobalParams::new(3).unwrap();
            let inv = x.inv().unwrap();
            let prod = x.mul(&inv).unwrap();
            prop_assert!(prod.agrees_with(&FieldElem::one(&p)).unwrap());
            prop_assert_eq!(prod.valuation().unwrap(), Level::ZERO);
        }

        #[test]
        fn ideal_membership_matches_valuation(x in arb_elem(2), i in -3i32..4, j in -1i32..3) {
            prop_assume!(!x.is_zero());
            let level = Level::new(i, j);
            let v = x.valuation().unwrap();
            prop_assert_eq!(x.in_ideal(level).unwrap(), v >= level);
        }
    }
}
