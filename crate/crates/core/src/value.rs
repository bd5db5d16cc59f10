//! The value ring: Laurent polynomials in `X` over the rationals, with an
//! optional truncation marker for results of infinite series.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// `base^exp` for a possibly negative exponent.
pub fn rat_pow(base: &Rational, exp: i64) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// An element of the value field restricted to finite Laurent polynomials.
///
/// When `truncated_at` is `Some(t)` the element is only known modulo
/// `X^(t+1)`: no stored exponent exceeds `t`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ValueElem {
    terms: BTreeMap<i64, Rational>,
    truncated_at: Option<i64>,
}

impl ValueElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: Rational, exp: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        ValueElem { terms, truncated_at: None }
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rational)>>(iter: I) -> Self {
        let mut v = ValueElem::zero();
        for (e, c) in iter {
            v.add_term(e, c);
        }
        v
    }

    fn add_term(&mut self, exp: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        if matches!(self.truncated_at, Some(t) if exp > t) {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    /// Marks the element as known only modulo `X^(t+1)`, discarding higher terms.
    pub fn truncate(mut self, t: i64) -> Self {
        let t = self.truncated_at.map_or(t, |old| old.min(t));
        self.terms.retain(|e, _| *e <= t);
        self.truncated_at = Some(t);
        self
    }

    pub fn truncated_at(&self) -> Option<i64> {
        self.truncated_at
    }

    pub fn is_exact(&self) -> bool {
        self.truncated_at.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.truncated_at.is_none()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, exp: i64) -> Rational {
        self.terms.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return ValueElem { terms: BTreeMap::new(), truncated_at: self.truncated_at };
        }
        ValueElem {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
            truncated_at: self.truncated_at,
        }
    }

    /// Lowest X-exponent at which the element can be nonzero, `None` for exact zero.
    fn order_bound(&self) -> Option<i64> {
        match (self.min_exponent(), self.truncated_at) {
            (Some(m), Some(t)) => Some(m.min(t + 1)),
            (None, Some(t)) => Some(t + 1),
            (m, None) => m,
        }
    }

    /// Inverse of a single exact monomial `c X^e`.
    pub fn inv_monomial(&self) -> Result<Self> {
        if self.terms.len() != 1 || !self.is_exact() {
            return Err(Error::InvalidParams(format!("{self} is not an exact monomial")));
        }
        let (e, c) = self.terms.iter().next().unwrap();
        Ok(ValueElem::monomial(c.recip(), -e))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = ValueElem::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// The term of least X-exponent.
    pub fn dominant_term(&self) -> Result<Self> {
        let (e, c) = self.terms.iter().next().ok_or(Error::ZeroValue)?;
        Ok(ValueElem::monomial(c.clone(), *e))
    }
}

impl Add for &ValueElem {
    type Output = ValueElem;
    fn add(self, rhs: &ValueElem) -> ValueElem {
        let trunc = match (self.truncated_at, rhs.truncated_at) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let mut out = ValueElem { terms: BTreeMap::new(), truncated_at: trunc };
        for (e, c) in self.terms.iter().chain(rhs.terms.iter()) {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Neg for &ValueElem {
    type Output = ValueElem;
    fn neg(self) -> ValueElem {
        ValueElem {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
            truncated_at: self.truncated_at,
        }
    }
}

impl Sub for &ValueElem {
    type Output = ValueElem;
    fn sub(self, rhs: &ValueElem) -> ValueElem {
        self + &(-rhs)
    }
}

impl Mul for &ValueElem {
    type Output = ValueElem;
    fn mul(self, rhs: &ValueElem) -> ValueElem {
        // An unknown tail O(X^(t+1)) times anything of order >= o is O(X^(t+1+o)).
        let trunc = match (self.order_bound(), rhs.order_bound()) {
            (None, _) | (_, None) => None,
            (Some(oa), Some(ob)) => {
                let ta = self.truncated_at.map(|t| t + ob);
                let tb = rhs.truncated_at.map(|t| t + oa);
                match (ta, tb) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
        };
        let mut out = ValueElem { terms: BTreeMap::new(), truncated_at: trunc };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ValueElem {
            type Output = ValueElem;
            fn $m(self, rhs: ValueElem) -> ValueElem {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ValueElem> for ValueElem {
            type Output = ValueElem;
            fn $m(self, rhs: &ValueElem) -> ValueElem {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::iter::Sum for ValueElem {
    fn sum<I: Iterator<Item = ValueElem>>(iter: I) -> Self {
        iter.fold(ValueElem::zero(), |acc, v| acc + v)
    }
}

/// Sums `coeff * ratio^k * X^(first + k*step)` over `k >= 0`.
///
/// With `step == 0` the sum is a real geometric series and is returned in
/// closed form; it diverges unless `|ratio| < 1`. With `step > 0` the series
/// converges X-adically for any ratio and is returned modulo `X^(x_trunc+1)`.
pub fn geometric_closed_form(
    first: i64,
    coeff: &Rational,
    ratio: &Rational,
    step: i64,
    x_trunc: i64,
) -> Result<ValueElem> {
    if step < 0 {
        return Err(Error::InvalidParams("negative X-step in geometric series".into()));
    }
    if step == 0 {
        if ratio.abs() >= Rational::one() {
            return Err(Error::DivergentSeries(format!(
                "geometric series with ratio {ratio} does not converge"
            )));
        }
        return Ok(ValueElem::monomial(coeff / (Rational::one() - ratio), first));
    }
    let mut out = ValueElem::zero().truncate(x_trunc);
    let mut c = coeff.clone();
    let mut e = first;
    while e <= x_trunc {
        out.add_term(e, c.clone());
        c *= ratio;
        e += step;
    }
    Ok(out)
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ValueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in &self.terms {
            let mag = fmt_rational(&c.abs());
            let body = match *e {
                0 => mag,
                1 => format!("{mag}*X"),
                _ => format!("{mag}*X^{e}"),
            };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                write!(f, "{body}")?;
            } else if c.is_negative() {
                write!(f, " - {body}")?;
            } else {
                write!(f, " + {body}")?;
            }
            first = false;
        }
        if let Some(t) = self.truncated_at {
            if first {
                write!(f, "O(X^{})", t + 1)?;
            } else {
                write!(f, " + O(X^{})", t + 1)?;
            }
        } else if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn parse_x_power(s: &str) -> Result<i64> {
    match s {
        "X" => Ok(1),
        _ => s
            .strip_prefix("X^")
            .and_then(|e| e.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad power of X `{s}`"))),
    }
}

/// Splits a `+`/`-` separated sum into signed terms; a `-` right after `^` is
/// part of an exponent.
pub(crate) fn split_signed_terms(s: &str) -> Vec<(bool, String)> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut prev: Option<char> = None;
    for ch in compact.chars() {
        if (ch == '+' || ch == '-') && prev.is_some() && prev != Some('^') && prev != Some('(') {
            out.push((neg, std::mem::take(&mut cur)));
            neg = ch == '-';
        } else if (ch == '+' || ch == '-') && prev.is_none() {
            neg = ch == '-';
        } else {
            cur.push(ch);
        }
        prev = Some(ch);
    }
    if !cur.is_empty() || !out.is_empty() {
        out.push((neg, cur));
    }
    out
}

impl FromStr for ValueElem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = ValueElem::zero();
        let mut trunc = None;
        let parts = split_signed_terms(s);
        if parts.is_empty() {
            return Err(Error::Parse("empty value".into()));
        }
        for (neg, term) in parts {
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in `{s}`")));
            }
            if let Some(inner) = term.strip_prefix("O(").and_then(|t| t.strip_suffix(')')) {
                trunc = Some(parse_x_power(inner)? - 1);
                continue;
            }
            let (c, e) = match term.split_once('*') {
                Some((c, x)) => (parse_rational(c)?, parse_x_power(x)?),
                None if term.starts_with('X') => (Rational::one(), parse_x_power(&term)?),
                None => (parse_rational(&term)?, 0),
            };
            out.add_term(e, if neg { -c } else { c });
        }
        if let Some(t) = trunc {
            out = out.truncate(t);
        }
        Ok(out)
    }
}
