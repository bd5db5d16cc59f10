//! The `R((X))`-valued Haar measure on ddd-sets, normalised by `μ(K) = 1`.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::field::Level;
use crate::matrix::Coset;
use crate::params::GlobalParams;
use crate::sets::{DDDSet, DDSet};
use crate::value::{rat_pow, Rational, ValueElem};

#[derive(Clone, Debug)]
pub struct MeasureContext {
    pub params: GlobalParams,
    /// `q^3 / ((q^2 - 1)(q - 1))`
    pub lambda: Rational,
}

pub fn lambda(q: u32) -> Rational {
    let q = BigInt::from(q);
    let one = BigInt::from(1);
    Rational::new(&q * &q * &q, (&q * &q - &one) * (&q - &one))
}

impl MeasureContext {
    pub fn new(params: GlobalParams) -> Self {
        let lambda = lambda(params.q);
        MeasureContext { params, lambda }
    }

    /// `μ(gK_{i,j}) = λ q^{-4i} X^{4j}`, whatever the representative.
    pub fn mu_level(&self, level: Level) -> ValueElem {
        let q = Rational::from_integer(BigInt::from(self.params.q));
        ValueElem::monomial(&self.lambda * rat_pow(&q, -4 * level.i as i64), 4 * level.j as i64)
    }

    pub fn mu_distinguished(&self, c: &Coset) -> ValueElem {
        self.mu_level(c.level())
    }

    pub fn mu_dd(&self, d: &DDSet) -> ValueElem {
        let big: ValueElem = d.big().iter().map(|c| self.mu_distinguished(c)).sum();
        let small: ValueElem = d.small().iter().map(|c| self.mu_distinguished(c)).sum();
        big - small
    }

    pub fn mu(&self, a: &DDDSet) -> ValueElem {
        let mut counts: BTreeMap<Level, i64> = BTreeMap::new();
        for c in a.big_shells() {
            *counts.entry(c.level()).or_default() += 1;
        }
        for c in a.small_shells() {
            *counts.entry(c.level()).or_default() -= 1;
        }
        counts.into_iter().map(|(l, n)| self.mu_level(l).scale(&Rational::from_integer(BigInt::from(n)))).sum()
    }

    /// The classical value `λ q^{-4i}` of the residue-level subgroup, so that
    /// `μ(K_{i,j}) = X^{4j} · mu_residue(i)`.
    pub fn mu_residue(&self, i: i32) -> Rational {
        let q = Rational::from_integer(BigInt::from(self.params.q));
        &self.lambda * rat_pow(&q, -4 * i as i64)
    }
}
