//! Seeded random objects for property checks: group elements, ddd-sets,
//! equal re-presentations of a set, and F-side integrands.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::{FieldElem, Level};
use crate::field_integration::{ECoset, EStepFn, FDDSet, FIdealCoset, FSimpleFn};
use crate::matrix::{enumerate_k_mod_k10, factor_product, Coset, ElementaryFactor, Mat2};
use crate::params::GlobalParams;
use crate::sets::{DDDSet, DDSet, Shell};
use crate::value::{rat, ValueElem};

/// For `g ∈ K`, dropping every entry term at or above `level` moves `g`
/// within `g·K_level`; it keeps representatives short.
fn trim(p: &GlobalParams, g: &Mat2, level: Level) -> Result<Mat2> {
    let e = g.entries().map(|x| x.residue_below(level).map(|ts| ts.into_iter().map(|(l, c)| (l, c as i64))));
    let [a, b, c, d] = e;
    Ok(Mat2::new(
        FieldElem::from_terms(p, a?)?,
        FieldElem::from_terms(p, b?)?,
        FieldElem::from_terms(p, c?)?,
        FieldElem::from_terms(p, d?)?,
    ))
}

pub struct Sampler {
    p: GlobalParams,
    rng: ChaCha8Rng,
    k_reps: Vec<Mat2>,
}

impl Sampler {
    pub fn new(p: &GlobalParams, seed: u64) -> Result<Self> {
        Ok(Sampler { p: p.clone(), rng: ChaCha8Rng::seed_from_u64(seed), k_reps: enumerate_k_mod_k10(p)? })
    }

    pub fn params(&self) -> &GlobalParams {
        &self.p
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn residue(&mut self) -> i64 {
        self.rng.gen_range(1..self.p.q as i64)
    }

    /// A short random element of the ideal `t1^i t2^j O_F`.
    pub fn in_ideal(&mut self, level: Level) -> Result<FieldElem> {
        let n = self.rng.gen_range(0..=3);
        let mut terms = Vec::with_capacity(n);
        for _ in 0..n {
            let j = level.j + self.rng.gen_range(0..=1);
            let i = if j == level.j { level.i + self.rng.gen_range(0..3) } else { self.rng.gen_range(-2..3) };
            terms.push((Level::new(i, j), self.residue()));
        }
        FieldElem::from_terms(&self.p, terms)
    }

    pub fn unit(&mut self) -> Result<FieldElem> {
        let c = self.residue();
        FieldElem::scalar(&self.p, c).add(&self.in_ideal(Level::new(1, 0))?)
    }

    /// `I + t^L M` for a random integral `M`.
    pub fn kij_elem(&mut self, level: Level) -> Result<Mat2> {
        let m = Mat2::new(self.in_ideal(level)?, self.in_ideal(level)?, self.in_ideal(level)?, self.in_ideal(level)?);
        Mat2::identity(&self.p).add(&m)
    }

    /// A coset representative of `K/K_{1,0}` times a random element of `K_{1,0}`.
    pub fn k_elem(&mut self) -> Result<Mat2> {
        let rep = self.k_reps.choose(&mut self.rng).expect("K/K10 is nonempty").clone();
        rep.mul(&self.kij_elem(Level::new(1, 0))?)
    }

    /// `c·t1^a·t2^b` with `a, b ∈ [−2, 2]`.
    pub fn monomial(&mut self) -> Result<FieldElem> {
        let (a, b) = (self.rng.gen_range(-2..=2), self.rng.gen_range(-2..=2));
        let c = self.residue();
        FieldElem::monomial(&self.p, c, Level::new(a, b))
    }

    /// A product of at most `max_factors` elementary matrices.
    pub fn gl2_elem(&mut self, max_factors: usize) -> Result<(Vec<ElementaryFactor>, Mat2)> {
        let n = self.rng.gen_range(0..=max_factors);
        let mut factors = Vec::with_capacity(n);
        for _ in 0..n {
            let f = match self.rng.gen_range(0..5) {
                0 => ElementaryFactor::DiagLeft(self.monomial()?),
                1 => ElementaryFactor::DiagRight(self.monomial()?),
                2 => ElementaryFactor::Upper(self.monomial()?),
                3 => ElementaryFactor::Lower(self.monomial()?),
                _ => ElementaryFactor::Swap,
            };
            factors.push(f);
        }
        let g = factor_product(&self.p, &factors)?;
        Ok((factors, g))
    }

    /// A level above `(0,0)` with `j ≤ 1`.
    pub fn level(&mut self) -> Level {
        let j = self.rng.gen_range(0..=1);
        let i = if j == 0 { self.rng.gen_range(1..=2) } else { self.rng.gen_range(-2..=2) };
        Level::new(i, j)
    }

    /// A level strictly inside `l`: one t1-step deeper, or one t2-step.
    pub fn deeper(&mut self, l: Level) -> Level {
        if self.rng.gen_bool(0.5) {
            Level::new(l.i + 1, l.j)
        } else {
            Level::new(self.rng.gen_range(-2..=2), l.j + 1)
        }
    }

    /// A random coset of level `level` inside `c`, for `c` with a
    /// representative in `K`.
    pub fn coset_inside(&mut self, c: &Coset, level: Level) -> Result<Coset> {
        let l = c.level();
        let shift = self.kij_elem(l)?;
        let rep = trim(&self.p, &c.rep().mul(&shift)?, Level::new(l.i + 2, l.j).min(level))?;
        Coset::new(rep, level)
    }

    /// The same coset with a different representative.
    pub fn rerepresent(&mut self, c: &Coset) -> Result<Coset> {
        let l = c.level();
        let shift = self.kij_elem(l)?;
        Coset::new(trim(&self.p, &c.rep().mul(&shift)?, Level::new(l.i + 2, l.j))?, l)
    }

    /// Up to `max_components` disjoint dd-sets carved out of one coset of `K`.
    pub fn dddset(&mut self, max_components: usize) -> Result<DDDSet> {
        let root_level = self.level();
        let root = Coset::new(self.k_elem()?, root_level)?;
        let mut kids = root.children(&self.p)?;
        kids.shuffle(&mut self.rng);
        let n = self.rng.gen_range(1..=max_components.max(1));
        let mut comps = Vec::with_capacity(n);
        let mut kids = kids.into_iter();
        for _ in 0..n {
            let mut big = vec![kids.next().expect("at least q^4 children")];
            if self.rng.gen_bool(0.25) {
                big.push(kids.next().expect("at least q^4 children"));
            }
            let mut small = Vec::new();
            for b in &big {
                for _ in 0..self.rng.gen_range(0..=2) {
                    let l = self.deeper(b.level());
                    small.push(self.coset_inside(b, l)?);
                }
            }
            let d = DDSet::new(big, small)?;
            if !d.is_superfluous()? {
                comps.push(d);
            }
        }
        Ok(DDDSet::from_components(comps))
    }

    /// A presentation of the same set, built from random splits, carvings,
    /// change of representatives and reordering.
    pub fn rewrite(&mut self, a: &DDDSet, steps: usize) -> Result<DDDSet> {
        let mut comps: Vec<DDSet> = a.components().to_vec();
        for _ in 0..steps {
            if comps.is_empty() {
                break;
            }
            let ix = self.rng.gen_range(0..comps.len());
            let d = comps[ix].clone();
            let b = d.big().choose(&mut self.rng).expect("nonempty component").clone();
            let replacement: Vec<DDSet> = match self.rng.gen_range(0..3) {
                0 => {
                    let mut kids = b.children(&self.p)?;
                    kids.shuffle(&mut self.rng);
                    kids.truncate(self.rng.gen_range(1..=3));
                    let cut = DDSet::new(kids.clone(), Vec::new())?;
                    let mut out = d.difference(&cut)?;
                    for c in kids {
                        out.push(d.intersect(&DDSet::coset(c))?);
                    }
                    out
                }
                1 => {
                    let l = self.deeper(b.level());
                    let c = DDSet::coset(self.coset_inside(&b, l)?);
                    let mut out = d.difference(&c)?;
                    out.push(d.intersect(&c)?);
                    out
                }
                _ => {
                    let big = d.big().iter().map(|x| self.rerepresent(x)).collect::<Result<Vec<_>>>()?;
                    let small = d.small().iter().map(|x| self.rerepresent(x)).collect::<Result<Vec<_>>>()?;
                    vec![DDSet::new(big, small)?]
                }
            };
            comps.splice(ix..=ix, replacement);
            comps.retain(|c| !c.is_trivially_empty());
        }
        comps.shuffle(&mut self.rng);
        DDDSet::from_components(comps).reduce()
    }

    /// A point drawn near one of the shells of `a`, so that both sides of
    /// every boundary get exercised.
    pub fn point_near(&mut self, a: &DDDSet) -> Result<Mat2> {
        let shells: Vec<&Coset> = a.big_shells().chain(a.small_shells()).collect();
        let Some(c) = shells.choose(&mut self.rng).copied() else {
            return self.k_elem();
        };
        let l = c.level();
        let depth = match self.rng.gen_range(0..3) {
            0 => Level::new(l.i - 1, l.j),
            1 => l,
            _ => Level::new(l.i + 1, l.j),
        };
        let depth = if depth.is_positive() { depth } else { l };
        c.rep().mul(&self.kij_elem(depth)?)
    }

    pub fn value(&mut self) -> ValueElem {
        let num = self.rng.gen_range(-5..=5);
        let den = self.rng.gen_range(1..=4);
        ValueElem::monomial(rat(num, den), self.rng.gen_range(-1..=2))
    }

    pub fn f_ideal_coset(&mut self) -> Result<FIdealCoset> {
        let level = Level::new(self.rng.gen_range(-2..=2), self.rng.gen_range(0..=1));
        let center = self.in_ideal(Level::new(-2, 0))?;
        Ok(FIdealCoset::new(center, level))
    }

    /// A simple function on `F` whose terms sit on distinct children of one
    /// ideal coset.
    pub fn f_simple_fn(&mut self) -> Result<FSimpleFn> {
        let root = self.f_ideal_coset()?;
        let kids = root.children(&self.p)?;
        let n = self.rng.gen_range(0..=kids.len());
        let mut terms = Vec::with_capacity(n);
        for c in kids.into_iter().take(n) {
            let small = if self.rng.gen_bool(0.3) {
                let mut deeper = c.children(&self.p)?;
                vec![deeper.swap_remove(0)]
            } else {
                Vec::new()
            };
            terms.push((self.value(), FDDSet::new(vec![c], small)?));
        }
        FSimpleFn::new(&self.p, terms)
    }

    /// A step function on `E = F_q((ū))` with disjoint supports.
    pub fn e_step_fn(&mut self) -> Result<EStepFn> {
        let q = self.p.q;
        let k0 = self.rng.gen_range(-2..=1);
        let base: Vec<(i32, u32)> =
            (0..self.rng.gen_range(0..=2)).map(|_| (self.rng.gen_range(k0 - 3..k0), self.rng.gen_range(1..q))).collect();
        let mut terms = Vec::new();
        for r in 0..q {
            if self.rng.gen_bool(0.3) {
                continue;
            }
            let mut center = base.clone();
            center.push((k0, r));
            let k = if self.rng.gen_bool(0.5) {
                k0 + 1
            } else {
                center.push((k0 + 1, self.rng.gen_range(0..q)));
                k0 + 2
            };
            terms.push((rat(self.rng.gen_range(-4..=4), self.rng.gen_range(1..=3)), ECoset { center, k }));
        }
        EStepFn::new(q, terms)
    }
}
