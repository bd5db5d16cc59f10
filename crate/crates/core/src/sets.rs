//! The ring of ddd-sets: finite disjoint unions of `∪big \ ∪small`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Pow;

use crate::error::{Error, Result};
use crate::field::{FieldElem, Level};
use crate::matrix::{coset_compare, coset_subset, enumerate_cosets, enumerate_k_mod_k10, Coset, Mat2, Relation};
use crate::params::GlobalParams;

/// A distinguished set that dd-sets can be built from: group cosets
/// `gK_{i,j}` or ideal cosets `α + t1^i t2^j O_F`. Any two shells are
/// disjoint or nested, with the deeper level inside.
pub trait Shell: Clone + fmt::Debug + fmt::Display + PartialEq {
    type Point: fmt::Display;
    /// `log_q` of the number of children.
    const FANOUT: u32;

    fn level(&self) -> Level;
    fn compare(&self, other: &Self) -> Result<Relation>;
    fn holds(&self, x: &Self::Point) -> Result<bool>;
    /// The shells one t1-step deeper that partition this one.
    fn children(&self, p: &GlobalParams) -> Result<Vec<Self>>;
    /// A point of the shell whose offset from the base point has exact
    /// level `level + (r, 0)`.
    fn probe(&self, p: &GlobalParams, r: i32) -> Result<Self::Point>;

    fn subset_of(&self, other: &Self) -> Result<bool> {
        Ok(matches!(self.compare(other)?, Relation::Equal | Relation::RightContainsLeft))
    }
}

impl Shell for Coset {
    type Point = Mat2;
    const FANOUT: u32 = 4;

    fn level(&self) -> Level {
        Coset::level(self)
    }

    fn compare(&self, other: &Self) -> Result<Relation> {
        coset_compare(self, other)
    }

    fn holds(&self, x: &Mat2) -> Result<bool> {
        self.contains(x)
    }

    fn children(&self, p: &GlobalParams) -> Result<Vec<Self>> {
        Coset::children(self, p)
    }

    fn probe(&self, p: &GlobalParams, r: i32) -> Result<Mat2> {
        let lvl = Coset::level(self);
        let bump = FieldElem::monomial(p, 1, Level::new(lvl.i + r, lvl.j))?;
        let shift = Mat2::diag(FieldElem::one(p).add(&bump)?, FieldElem::one(p));
        self.rep().mul(&shift)
    }
}

/// `∪ big \ ∪ small` with pairwise disjoint big shells and pairwise disjoint
/// small shells, every small shell lying inside some big shell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DDSetOf<S> {
    big: Vec<S>,
    small: Vec<S>,
}

/// dd-sets in `GL_2(F)`.
pub type DDSet = DDSetOf<Coset>;

fn antichain<S: Shell>(shells: Vec<S>) -> Result<Vec<S>> {
    let mut keep: Vec<S> = Vec::with_capacity(shells.len());
    'next: for c in shells {
        let mut ix = 0;
        while ix < keep.len() {
            match keep[ix].compare(&c)? {
                Relation::Equal | Relation::LeftContainsRight => continue 'next,
                Relation::RightContainsLeft => {
                    keep.remove(ix);
                }
                Relation::Disjoint => ix += 1,
            }
        }
        keep.push(c);
    }
    Ok(keep)
}

impl<S: Shell> DDSetOf<S> {
    /// Normalises the presentation: nested shells are merged into the
    /// larger one, big shells swallowed by a strictly larger small shell
    /// are dropped, and small shells outside every big shell are dropped.
    /// A small shell equal to a big shell is kept.
    pub fn new(big: Vec<S>, small: Vec<S>) -> Result<Self> {
        let small = antichain(small)?;
        let mut kept_big = Vec::new();
        'big: for b in antichain(big)? {
            for s in &small {
                if b.compare(s)? == Relation::RightContainsLeft {
                    continue 'big;
                }
            }
            kept_big.push(b);
        }
        let mut kept_small = Vec::new();
        for s in small {
            let mut inside = false;
            for b in &kept_big {
                if s.subset_of(b)? {
                    inside = true;
                    break;
                }
            }
            if inside {
                kept_small.push(s);
            }
        }
        Ok(DDSetOf { big: kept_big, small: kept_small })
    }

    /// Builds the set without normalising; the caller guarantees the invariants.
    pub(crate) fn raw(big: Vec<S>, small: Vec<S>) -> Self {
        DDSetOf { big, small }
    }

    pub fn coset(c: S) -> Self {
        DDSetOf { big: vec![c], small: Vec::new() }
    }

    pub fn big(&self) -> &[S] {
        &self.big
    }

    pub fn small(&self) -> &[S] {
        &self.small
    }

    /// No big shells at all.
    pub fn is_trivially_empty(&self) -> bool {
        self.big.is_empty()
    }

    /// Of the form `X \ X`: every big shell is also a small shell.
    pub fn is_superfluous(&self) -> Result<bool> {
        for b in &self.big {
            let mut matched = false;
            for s in &self.small {
                if b.compare(s)? == Relation::Equal {
                    matched = true;
                    break;
                }
            }
            if !matched {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn contains(&self, g: &S::Point) -> Result<bool> {
        let mut in_big = false;
        for b in &self.big {
            if b.holds(g)? {
                in_big = true;
                break;
            }
        }
        if !in_big {
            return Ok(false);
        }
        for s in &self.small {
            if s.holds(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn intersect(&self, o: &Self) -> Result<Self> {
        let mut big = Vec::new();
        for a in &self.big {
            for c in &o.big {
                match a.compare(c)? {
                    Relation::Equal | Relation::RightContainsLeft => big.push(a.clone()),
                    Relation::LeftContainsRight => big.push(c.clone()),
                    Relation::Disjoint => {}
                }
            }
        }
        let small = self.small.iter().chain(&o.small).cloned().collect();
        Self::new(big, small)
    }

    /// `self \ o` as disjoint dd-sets:
    /// `(E1 \ ∪C) ⊔ ⊔_d (E1 ∩ d)` for `o = ∪C \ ∪D`.
    pub fn difference(&self, o: &Self) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        let outside = Self::new(self.big.clone(), self.small.iter().chain(&o.big).cloned().collect())?;
        if !outside.is_trivially_empty() {
            out.push(outside);
        }
        for d in &o.small {
            let part = self.intersect(&Self::coset(d.clone()))?;
            if !part.is_trivially_empty() {
                out.push(part);
            }
        }
        Ok(out)
    }

    /// A point of the set, or `None` when the set is empty.
    pub fn witness(&self, p: &GlobalParams) -> Result<Option<S::Point>> {
        for b in &self.big {
            if let Some(g) = uncovered_point(p, b, &self.small)? {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }
}

impl DDSet {
    pub fn left_translate(&self, g: &Mat2) -> Result<DDSet> {
        let tr = |v: &[Coset]| v.iter().map(|c| c.left_translate(g)).collect::<Result<Vec<_>>>();
        Ok(DDSetOf { big: tr(&self.big)?, small: tr(&self.small)? })
    }

    pub fn right_translate(&self, p: &GlobalParams, g: &Mat2) -> Result<DDSet> {
        let tr = |v: &[Coset]| v.iter().map(|c| c.right_translate(p, g)).collect::<Result<Vec<_>>>();
        Ok(DDSetOf { big: tr(&self.big)?, small: tr(&self.small)? })
    }
}

/// Budget needed to decide whether `big` is covered by `smalls`.
fn cover_cost<S: Shell>(q: u32, big: &S, smalls: &[&S]) -> BigUint {
    let deepest = smalls
        .iter()
        .filter(|s| s.level().j == big.level().j)
        .map(|s| s.level().i)
        .max()
        .unwrap_or(big.level().i);
    BigUint::from(q).pow(S::FANOUT * (deepest - big.level().i) as u32)
}

/// A point of `big` outside every shell in `smalls`.
fn uncovered_point<S: Shell>(p: &GlobalParams, big: &S, smalls: &[S]) -> Result<Option<S::Point>> {
    let mut inside = Vec::new();
    for s in smalls {
        match big.compare(s)? {
            Relation::Equal | Relation::RightContainsLeft => return Ok(None),
            Relation::LeftContainsRight => inside.push(s),
            Relation::Disjoint => {}
        }
    }
    let (same, thin): (Vec<&S>, Vec<&S>) = inside.into_iter().partition(|s| s.level().j == big.level().j);
    let needed = cover_cost(p.q, big, &same);
    if needed > BigUint::from(p.coset_budget) {
        return Err(Error::BudgetExceeded { needed: needed.to_string(), budget: p.coset_budget });
    }
    let Some(region) = uncovered_shell(p, big, &same)? else {
        return Ok(None);
    };
    // A shell on a deeper t2-level holds at most one of these candidates, so
    // one of them avoids every thin small shell.
    for r in 0..=thin.len() as i32 {
        let g = region.probe(p, r)?;
        let mut hit = false;
        for s in &thin {
            if s.holds(&g)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(Some(g));
        }
    }
    Err(Error::Internal("no candidate escaped the thin small shells".into()))
}

/// A shell inside `big` disjoint from every shell in `smalls`, all of which
/// share `big`'s t2-level.
fn uncovered_shell<S: Shell>(p: &GlobalParams, big: &S, smalls: &[&S]) -> Result<Option<S>> {
    let mut inside = Vec::new();
    for &s in smalls {
        match big.compare(s)? {
            Relation::Equal | Relation::RightContainsLeft => return Ok(None),
            Relation::LeftContainsRight => inside.push(s),
            Relation::Disjoint => {}
        }
    }
    if inside.is_empty() {
        return Ok(Some(big.clone()));
    }
    for child in big.children(p)? {
        if let Some(c) = uncovered_shell(p, &child, &inside)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

impl<S: Shell> fmt::Display for DDSetOf<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[S]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ∪ ");
        write!(f, "({})", join(&self.big))?;
        if !self.small.is_empty() {
            write!(f, " \\ ({})", join(&self.small))?;
        }
        Ok(())
    }
}

/// A finite disjoint union of dd-sets, in a fixed presentation.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DDDSet {
    components: Vec<DDSet>,
}

impl DDDSet {
    pub fn empty() -> Self {
        DDDSet::default()
    }

    /// Trusts the caller that the components are pairwise disjoint.
    pub fn from_components(components: Vec<DDSet>) -> Self {
        DDDSet { components }
    }

    /// Checks pairwise disjointness of the components before accepting them.
    pub fn new_checked(p: &GlobalParams, components: Vec<DDSet>) -> Result<Self> {
        for (ix, x) in components.iter().enumerate() {
            for (jx, y) in components.iter().enumerate().skip(ix + 1) {
                if let Some(g) = x.intersect(y)?.witness(p)? {
                    return Err(Error::InvalidPresentation(format!("components {ix} and {jx} overlap at {g}")));
                }
            }
        }
        Ok(DDDSet { components })
    }

    pub fn single(d: DDSet) -> Self {
        DDDSet { components: vec![d] }
    }

    pub fn coset(c: Coset) -> Self {
        DDDSet::single(DDSet::coset(c))
    }

    pub fn components(&self) -> &[DDSet] {
        &self.components
    }

    pub fn push(&mut self, d: DDSet) {
        self.components.push(d);
    }

    pub fn big_shells(&self) -> impl Iterator<Item = &Coset> {
        self.components.iter().flat_map(|c| c.big.iter())
    }

    pub fn small_shells(&self) -> impl Iterator<Item = &Coset> {
        self.components.iter().flat_map(|c| c.small.iter())
    }

    pub fn shell_count(&self) -> usize {
        self.components.iter().map(|c| c.big.len() + c.small.len()).sum()
    }

    pub fn contains(&self, g: &Mat2) -> Result<bool> {
        for c in &self.components {
            if c.contains(g)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Number of components containing `g`; exactly 0 or 1 for a valid set.
    pub fn multiplicity(&self, g: &Mat2) -> Result<usize> {
        let mut n = 0;
        for c in &self.components {
            if c.contains(g)? {
                n += 1;
            }
        }
        Ok(n)
    }

    pub fn intersect(&self, o: &DDDSet) -> Result<DDDSet> {
        let mut out = Vec::new();
        for a in &self.components {
            for b in &o.components {
                let c = a.intersect(b)?;
                if !c.is_trivially_empty() {
                    out.push(c);
                }
            }
        }
        Ok(DDDSet { components: out })
    }

    pub fn difference(&self, o: &DDDSet) -> Result<DDDSet> {
        let mut out = Vec::new();
        for a in &self.components {
            let mut pieces = vec![a.clone()];
            for b in &o.components {
                let mut next = Vec::new();
                for piece in &pieces {
                    next.extend(piece.difference(b)?);
                }
                pieces = next;
            }
            out.extend(pieces);
        }
        Ok(DDDSet { components: out })
    }

    /// `A ⊔ (B \ A)`.
    pub fn union(&self, o: &DDDSet) -> Result<DDDSet> {
        let mut out = self.clone();
        out.components.extend(o.difference(self)?.components);
        Ok(out)
    }

    pub fn left_translate(&self, g: &Mat2) -> Result<DDDSet> {
        let components = self.components.iter().map(|c| c.left_translate(g)).collect::<Result<_>>()?;
        Ok(DDDSet { components })
    }

    /// Fails with `NotRepresentable` unless `g ∈ F^× · K`.
    pub fn right_translate(&self, p: &GlobalParams, g: &Mat2) -> Result<DDDSet> {
        let components = self.components.iter().map(|c| c.right_translate(p, g)).collect::<Result<_>>()?;
        Ok(DDDSet { components })
    }

    /// Drops the superfluous `X \ X` components (and shell-less ones).
    pub fn reduce(&self) -> Result<DDDSet> {
        let mut out = Vec::new();
        for c in &self.components {
            if !c.is_trivially_empty() && !c.is_superfluous()? {
                out.push(c.clone());
            }
        }
        Ok(DDDSet { components: out })
    }

    /// Index of the first superfluous component, if any.
    pub fn first_superfluous(&self) -> Result<Option<usize>> {
        for (ix, c) in self.components.iter().enumerate() {
            if c.is_trivially_empty() || c.is_superfluous()? {
                return Ok(Some(ix));
            }
        }
        Ok(None)
    }

    pub fn is_reduced(&self) -> Result<bool> {
        Ok(self.first_superfluous()?.is_none())
    }

    pub fn witness(&self, p: &GlobalParams) -> Result<Option<Mat2>> {
        for c in &self.components {
            if let Some(g) = c.witness(p)? {
                return Ok(Some(g));
            }
        }
        Ok(None)
    }

    /// Decided by enumerating cosets at the finest small-shell level inside
    /// each big shell, within the coset budget.
    pub fn is_empty(&self, p: &GlobalParams) -> Result<bool> {
        Ok(self.witness(p)?.is_none())
    }

    /// A point in exactly one of the two sets, if any.
    pub fn symmetric_witness(&self, o: &DDDSet, p: &GlobalParams) -> Result<Option<Mat2>> {
        if let Some(g) = self.difference(o)?.witness(p)? {
            return Ok(Some(g));
        }
        o.difference(self)?.witness(p)
    }

    pub fn set_equal(&self, o: &DDDSet, p: &GlobalParams) -> Result<bool> {
        Ok(self.symmetric_witness(o, p)?.is_none())
    }

    /// `r` is a refinement of `self`: equal as sets, and every shell of
    /// `self` reappears as a shell of the same kind in `r`.
    pub fn is_refined_by(&self, r: &DDDSet, p: &GlobalParams) -> Result<bool> {
        for b in self.big_shells() {
            if !occurs(b, r.big_shells())? {
                return Ok(false);
            }
        }
        for s in self.small_shells() {
            if !occurs(s, r.small_shells())? {
                return Ok(false);
            }
        }
        self.set_equal(r, p)
    }
}

fn occurs<'a>(c: &Coset, mut among: impl Iterator<Item = &'a Coset>) -> Result<bool> {
    among.try_fold(false, |found, x| Ok(found || coset_compare(c, x)? == Relation::Equal))
}

impl fmt::Display for DDDSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" ⊔ "))
    }
}

/// `is_refinement(A, R)`.
pub fn is_refinement(a: &DDDSet, r: &DDDSet, p: &GlobalParams) -> Result<bool> {
    a.is_refined_by(r, p)
}

/// `GL_2(O_F)` as the disjoint union of its `K_{1,0}`-cosets.
pub fn full_k(p: &GlobalParams) -> Result<DDDSet> {
    let comps = enumerate_k_mod_k10(p)?
        .into_iter()
        .map(|g| Coset::new(g, Level::new(1, 0)).map(DDSet::coset))
        .collect::<Result<Vec<_>>>()?;
    Ok(DDDSet::from_components(comps))
}

/// `GL_2(O_F)` as the disjoint union of its `K_{i,0}`-cosets, `i ≥ 1`.
pub fn full_k_at(p: &GlobalParams, level: Level) -> Result<DDDSet> {
    let top = Level::new(1, 0);
    let inner = enumerate_cosets(p, top, level)?;
    let mut comps = Vec::new();
    for g in enumerate_k_mod_k10(p)? {
        for h in &inner {
            comps.push(DDSet::coset(Coset::new(g.mul(h)?, level)?));
        }
    }
    Ok(DDDSet::from_components(comps))
}

/// Outcome of `common_refinement` with the number of loop iterations used.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub set: DDDSet,
    pub iterations: usize,
}

/// A reduced common refinement of two reduced presentations of one set.
pub fn common_refinement(a: &DDDSet, b: &DDDSet, p: &GlobalParams) -> Result<Refinement> {
    if let Some(ix) = a.first_superfluous()? {
        return Err(Error::NotReduced(ix));
    }
    if let Some(ix) = b.first_superfluous()? {
        return Err(Error::NotReduced(ix));
    }
    if let Some(g) = a.symmetric_witness(b, p)? {
        return Err(Error::NotEqualSets { witness: g.to_string() });
    }
    let mut s = a.clone();
    let limit = (b.shell_count() + 1).pow(2);
    let mut iterations = 0;
    loop {
        if iterations > limit {
            return Err(Error::Internal("refinement loop exceeded its iteration bound".into()));
        }
        // Step 1: the first shell of `b`, in presentation order, that `s` lacks.
        let mut missing_big = None;
        for (ci, comp) in b.components.iter().enumerate() {
            for c in &comp.big {
                if !occurs(c, s.big_shells())? {
                    missing_big = Some((ci, c.clone()));
                    break;
                }
            }
            if missing_big.is_some() {
                break;
            }
        }
        if let Some((ci, c)) = missing_big {
            iterations += 1;
            if !split_inside_container(&mut s, &c)? {
                add_covering_component(&mut s, &b.components[ci], &c, p)?;
            }
            continue;
        }
        let mut missing_small = None;
        for d in b.small_shells() {
            if !occurs(d, s.small_shells())? {
                missing_small = Some(d.clone());
                break;
            }
        }
        let Some(d) = missing_small else { break };
        iterations += 1;
        if !split_inside_container(&mut s, &d)? {
            pad_small(&mut s, &d, p)?;
        }
    }
    Ok(Refinement { set: s, iterations })
}

/// Steps 2 and 4: find the minimal big shell `C_min ⊋ x` of `s` whose
/// component has no small shell containing `x`, and split `x` off it as
/// `(C_min \ (x ∪ D_disjoint)) ⊔ (x \ D_inside)`. Returns `false` if no such
/// shell exists.
fn split_inside_container(s: &mut DDDSet, x: &Coset) -> Result<bool> {
    let mut best: Option<(usize, Coset)> = None;
    for (ci, comp) in s.components.iter().enumerate() {
        for c in &comp.big {
            if coset_compare(c, x)? != Relation::LeftContainsRight {
                continue;
            }
            let mut blocked = false;
            for d in &comp.small {
                if coset_subset(x, d)? {
                    blocked = true;
                    break;
                }
            }
            if blocked {
                continue;
            }
            let smaller = match &best {
                None => true,
                Some((_, cur)) => coset_compare(cur, c)? == Relation::LeftContainsRight,
            };
            if smaller {
                best = Some((ci, c.clone()));
            }
        }
    }
    let Some((ci, _)) = best else { return Ok(false) };
    let comp = &s.components[ci];
    let mut outer_small = vec![x.clone()];
    let mut inner_small = Vec::new();
    for d in &comp.small {
        if coset_compare(x, d)? == Relation::LeftContainsRight {
            inner_small.push(d.clone());
        } else {
            outer_small.push(d.clone());
        }
    }
    let outer = DDSet::raw(comp.big.clone(), outer_small);
    let inner = DDSet::raw(vec![x.clone()], inner_small);
    s.components[ci] = outer;
    s.components.insert(ci + 1, inner);
    Ok(true)
}

/// Step 3: `c` is not inside any usable big shell of `s`, so `c` is covered by
/// the maximal big shells of `s` inside it together with the small shells
/// of its own component; add the empty component `c \ (those)`.
fn add_covering_component(s: &mut DDDSet, own: &DDSet, c: &Coset, p: &GlobalParams) -> Result<()> {
    let mut cover = Vec::new();
    for d in &own.small {
        match coset_compare(c, d)? {
            Relation::LeftContainsRight => cover.push(d.clone()),
            Relation::Equal | Relation::RightContainsLeft => {
                s.push(DDSet::raw(vec![c.clone()], c.children(p)?));
                return Ok(());
            }
            Relation::Disjoint => {}
        }
    }
    for x in s.big_shells() {
        if coset_compare(c, x)? == Relation::LeftContainsRight {
            cover.push(x.clone());
        }
    }
    let cover = antichain(cover)?;
    let cover = if cover.is_empty() { c.children(p)? } else { cover };
    s.push(DDSet::raw(vec![c.clone()], cover));
    Ok(())
}

/// Step 4 fallback: make `d` a small shell of an empty component that
/// does not have the superfluous `X \ X` form.
fn pad_small(s: &mut DDDSet, d: &Coset, p: &GlobalParams) -> Result<()> {
    let comp = match d.parent() {
        Some(parent) => {
            let parent = parent?;
            let mut small = vec![d.clone()];
            for child in parent.children(p)? {
                if coset_compare(&child, d)? != Relation::Equal {
                    small.push(child);
                }
            }
            DDSet::raw(vec![parent], small)
        }
        None => {
            let t1 = FieldElem::t1(p);
            let other = Coset::new(d.rep().mul(&Mat2::diag(t1, FieldElem::one(p)))?, d.level())?;
            let mut small = vec![d.clone()];
            small.extend(other.children(p)?);
            DDSet::raw(vec![d.clone(), other], small)
        }
    };
    s.push(comp);
    Ok(())
}
