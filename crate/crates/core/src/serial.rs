//! JSON workspace documents: parameters plus named sets and functions on
//! `GL_2(F)` and on `F`. See the README for the grammar.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElem, Level};
use crate::field_integration::{FDDSet, FIdealCoset, FSimpleFn};
use crate::integration::SimpleFn;
use crate::matrix::{Coset, Mat2};
use crate::params::GlobalParams;
use crate::sets::{full_k, DDDSet, DDSet};
use crate::value::ValueElem;

type MatrixDoc = [[String; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosetDoc {
    pub rep: MatrixDoc,
    pub level: (i32, i32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DDSetDoc {
    pub big: Vec<CosetDoc>,
    #[serde(default)]
    pub small: Vec<CosetDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FCosetDoc {
    pub center: String,
    pub level: (i32, i32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FDDSetDoc {
    pub big: Vec<FCosetDoc>,
    #[serde(default)]
    pub small: Vec<FCosetDoc>,
}

/// A support given by name or inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SupportDoc<T> {
    Name(String),
    Inline(T),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc<T> {
    pub coeff: String,
    pub support: SupportDoc<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub point: MatrixDoc,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub terms: Vec<TermDoc<DDSetDoc>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exceptional: Vec<PointDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FFunctionDoc {
    pub terms: Vec<TermDoc<FDDSetDoc>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceDoc {
    pub q: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_window: Option<(i32, i32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_window: Option<(i32, i32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_trunc: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coset_budget: Option<u64>,
    #[serde(default, deserialize_with = "unique_keys", skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, Vec<DDSetDoc>>,
    #[serde(default, deserialize_with = "unique_keys", skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, FunctionDoc>,
    #[serde(default, deserialize_with = "unique_keys", skip_serializing_if = "BTreeMap::is_empty")]
    pub fsets: BTreeMap<String, Vec<FDDSetDoc>>,
    #[serde(default, deserialize_with = "unique_keys", skip_serializing_if = "BTreeMap::is_empty")]
    pub ffunctions: BTreeMap<String, FFunctionDoc>,
}

fn unique_keys<'de, D, V>(d: D) -> std::result::Result<BTreeMap<String, V>, D::Error>
where
    D: Deserializer<'de>,
    V: Deserialize<'de>,
{
    struct Unique<V>(PhantomData<V>);
    impl<'de, V: Deserialize<'de>> Visitor<'de> for Unique<V> {
        type Value = BTreeMap<String, V>;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map with unique names")
        }
        fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = BTreeMap::new();
            while let Some((k, v)) = m.next_entry::<String, V>()? {
                if out.contains_key(&k) {
                    return Err(serde::de::Error::custom(format!("duplicate name `{k}`")));
                }
                out.insert(k, v);
            }
            Ok(out)
        }
    }
    d.deserialize_map(Unique(PhantomData))
}

/// Validated named objects.
#[derive(Clone, Debug, PartialEq)]
pub struct Workspace {
    pub params: GlobalParams,
    pub sets: BTreeMap<String, DDDSet>,
    pub functions: BTreeMap<String, SimpleFn>,
    pub fsets: BTreeMap<String, Vec<FDDSet>>,
    pub ffunctions: BTreeMap<String, FSimpleFn>,
}

pub fn level_of((i, j): (i32, i32)) -> Level {
    Level::new(i, j)
}

pub fn matrix_from_doc(m: &MatrixDoc, p: &GlobalParams) -> Result<Mat2> {
    Mat2::parse(&[[m[0][0].as_str(), m[0][1].as_str()], [m[1][0].as_str(), m[1][1].as_str()]], p)
}

fn context<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{what}: {m}")),
        Error::InvalidPresentation(m) => Error::InvalidPresentation(format!("{what}: {m}")),
        other => other,
    })
}

pub fn coset_from_doc(c: &CosetDoc, p: &GlobalParams) -> Result<Coset> {
    Coset::new(matrix_from_doc(&c.rep, p)?, level_of(c.level))
}

pub fn coset_to_doc(c: &Coset) -> CosetDoc {
    let l = c.level();
    CosetDoc { rep: c.rep().to_strings(), level: (l.i, l.j) }
}

pub fn ddset_from_doc(d: &DDSetDoc, p: &GlobalParams) -> Result<DDSet> {
    let big = d.big.iter().map(|c| coset_from_doc(c, p)).collect::<Result<Vec<_>>>()?;
    let small = d.small.iter().map(|c| coset_from_doc(c, p)).collect::<Result<Vec<_>>>()?;
    DDSet::new(big, small)
}

pub fn ddset_to_doc(d: &DDSet) -> DDSetDoc {
    DDSetDoc { big: d.big().iter().map(coset_to_doc).collect(), small: d.small().iter().map(coset_to_doc).collect() }
}

pub fn dddset_from_doc(comps: &[DDSetDoc], p: &GlobalParams) -> Result<DDDSet> {
    let comps = comps.iter().map(|d| ddset_from_doc(d, p)).collect::<Result<Vec<_>>>()?;
    DDDSet::new_checked(p, comps)
}

pub fn dddset_to_doc(a: &DDDSet) -> Vec<DDSetDoc> {
    a.components().iter().map(ddset_to_doc).collect()
}

pub fn fcoset_from_doc(c: &FCosetDoc, p: &GlobalParams) -> Result<FIdealCoset> {
    Ok(FIdealCoset::new(FieldElem::parse(&c.center, p)?, level_of(c.level)))
}

pub fn fcoset_to_doc(c: &FIdealCoset) -> FCosetDoc {
    FCosetDoc { center: c.center.to_string(), level: (c.level.i, c.level.j) }
}

pub fn fddset_from_doc(d: &FDDSetDoc, p: &GlobalParams) -> Result<FDDSet> {
    let big = d.big.iter().map(|c| fcoset_from_doc(c, p)).collect::<Result<Vec<_>>>()?;
    let small = d.small.iter().map(|c| fcoset_from_doc(c, p)).collect::<Result<Vec<_>>>()?;
    FDDSet::new(big, small)
}

pub fn fddset_to_doc(d: &FDDSet) -> FDDSetDoc {
    FDDSetDoc { big: d.big().iter().map(fcoset_to_doc).collect(), small: d.small().iter().map(fcoset_to_doc).collect() }
}

fn value(s: &str) -> Result<ValueElem> {
    s.parse()
}

pub fn function_to_doc(f: &SimpleFn) -> FunctionDoc {
    FunctionDoc {
        terms: f
            .terms()
            .iter()
            .map(|(c, d)| TermDoc { coeff: c.to_string(), support: SupportDoc::Inline(ddset_to_doc(d)) })
            .collect(),
        exceptional: f
            .exceptional()
            .iter()
            .map(|(g, v)| PointDoc { point: g.to_strings(), value: v.to_string() })
            .collect(),
    }
}

pub fn ffunction_to_doc(f: &FSimpleFn) -> FFunctionDoc {
    FFunctionDoc {
        terms: f
            .terms()
            .iter()
            .map(|(c, d)| TermDoc { coeff: c.to_string(), support: SupportDoc::Inline(fddset_to_doc(d)) })
            .collect(),
    }
}

/// `K`, `K<i><j>` for single digits, `K(i,j)`, and `empty`.
pub fn builtin_set(name: &str, p: &GlobalParams) -> Result<Option<DDDSet>> {
    if name == "K" {
        return full_k(p).map(Some);
    }
    if name == "empty" {
        return Ok(Some(DDDSet::empty()));
    }
    let Some(rest) = name.strip_prefix('K') else {
        return Ok(None);
    };
    let pair = if let Some(inner) = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let mut it = inner.split(',').map(|x| x.trim().parse::<i32>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(i)), Some(Ok(j)), None) => Some((i, j)),
            _ => None,
        }
    } else {
        let ds: Vec<char> = rest.chars().collect();
        match ds.as_slice() {
            [a, b] if a.is_ascii_digit() && b.is_ascii_digit() => {
                Some((a.to_digit(10).unwrap() as i32, b.to_digit(10).unwrap() as i32))
            }
            _ => None,
        }
    };
    match pair {
        Some((i, j)) => Ok(Some(DDDSet::coset(Coset::subgroup(p, Level::new(i, j))?))),
        None => Ok(None),
    }
}

impl Workspace {
    pub fn new(params: GlobalParams) -> Self {
        Workspace {
            params,
            sets: BTreeMap::new(),
            functions: BTreeMap::new(),
            fsets: BTreeMap::new(),
            ffunctions: BTreeMap::new(),
        }
    }

    /// Parameters in the document override those in `base`.
    pub fn from_doc(doc: &WorkspaceDoc, base: &GlobalParams) -> Result<Workspace> {
        let mut p = base.clone();
        p.q = doc.q;
        if let Some(w) = doc.t1_window {
            p.t1_window = w;
        }
        if let Some(w) = doc.t2_window {
            p.t2_window = w;
        }
        if let Some(x) = doc.x_trunc {
            p.x_trunc = x;
        }
        if let Some(b) = doc.coset_budget {
            p.coset_budget = b;
        }
        p.validate()?;
        for name in doc.sets.keys().chain(doc.functions.keys()).chain(doc.fsets.keys()).chain(doc.ffunctions.keys()) {
            let clashes = [doc.sets.contains_key(name), doc.functions.contains_key(name), doc.fsets.contains_key(name), doc.ffunctions.contains_key(name)]
                .iter()
                .filter(|x| **x)
                .count();
            if clashes > 1 {
                return Err(Error::Parse(format!("name `{name}` is used twice")));
            }
        }
        let mut ws = Workspace::new(p.clone());
        for (name, comps) in &doc.sets {
            let a = context(&format!("set `{name}`"), dddset_from_doc(comps, &p))?;
            ws.sets.insert(name.clone(), a);
        }
        for (name, comps) in &doc.fsets {
            let parts = comps.iter().map(|d| fddset_from_doc(d, &p)).collect::<Result<Vec<_>>>()?;
            for (ix, x) in parts.iter().enumerate() {
                for (jx, y) in parts.iter().enumerate().skip(ix + 1) {
                    if let Some(w) = x.intersect(y)?.witness(&p)? {
                        return Err(Error::InvalidPresentation(format!("F-set `{name}`: components {ix} and {jx} overlap at {w}")));
                    }
                }
            }
            ws.fsets.insert(name.clone(), parts);
        }
        for (name, f) in &doc.functions {
            let mut terms = Vec::new();
            for t in &f.terms {
                let c = value(&t.coeff)?;
                match &t.support {
                    SupportDoc::Inline(d) => terms.push((c, ddset_from_doc(d, &p)?)),
                    SupportDoc::Name(n) => {
                        for d in ws.set(n)?.components() {
                            terms.push((c.clone(), d.clone()));
                        }
                    }
                }
            }
            let exc = f
                .exceptional
                .iter()
                .map(|e| Ok((matrix_from_doc(&e.point, &p)?, value(&e.value)?)))
                .collect::<Result<Vec<_>>>()?;
            ws.functions.insert(name.clone(), context(&format!("function `{name}`"), SimpleFn::new(&p, terms, exc))?);
        }
        for (name, f) in &doc.ffunctions {
            let mut terms = Vec::new();
            for t in &f.terms {
                let c = value(&t.coeff)?;
                match &t.support {
                    SupportDoc::Inline(d) => terms.push((c, fddset_from_doc(d, &p)?)),
                    SupportDoc::Name(n) => {
                        let parts = ws.fsets.get(n).ok_or_else(|| Error::UnknownName(n.clone()))?;
                        terms.extend(parts.iter().map(|d| (c.clone(), d.clone())));
                    }
                }
            }
            ws.ffunctions.insert(name.clone(), context(&format!("F-function `{name}`"), FSimpleFn::new(&p, terms))?);
        }
        Ok(ws)
    }

    pub fn from_json(s: &str, base: &GlobalParams) -> Result<Workspace> {
        let doc: WorkspaceDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Workspace::from_doc(&doc, base)
    }

    pub fn to_doc(&self) -> WorkspaceDoc {
        let d = GlobalParams::default();
        let p = &self.params;
        WorkspaceDoc {
            q: p.q,
            t1_window: (p.t1_window != d.t1_window).then_some(p.t1_window),
            t2_window: (p.t2_window != d.t2_window).then_some(p.t2_window),
            x_trunc: (p.x_trunc != d.x_trunc).then_some(p.x_trunc),
            coset_budget: (p.coset_budget != d.coset_budget).then_some(p.coset_budget),
            sets: self.sets.iter().map(|(k, v)| (k.clone(), dddset_to_doc(v))).collect(),
            functions: self.functions.iter().map(|(k, v)| (k.clone(), function_to_doc(v))).collect(),
            fsets: self.fsets.iter().map(|(k, v)| (k.clone(), v.iter().map(fddset_to_doc).collect())).collect(),
            ffunctions: self.ffunctions.iter().map(|(k, v)| (k.clone(), ffunction_to_doc(v))).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("documents serialise")
    }

    /// A named set, falling back to the built-in names.
    pub fn set(&self, name: &str) -> Result<DDDSet> {
        if let Some(a) = self.sets.get(name) {
            return Ok(a.clone());
        }
        builtin_set(name, &self.params)?.ok_or_else(|| Error::UnknownName(name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureContext;

    const DOC: &str = r#"{
        "q": 2,
        "sets": {
            "A": [{"big": [{"rep": [["1","0"],["0","1"]], "level": [1,0]}],
                   "small": [{"rep": [["1","0"],["0","1"]], "level": [2,0]}]}]
        },
        "functions": {
            "f": {"terms": [{"coeff": "3*X", "support": "A"},
                            {"coeff": "1", "support": {"big": [{"rep": [["1","0"],["0","1"]], "level": [2,0]}]}}],
                  "exceptional": [{"point": [["t1","0"],["0","1"]], "value": "5"}]}
        },
        "fsets": {"U": [{"big": [{"center": "0", "level": [1,0]}]}]},
        "ffunctions": {"g": {"terms": [{"coeff": "2", "support": "U"}]}}
    }"#;

    #[test]
    fn round_trip() {
        let p = GlobalParams::default();
        let ws = Workspace::from_json(DOC, &p).unwrap();
        assert_eq!(ws.sets["A"].components().len(), 1);
        assert_eq!(ws.functions["f"].terms().len(), 2);
        let back = Workspace::from_json(&ws.to_json(), &p).unwrap();
        assert_eq!(back, ws);
        assert_eq!(back.to_json(), ws.to_json());
    }

    #[test]
    fn builtins() {
        let p = GlobalParams::default();
        let ws = Workspace::new(p.clone());
        let m = MeasureContext::new(p);
        assert_eq!(m.mu(&ws.set("K").unwrap()).to_string(), "1");
        assert_eq!(m.mu(&ws.set("K11").unwrap()).to_string(), "1/6*X^4");
        assert_eq!(m.mu(&ws.set("K(-1,1)").unwrap()), m.mu_level(Level::new(-1, 1)));
        assert_eq!(m.mu(&ws.set("empty").unwrap()).to_string(), "0");
        assert_eq!(ws.set("nope"), Err(Error::UnknownName("nope".into())));
        assert!(matches!(ws.set("K00"), Err(Error::InvalidLevel { .. })));
    }

    #[test]
    fn rejects_bad_documents() {
        let p = GlobalParams::default();
        let dup = r#"{"q": 2, "sets": {"A": [], "A": []}}"#;
        assert!(matches!(Workspace::from_json(dup, &p), Err(Error::Parse(m)) if m.contains("duplicate")));
        let clash = r#"{"q": 2, "sets": {"A": []}, "fsets": {"A": []}}"#;
        assert!(Workspace::from_json(clash, &p).is_err());
        let overlap = r#"{"q": 2, "sets": {"A": [
            {"big": [{"rep": [["1","0"],["0","1"]], "level": [1,0]}]},
            {"big": [{"rep": [["1","0"],["0","1"]], "level": [2,0]}]}]}}"#;
        assert!(matches!(Workspace::from_json(overlap, &p), Err(Error::InvalidPresentation(m)) if m.contains("set `A`")));
        let unknown = r#"{"q": 2, "functions": {"f": {"terms": [{"coeff": "1", "support": "B"}]}}}"#;
        assert_eq!(Workspace::from_json(unknown, &p), Err(Error::UnknownName("B".into())));
        assert!(matches!(Workspace::from_json(r#"{"q": 4}"#, &p), Err(Error::InvalidParams(_))));
        assert!(matches!(Workspace::from_json("[", &p), Err(Error::Parse(_))));
    }
}
