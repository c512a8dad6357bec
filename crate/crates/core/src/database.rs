//! Finite databases under the universal relation assumption, functional and
//! embedded multivalued dependencies, and the databases attached to subspace
//! families and to equivalence relations.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffmat::{vector_at, FieldPrime, Subspace};
use crate::relalg::{RelError, Relation, BASE_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DbError {
    #[error("a database needs at least one attribute and one tuple")]
    Empty,
    #[error("duplicate attribute `{0}`")]
    DuplicateAttribute(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("tuple {tuple} has {got} values, expected {expected}")]
    Arity { tuple: usize, got: usize, expected: usize },
    #[error("value `{value}` is not in the domain of `{attr}`")]
    DomainValue { attr: String, value: String },
    #[error("attribute map is not injective: `{0}` and `{1}` share a subspace")]
    NotInjective(String, String),
    #[error("relation for `{0}` is not an equivalence")]
    NotEquivalence(String),
    #[error("base set of {size} points exceeds cap {cap}")]
    CapExceeded { size: u128, cap: usize },
    #[error("subspaces live in different spaces")]
    SpaceMismatch,
    #[error(transparent)]
    Relation(#[from] RelError),
}

pub type Result<T> = std::result::Result<T, DbError>;

/// Attributes, value domains and a nonempty set of total tuples. Values are
/// stored as indices into the attribute's domain; tuples are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Database {
    attrs: Vec<String>,
    domains: Vec<Vec<String>>,
    tuples: Vec<Vec<u32>>,
}

impl Database {
    pub fn new(attrs: Vec<String>, domains: Vec<Vec<String>>, tuples: Vec<Vec<u32>>) -> Result<Self> {
        if attrs.is_empty() || tuples.is_empty() {
            return Err(DbError::Empty);
        }
        for (i, a) in attrs.iter().enumerate() {
            if attrs[..i].contains(a) {
                return Err(DbError::DuplicateAttribute(a.clone()));
            }
        }
        if domains.len() != attrs.len() {
            return Err(DbError::Arity { tuple: 0, got: domains.len(), expected: attrs.len() });
        }
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != attrs.len() {
                return Err(DbError::Arity { tuple: i, got: t.len(), expected: attrs.len() });
            }
            for (k, &v) in t.iter().enumerate() {
                if v as usize >= domains[k].len() {
                    return Err(DbError::DomainValue { attr: attrs[k].clone(), value: v.to_string() });
                }
            }
        }
        let mut tuples = tuples;
        tuples.sort();
        tuples.dedup();
        Ok(Database { attrs, domains, tuples })
    }

    /// Database whose domain for each attribute is `0..k` as strings.
    pub fn from_values(attrs: &[&str], tuples: &[Vec<u32>]) -> Result<Self> {
        let k = tuples.iter().flatten().copied().max().map_or(1, |m| m as usize + 1);
        let dom: Vec<String> = (0..k).map(|i| i.to_string()).collect();
        Database::new(
            attrs.iter().map(|s| s.to_string()).collect(),
            vec![dom; attrs.len()],
            tuples.to_vec(),
        )
    }

    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    pub fn domains(&self) -> &[Vec<String>] {
        &self.domains
    }

    pub fn tuples(&self) -> &[Vec<u32>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Column indices of `xs`, or `None` if some attribute is not in U.
    pub fn columns<S: AsRef<str>>(&self, xs: &[S]) -> Option<Vec<usize>> {
        xs.iter().map(|x| self.attrs.iter().position(|a| a == x.as_ref())).collect()
    }

    fn project(&self, t: &[u32], cols: &[usize]) -> Vec<u32> {
        cols.iter().map(|&c| t[c]).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct DatabaseRepr {
    attrs: Vec<String>,
    domains: Vec<Vec<String>>,
    tuples: Vec<Vec<String>>,
}

impl Serialize for Database {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tuples = self
            .tuples
            .iter()
            .map(|t| t.iter().enumerate().map(|(k, &v)| self.domains[k][v as usize].clone()).collect())
            .collect();
        DatabaseRepr { attrs: self.attrs.clone(), domains: self.domains.clone(), tuples }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Database {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DatabaseRepr::deserialize(d)?;
        let mut tuples = Vec::with_capacity(r.tuples.len());
        for (i, t) in r.tuples.iter().enumerate() {
            if t.len() != r.attrs.len() || r.domains.len() != r.attrs.len() {
                return Err(serde::de::Error::custom(DbError::Arity {
                    tuple: i,
                    got: t.len(),
                    expected: r.attrs.len(),
                }));
            }
            let mut row = Vec::with_capacity(t.len());
            for (k, v) in t.iter().enumerate() {
                let idx = r.domains[k].iter().position(|x| x == v).ok_or_else(|| {
                    serde::de::Error::custom(DbError::DomainValue { attr: r.attrs[k].clone(), value: v.clone() })
                })?;
                row.push(idx as u32);
            }
            tuples.push(row);
        }
        Database::new(r.attrs, r.domains, tuples).map_err(serde::de::Error::custom)
    }
}

/// `s[X] = t[X] ⇒ s[Y] = t[Y]` for all tuples. False when X or Y leaves U.
pub fn check_fd<S: AsRef<str>, T: AsRef<str>>(d: &Database, x: &[S], y: &[T]) -> bool {
    let (Some(cx), Some(cy)) = (d.columns(x), d.columns(y)) else {
        return false;
    };
    let mut seen: HashMap<Vec<u32>, Vec<u32>> = HashMap::new();
    for t in &d.tuples {
        let img = d.project(t, &cy);
        match seen.entry(d.project(t, &cx)) {
            std::collections::hash_map::Entry::Occupied(e) => {
                if *e.get() != img {
                    return false;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(img);
            }
        }
    }
    true
}

/// For tuples agreeing on X∩Y, some tuple takes X-values from the first and
/// Y-values from the second. False when X or Y leaves U.
pub fn check_emvd<S: AsRef<str>, T: AsRef<str>>(d: &Database, x: &[S], y: &[T]) -> bool {
    let (Some(cx), Some(cy)) = (d.columns(x), d.columns(y)) else {
        return false;
    };
    let common: Vec<usize> = cx.iter().copied().filter(|c| cy.contains(c)).collect();
    let present: HashSet<(Vec<u32>, Vec<u32>)> =
        d.tuples.iter().map(|t| (d.project(t, &cx), d.project(t, &cy))).collect();
    let mut groups: HashMap<Vec<u32>, (HashSet<Vec<u32>>, HashSet<Vec<u32>>)> = HashMap::new();
    for t in &d.tuples {
        let g = groups.entry(d.project(t, &common)).or_default();
        g.0.insert(d.project(t, &cx));
        g.1.insert(d.project(t, &cy));
    }
    groups.values().all(|(xs, ys)| {
        xs.iter().all(|a| ys.iter().all(|b| present.contains(&(a.clone(), b.clone()))))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dependency {
    Fd { lhs: Vec<String>, rhs: Vec<String> },
    Emvd { left: Vec<String>, right: Vec<String> },
}

impl Dependency {
    pub fn fd<S: AsRef<str>>(lhs: &[S], rhs: &[S]) -> Self {
        Dependency::Fd { lhs: names(lhs), rhs: names(rhs) }
    }

    pub fn emvd<S: AsRef<str>>(left: &[S], right: &[S]) -> Self {
        Dependency::Emvd { left: names(left), right: names(right) }
    }

    pub fn holds(&self, d: &Database) -> bool {
        match self {
            Dependency::Fd { lhs, rhs } => check_fd(d, lhs, rhs),
            Dependency::Emvd { left, right } => check_emvd(d, left, right),
        }
    }

    pub fn attrs(&self) -> impl Iterator<Item = &String> {
        let (a, b) = match self {
            Dependency::Fd { lhs, rhs } => (lhs, rhs),
            Dependency::Emvd { left, right } => (left, right),
        };
        a.iter().chain(b)
    }
}

fn names<S: AsRef<str>>(xs: &[S]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for x in xs {
        if !out.iter().any(|o| o == x.as_ref()) {
            out.push(x.as_ref().to_string());
        }
    }
    out
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dependency::Fd { lhs, rhs } => write!(f, "fd {} -> {}", lhs.join(" "), rhs.join(" ")),
            Dependency::Emvd { left, right } => write!(f, "emvd [{} | {}]", left.join(" "), right.join(" ")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DependencySet {
    pub deps: Vec<Dependency>,
}

impl DependencySet {
    pub fn new(deps: Vec<Dependency>) -> Self {
        DependencySet { deps }
    }

    /// Attributes mentioned, first occurrence order.
    pub fn attrs(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for d in &self.deps {
            for a in d.attrs() {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        }
        out
    }

    pub fn failing(&self, d: &Database) -> Vec<usize> {
        (0..self.deps.len()).filter(|&i| !self.deps[i].holds(d)).collect()
    }

    pub fn holds(&self, d: &Database) -> bool {
        self.deps.iter().all(|x| x.holds(d))
    }
}

impl fmt::Display for DependencySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.deps.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join(";\n"))
    }
}

impl std::str::FromStr for DependencySet {
    type Err = crate::formulas::ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        crate::formulas::parse_deps(s)
    }
}

fn coset_token(p: FieldPrime, rep: &[u32]) -> String {
    if p.get() < 10 {
        rep.iter().map(|d| char::from_digit(*d, 10).expect("digit")).collect()
    } else {
        rep.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Coset database of an injective subspace family: `Δ[x]` are the cosets of
/// `f(x)` and `R` is the image of `v ↦ (v + f(x))_x`.
pub fn build_dvf(f: &[(String, Subspace)]) -> Result<Database> {
    let Some((_, first)) = f.first() else {
        return Err(DbError::Empty);
    };
    let (p, n) = (first.field(), first.ambient_dim());
    for (i, (a, u)) in f.iter().enumerate() {
        if u.field() != p || u.ambient_dim() != n {
            return Err(DbError::SpaceMismatch);
        }
        if let Some((b, _)) = f[..i].iter().find(|(_, w)| w == u) {
            return Err(DbError::NotInjective(b.clone(), a.clone()));
        }
    }
    let size = (p.get() as u128).pow(n as u32);
    if size > BASE_CAP as u128 {
        return Err(DbError::CapExceeded { size, cap: BASE_CAP });
    }
    let mut domains: Vec<Vec<String>> = vec![Vec::new(); f.len()];
    let mut index: Vec<HashMap<String, u32>> = vec![HashMap::new(); f.len()];
    let mut tuples = Vec::with_capacity(size as usize);
    for i in 0..size as usize {
        let v = vector_at(p, n, i);
        let mut row = Vec::with_capacity(f.len());
        for (k, (_, u)) in f.iter().enumerate() {
            let tok = coset_token(p, &u.reduce(&v));
            let next = domains[k].len() as u32;
            let id = *index[k].entry(tok.clone()).or_insert_with(|| {
                domains[k].push(tok);
                next
            });
            row.push(id);
        }
        tuples.push(row);
    }
    Database::new(f.iter().map(|(a, _)| a.clone()).collect(), domains, tuples)
}

/// Database of an equivalence family on a base set: `R` is the image of
/// `a ↦ (a/η(x))_x`, classes named by first occurrence. Logs a warning when
/// the relations do not intersect to Δ.
pub fn build_dae(eta: &[(String, Relation)]) -> Result<Database> {
    let Some((_, first)) = eta.first() else {
        return Err(DbError::Empty);
    };
    let n = first.size();
    let mut labels = Vec::with_capacity(eta.len());
    let mut meet = Relation::full(n);
    for (a, r) in eta {
        if r.size() != n {
            return Err(RelError::SizeMismatch(n, r.size()).into());
        }
        labels.push(r.classes().ok_or_else(|| DbError::NotEquivalence(a.clone()))?);
        meet = meet.intersect(r)?;
    }
    if meet != Relation::delta(n) {
        log::warn!("equivalences do not intersect to the identity; the database is a quotient");
    }
    let domains = labels
        .iter()
        .map(|l| {
            let k = l.iter().copied().max().map_or(0, |m| m + 1);
            (0..k).map(|i| format!("c{i}")).collect()
        })
        .collect();
    let tuples = (0..n).map(|i| labels.iter().map(|l| l[i] as u32).collect()).collect();
    Database::new(eta.iter().map(|(a, _)| a.clone()).collect(), domains, tuples)
}

/// `η^D_X` on the tuples of `d` (which are pairwise distinct, so the
/// quotient by θ_U is `R` itself), in tuple order.
pub fn eta_d<S: AsRef<str>>(d: &Database, xs: &[S]) -> Result<Relation> {
    let cols = d.columns(xs).ok_or_else(|| {
        let bad = xs.iter().find(|x| d.columns(&[x.as_ref()]).is_none()).expect("some attribute is unknown");
        DbError::UnknownAttribute(bad.as_ref().to_string())
    })?;
    let keys: Vec<Vec<u32>> = d.tuples.iter().map(|t| d.project(t, &cols)).collect();
    Ok(Relation::from_labels(&keys))
}

/// Every single attribute is a key.
pub fn almost_trivial(d: &Database) -> bool {
    // tuples are distinct, so x → U iff the x column has no repeats
    (0..d.attrs.len()).all(|c| {
        let mut seen = std::collections::HashSet::with_capacity(d.tuples.len());
        d.tuples.iter().all(|t| seen.insert(t[c]))
    })
}

pub fn trivial(d: &Database) -> bool {
    d.attrs.len() == 1 || d.tuples.len() == 1
}
