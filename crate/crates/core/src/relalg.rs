//! Binary relations on finite sets, equivalence relations from subspaces,
//! type-1 formulas and permuting frames.

use std::collections::BTreeMap;
use std::fmt;

use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffmat::{vector_at, vector_index, Subspace};
use crate::formulas::FreshNames;
use crate::lattice::{frame_axioms, Frame, FrameAxiom, FrameVars, LatticeTerm};

pub const BASE_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelError {
    #[error("base sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("base set of {n} points exceeds cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("malformed relation: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, RelError>;

/// Binary relation on `{0..n-1}` as a bit matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Relation { n, words, bits: vec![0; n * words] }
    }

    pub fn delta(n: usize) -> Self {
        let mut r = Relation::empty(n);
        for i in 0..n {
            r.insert(i, i);
        }
        r
    }

    pub fn full(n: usize) -> Self {
        let mut r = Relation::empty(n);
        for i in 0..n {
            for j in 0..n {
                r.insert(i, j);
            }
        }
        r
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut r = Relation::empty(n);
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(RelError::Malformed(format!("pair ({a},{b}) outside base of {n}")));
            }
            r.insert(a, b);
        }
        Ok(r)
    }

    /// Equivalence relation with the given class label per point.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let n = labels.len();
        let mut r = Relation::empty(n);
        for i in 0..n {
            for j in 0..n {
                if labels[i] == labels[j] {
                    r.insert(i, j);
                }
            }
        }
        r
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, a: usize, b: usize) {
        self.bits[a * self.words + b / 64] |= 1 << (b % 64);
    }

    fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words..(a + 1) * self.words]
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.contains(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn same_base(&self, other: &Relation) -> Result<()> {
        if self.n != other.n {
            return Err(RelError::SizeMismatch(self.n, other.n));
        }
        Ok(())
    }

    /// `{(a, c) : ∃b. (a, b) ∈ self ∧ (b, c) ∈ other}`.
    pub fn compose(&self, other: &Relation) -> Result<Relation> {
        self.same_base(other)?;
        let mut out = Relation::empty(self.n);
        for a in 0..self.n {
            let dst = a * self.words;
            for (wi, &word) in self.row(a).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let b = wi * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    for (k, &x) in other.row(b).iter().enumerate() {
                        out.bits[dst + k] |= x;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation> {
        self.same_base(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect();
        Ok(Relation { n: self.n, words: self.words, bits })
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.same_base(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        Ok(Relation { n: self.n, words: self.words, bits })
    }

    pub fn inverse(&self) -> Relation {
        let mut out = Relation::empty(self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                if self.contains(a, b) {
                    out.insert(b, a);
                }
            }
        }
        out
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// `Δ ∩ α = Δ`, `α⁻¹ = α` and `α ∘ α = α`.
    pub fn in_eq(&self) -> bool {
        let delta = Relation::delta(self.n);
        self.intersect(&delta).expect("same base") == delta
            && self.inverse() == *self
            && self.compose(self).expect("same base") == *self
    }

    pub fn permutes_with(&self, other: &Relation) -> Result<bool> {
        Ok(self.compose(other)? == other.compose(self)?)
    }

    /// Class index per point (classes numbered by first occurrence) if this is
    /// an equivalence relation.
    pub fn classes(&self) -> Option<Vec<usize>> {
        if !self.in_eq() {
            return None;
        }
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for a in 0..self.n {
            if label[a] != usize::MAX {
                continue;
            }
            for b in a..self.n {
                if self.contains(a, b) {
                    label[b] = next;
                }
            }
            next += 1;
        }
        Some(label)
    }

    pub fn class_count(&self) -> Option<usize> {
        self.classes().map(|c| c.iter().copied().max().map_or(0, |m| m + 1))
    }

    fn to_bytes(&self) -> Vec<u8> {
        let total = self.n * self.n;
        let mut bytes = vec![0u8; total.div_ceil(8)];
        for a in 0..self.n {
            for b in 0..self.n {
                if self.contains(a, b) {
                    let k = a * self.n + b;
                    bytes[k / 8] |= 1 << (k % 8);
                }
            }
        }
        bytes
    }

    fn from_bytes(n: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != (n * n).div_ceil(8) {
            return Err(RelError::Malformed(format!(
                "expected {} bytes for n = {n}, got {}",
                (n * n).div_ceil(8),
                bytes.len()
            )));
        }
        let mut r = Relation::empty(n);
        for k in 0..n * n {
            if bytes[k / 8] >> (k % 8) & 1 == 1 {
                r.insert(k / n, k % n);
            }
        }
        Ok(r)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation(n={}, ", self.n)?;
        if self.n <= 8 {
            write!(f, "{:?})", self.pairs())
        } else {
            write!(f, "{} pairs)", self.count())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    n: usize,
    bits: String,
}

impl Serialize for Relation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let bits = base64::engine::general_purpose::STANDARD.encode(self.to_bytes());
        RelationRepr { n: self.n, bits }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RelationRepr::deserialize(d)?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(r.bits.as_bytes())
            .map_err(serde::de::Error::custom)?;
        Relation::from_bytes(r.n, &bytes).map_err(serde::de::Error::custom)
    }
}

/// The coset equivalence of `u` on the points of its ambient space, indexed
/// in base-p order.
pub fn eta(u: &Subspace) -> Result<Relation> {
    let p = u.field();
    let n = u.ambient_dim();
    let size = (p.get() as usize).checked_pow(n as u32).filter(|&s| s <= BASE_CAP);
    let Some(size) = size else {
        return Err(RelError::CapExceeded { n: usize::MAX, cap: BASE_CAP });
    };
    let reps: Vec<usize> = (0..size).map(|i| vector_index(p, &u.reduce(&vector_at(p, n, i)))).collect();
    Ok(Relation::from_labels(&reps))
}

/// A conjunct of a type-1 formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Type1Conjunct {
    /// `u = v`
    Equal { u: String, v: String },
    /// `u = v ∩ w`
    Meet { u: String, v: String, w: String },
    /// `u = v ∘ w`
    Compose { u: String, v: String, w: String },
    /// `u = Δ`
    Delta { u: String },
}

impl Type1Conjunct {
    pub fn vars(&self) -> Vec<&str> {
        match self {
            Type1Conjunct::Equal { u, v } => vec![u, v],
            Type1Conjunct::Meet { u, v, w } | Type1Conjunct::Compose { u, v, w } => vec![u, v, w],
            Type1Conjunct::Delta { u } => vec![u],
        }
    }

    pub fn holds(&self, asg: &BTreeMap<String, Relation>) -> Result<bool> {
        let get = |x: &str| asg.get(x).ok_or_else(|| RelError::Unbound(x.to_string()));
        Ok(match self {
            Type1Conjunct::Equal { u, v } => {
                let (a, b) = (get(u)?, get(v)?);
                a.same_base(b)?;
                a == b
            }
            Type1Conjunct::Meet { u, v, w } => *get(u)? == get(v)?.intersect(get(w)?)?,
            Type1Conjunct::Compose { u, v, w } => *get(u)? == get(v)?.compose(get(w)?)?,
            Type1Conjunct::Delta { u } => {
                let a = get(u)?;
                *a == Relation::delta(a.size())
            }
        })
    }
}

impl fmt::Display for Type1Conjunct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type1Conjunct::Equal { u, v } => write!(f, "{u} = {v}"),
            Type1Conjunct::Meet { u, v, w } => write!(f, "{u} = {v} ∩ {w}"),
            Type1Conjunct::Compose { u, v, w } => write!(f, "{u} = {v} ∘ {w}"),
            Type1Conjunct::Delta { u } => write!(f, "{u} = Δ"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Type1Formula {
    pub conjuncts: Vec<Type1Conjunct>,
}

impl Type1Formula {
    pub fn new(conjuncts: Vec<Type1Conjunct>) -> Self {
        Type1Formula { conjuncts }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.conjuncts {
            for v in c.vars() {
                if !out.iter().any(|x| x == v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }

    /// Indices of conjuncts that fail.
    pub fn failing(&self, asg: &BTreeMap<String, Relation>) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, c) in self.conjuncts.iter().enumerate() {
            if !c.holds(asg)? {
                out.push(i);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Type1Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.conjuncts.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" ∧ "))
    }
}

pub fn eval_type1(psi: &Type1Formula, asg: &BTreeMap<String, Relation>) -> Result<bool> {
    Ok(psi.failing(asg)?.is_empty())
}

/// Prefix chain `v_1 = y_1, v_j = v_{j-1} ∘ y_j, u = v_k` with fresh `v̄`.
pub fn build_tau(u: &str, ys: &[String], fresh: &mut FreshNames) -> (Type1Formula, Vec<String>) {
    let vs: Vec<String> = ys.iter().map(|_| fresh.next()).collect();
    let mut cs = Vec::with_capacity(ys.len() + 1);
    for (j, y) in ys.iter().enumerate() {
        if j == 0 {
            cs.push(Type1Conjunct::Equal { u: vs[0].clone(), v: y.clone() });
        } else {
            cs.push(Type1Conjunct::Compose { u: vs[j].clone(), v: vs[j - 1].clone(), w: y.clone() });
        }
    }
    if let Some(last) = vs.last() {
        cs.push(Type1Conjunct::Equal { u: u.to_string(), v: last.clone() });
    }
    (Type1Formula::new(cs), vs)
}

/// Values of the τ chain variables for a given assignment of `ys`.
pub fn tau_values(ys: &[Relation]) -> Result<Vec<Relation>> {
    let mut out: Vec<Relation> = Vec::with_capacity(ys.len());
    for (j, y) in ys.iter().enumerate() {
        let v = if j == 0 { y.clone() } else { out[j - 1].compose(y)? };
        out.push(v);
    }
    Ok(out)
}

/// A problem found by [`check_permuting_frame`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum PermutingFrameIssue {
    NotEquivalence { component: String },
    UndefinedJoin { axiom: FrameAxiom, subterm: String },
    Violated { axiom: FrameAxiom },
    BottomNotDelta,
}

impl fmt::Display for PermutingFrameIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermutingFrameIssue::NotEquivalence { component } => {
                write!(f, "{component} is not an equivalence relation")
            }
            PermutingFrameIssue::UndefinedJoin { axiom, subterm } => {
                write!(f, "undefined join {subterm} in {axiom}")
            }
            PermutingFrameIssue::Violated { axiom } => write!(f, "violated: {axiom}"),
            PermutingFrameIssue::BottomNotDelta => write!(f, "α_⊥ ≠ Δ"),
        }
    }
}

enum Partial {
    Value(Relation),
    Undefined(String),
}

fn eval_partial(t: &LatticeTerm, asg: &BTreeMap<String, Relation>, n: usize) -> Result<Partial> {
    Ok(match t {
        LatticeTerm::Var { name } => {
            Partial::Value(asg.get(name).cloned().ok_or_else(|| RelError::Unbound(name.clone()))?)
        }
        LatticeTerm::Const0 => Partial::Value(Relation::delta(n)),
        LatticeTerm::Const1 => Partial::Value(Relation::full(n)),
        LatticeTerm::Join { left, right } | LatticeTerm::Meet { left, right } => {
            let a = match eval_partial(left, asg, n)? {
                Partial::Value(v) => v,
                u => return Ok(u),
            };
            let b = match eval_partial(right, asg, n)? {
                Partial::Value(v) => v,
                u => return Ok(u),
            };
            if matches!(t, LatticeTerm::Meet { .. }) {
                Partial::Value(a.intersect(&b)?)
            } else {
                let ab = a.compose(&b)?;
                if ab == b.compose(&a)? {
                    Partial::Value(ab)
                } else {
                    Partial::Undefined(t.to_string())
                }
            }
        }
    })
}

/// Evaluates the frame axioms with the partial join `α + β = α ∘ β`, defined
/// only when `α ∘ β = β ∘ α`, and requires `α_⊥ = Δ`.
pub fn check_permuting_frame(frame: &Frame<Relation>) -> Result<Vec<PermutingFrameIssue>> {
    let vars = FrameVars::default();
    let n = frame.bot.size();
    let mut issues = Vec::new();
    for (name, r) in vars.names().iter().zip(frame.components()) {
        if r.size() != n {
            return Err(RelError::SizeMismatch(n, r.size()));
        }
        if !r.in_eq() {
            issues.push(PermutingFrameIssue::NotEquivalence { component: name.clone() });
        }
    }
    let asg = frame.to_assignment(&vars);
    for (axiom, eq) in frame_axioms(&vars) {
        let lhs = eval_partial(&eq.lhs, &asg, n)?;
        let rhs = eval_partial(&eq.rhs, &asg, n)?;
        match (lhs, rhs) {
            (Partial::Undefined(s), _) | (_, Partial::Undefined(s)) => {
                issues.push(PermutingFrameIssue::UndefinedJoin { axiom, subterm: s })
            }
            (Partial::Value(a), Partial::Value(b)) => {
                if a != b {
                    issues.push(PermutingFrameIssue::Violated { axiom });
                }
            }
        }
    }
    if frame.bot != Relation::delta(n) {
        issues.push(PermutingFrameIssue::BottomNotDelta);
    }
    Ok(issues)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffmat::FieldPrime;

    #[test]
    fn operation_examples() {
        let a = Relation::from_pairs(3, &[(0, 1)]).unwrap();
        let b = Relation::from_pairs(3, &[(1, 2)]).unwrap();
        assert_eq!(a.compose(&b).unwrap(), Relation::from_pairs(3, &[(0, 2)]).unwrap());
        assert_eq!(Relation::delta(3).compose(&a).unwrap(), a);
        assert_eq!(a.inverse().inverse(), a);
        assert!(a.compose(&Relation::delta(4)).is_err());
    }

    #[test]
    fn eq_membership() {
        assert!(Relation::delta(3).in_eq());
        assert!(Relation::full(3).in_eq());
        let sym = Relation::delta(3).union(&Relation::from_pairs(3, &[(0, 1), (1, 0)]).unwrap()).unwrap();
        assert!(sym.in_eq());
        let ord = Relation::delta(3).union(&Relation::from_pairs(3, &[(0, 1)]).unwrap()).unwrap();
        assert!(!ord.in_eq());
    }

    #[test]
    fn eta_examples() {
        let p = FieldPrime::new(2).unwrap();
        assert_eq!(eta(&Subspace::zero(p, 2)).unwrap(), Relation::delta(4));
        assert_eq!(eta(&Subspace::full(p, 2)).unwrap(), Relation::full(4));
        let u = Subspace::span(p, 2, &[[1, 0]]).unwrap();
        let r = eta(&u).unwrap();
        // points 00, 01, 10, 11 → indices 0, 1, 2, 3
        assert_eq!(r.classes().unwrap(), vec![0, 1, 0, 1]);
        assert!(eta(&Subspace::zero(p, 13)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let r = Relation::from_pairs(3, &[(0, 1), (2, 2)]).unwrap();
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["n"], 3);
        // bits 1 and 8, LSB first: bytes [0b10, 0b1]
        assert_eq!(j["bits"], "AgE=");
        let back: Relation = serde_json::from_value(j).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn tau_examples() {
        let mut fresh = FreshNames::new(["u", "y1"]);
        let (f, vs) = build_tau("u", &["y1".to_string()], &mut fresh);
        assert_eq!(f.conjuncts.len(), 2);
        assert_eq!(f.conjuncts[0], Type1Conjunct::Equal { u: vs[0].clone(), v: "y1".into() });
        let ys: Vec<String> = vec!["y1".into(), "y2".into(), "y3".into()];
        let (f, vs) = build_tau("u", &ys, &mut fresh);
        let mut asg: BTreeMap<String, Relation> =
            ys.iter().map(|y| (y.clone(), Relation::delta(4))).collect();
        for (v, val) in vs.iter().zip(tau_values(&vec![Relation::delta(4); 3]).unwrap()) {
            asg.insert(v.clone(), val);
        }
        asg.insert("u".into(), Relation::delta(4));
        assert!(eval_type1(&f, &asg).unwrap());
        asg.insert("u".into(), Relation::full(4));
        assert!(!eval_type1(&f, &asg).unwrap());
    }

    #[test]
    fn type1_examples() {
        let asg: BTreeMap<String, Relation> =
            ["u", "v", "w"].iter().map(|s| (s.to_string(), Relation::full(3))).collect();
        let c = Type1Conjunct::Compose { u: "u".into(), v: "v".into(), w: "w".into() };
        assert!(c.holds(&asg).unwrap());
        assert!(!Type1Conjunct::Delta { u: "u".into() }.holds(&asg).unwrap());
        assert!(Type1Conjunct::Delta { u: "z".into() }.holds(&asg).is_err());
    }
}
