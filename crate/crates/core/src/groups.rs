//! Group presentations, word evaluation, model search in symmetric groups and
//! fixed-point-free representations of finite groups.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffmat::{FfError, FieldPrime, Matrix, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("unbound generator `{0}`")]
    Unbound(String),
    #[error("relation uses undeclared generator `{0}`")]
    Undeclared(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("symmetric degree {n} exceeds cap {cap}")]
    DegreeCap { n: usize, cap: usize },
    #[error("{0} divides the group order {1}")]
    CharacteristicDivides(u32, usize),
    #[error("the trivial group has no fixed point free faithful representation")]
    TrivialGroup,
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("representation matrices must be square and of equal size")]
    SizeMismatch,
    #[error(transparent)]
    Field(#[from] FfError),
}

pub type Result<T> = std::result::Result<T, GroupError>;

/// A word `g_1^{e_1} ... g_k^{e_k}` in free normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupWord {
    factors: Vec<(String, i64)>,
}

impl GroupWord {
    /// Normalizes: merges adjacent equal generators, drops zero exponents.
    pub fn new(factors: impl IntoIterator<Item = (String, i64)>) -> Self {
        let mut out: Vec<(String, i64)> = Vec::new();
        for (g, e) in factors {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some((last, le)) if *last == g => {
                    *le += e;
                    if *le == 0 {
                        out.pop();
                    }
                }
                _ => out.push((g, e)),
            }
        }
        GroupWord { factors: out }
    }

    pub fn empty() -> Self {
        GroupWord::default()
    }

    pub fn generator(g: &str) -> Self {
        GroupWord::new([(g.to_string(), 1)])
    }

    pub fn factors(&self) -> &[(String, i64)] {
        &self.factors
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Concatenation followed by normalization.
    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        GroupWord::new(self.factors.iter().chain(&other.factors).cloned())
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord::new(self.factors.iter().rev().map(|(g, e)| (g.clone(), -e)))
    }

    pub fn generators(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        for (g, _) in &self.factors {
            if !v.contains(g) {
                v.push(g.clone());
            }
        }
        v
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (g, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupRelation {
    pub lhs: GroupWord,
    pub rhs: GroupWord,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relations: Vec<GroupRelation>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<String>, relations: Vec<(GroupWord, GroupWord)>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if generators[..i].contains(g) {
                return Err(GroupError::DuplicateGenerator(g.clone()));
            }
        }
        let relations: Vec<GroupRelation> =
            relations.into_iter().map(|(lhs, rhs)| GroupRelation { lhs, rhs }).collect();
        let pres = GroupPresentation { generators, relations };
        pres.validate()?;
        Ok(pres)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.relations {
            for g in r.lhs.generators().into_iter().chain(r.rhs.generators()) {
                if !self.generators.contains(&g) {
                    return Err(GroupError::Undeclared(g));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gens {}", self.generators.join(", "))?;
        for r in &self.relations {
            write!(f, "; rel {} = {}", r.lhs, r.rhs)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for GroupPresentation {
    type Err = crate::formulas::ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        crate::formulas::parse_group_presentation(s)
    }
}

/// Multiplication, inversion and unit of a group.
pub trait GroupOps {
    type Elem: Clone + PartialEq + fmt::Debug;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn unit(&self) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, e: i64) -> Self::Elem {
        let mut base = if e < 0 { self.inv(a) } else { a.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.unit();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }
}

/// Left-to-right product of the word's factors.
pub fn eval_word<G: GroupOps + ?Sized>(
    w: &GroupWord,
    asg: &BTreeMap<String, G::Elem>,
    g: &G,
) -> Result<G::Elem> {
    let mut acc = g.unit();
    for (name, e) in w.factors() {
        let x = asg.get(name).ok_or_else(|| GroupError::Unbound(name.clone()))?;
        acc = g.mul(&acc, &g.pow(x, *e));
    }
    Ok(acc)
}

pub fn relations_hold<G: GroupOps + ?Sized>(
    pres: &GroupPresentation,
    asg: &BTreeMap<String, G::Elem>,
    g: &G,
) -> Result<bool> {
    for r in &pres.relations {
        if eval_word(&r.lhs, asg, g)? != eval_word(&r.rhs, asg, g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Permutation of `{0..n-1}` as an image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(GroupError::NotAGroup(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    /// Builds a permutation of degree `n` from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut img: Vec<usize> = (0..n).collect();
        for c in cycles {
            for (k, &a) in c.iter().enumerate() {
                let b = c[(k + 1) % c.len()];
                if a >= n || b >= n {
                    return Err(GroupError::NotAGroup(format!("point out of range in {c:?}")));
                }
                img[a] = b;
            }
        }
        Perm::from_images(img)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Perm(inv)
    }

    /// All permutations of degree `n` in lexicographic order of image arrays.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Perm(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut any = false;
        for s in 0..n {
            if seen[s] || self.0[s] == s {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut i = s;
            let mut first = true;
            while !seen[i] {
                seen[i] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{i}")?;
                first = false;
                i = self.0[i];
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymmetricGroup {
    pub n: usize,
}

impl GroupOps for SymmetricGroup {
    type Elem = Perm;
    fn mul(&self, a: &Perm, b: &Perm) -> Perm {
        a.compose(b)
    }
    fn inv(&self, a: &Perm) -> Perm {
        a.inverse()
    }
    fn unit(&self) -> Perm {
        Perm::identity(self.n)
    }
}

/// General linear group GL(d, p) acting on column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixGroup {
    pub p: FieldPrime,
    pub d: usize,
}

impl GroupOps for MatrixGroup {
    type Elem = Matrix;
    fn mul(&self, a: &Matrix, b: &Matrix) -> Matrix {
        a.mul(b).expect("matrices of the group's size")
    }
    fn inv(&self, a: &Matrix) -> Matrix {
        a.inverse().expect("group elements are invertible")
    }
    fn unit(&self) -> Matrix {
        Matrix::identity(self.p, self.d)
    }
}

/// Satisfying assignment found in some symmetric group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnWitness {
    pub n: usize,
    pub assignment: BTreeMap<String, Perm>,
    pub nodes: u64,
}

pub const SN_DEGREE_CAP: usize = 8;

/// First nontrivial satisfying assignment in S_1, S_2, ..., S_{n_max}.
///
/// Generators are assigned in declaration order, each ranging over S_n in
/// lexicographic order; a relation is checked as soon as all its generators
/// are bound.
pub fn search_sn(pres: &GroupPresentation, n_max: usize) -> Result<Option<SnWitness>> {
    if n_max > SN_DEGREE_CAP {
        return Err(GroupError::DegreeCap { n: n_max, cap: SN_DEGREE_CAP });
    }
    pres.validate()?;
    let k = pres.generators.len();
    // relations become checkable once the last of their generators is bound
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    for (ri, r) in pres.relations.iter().enumerate() {
        let last = r
            .lhs
            .generators()
            .into_iter()
            .chain(r.rhs.generators())
            .map(|g| pres.generators.iter().position(|x| *x == g).unwrap() + 1)
            .max()
            .unwrap_or(0);
        ready[last].push(ri);
    }
    let mut nodes = 0u64;
    for n in 1..=n_max {
        let g = SymmetricGroup { n };
        let perms = Perm::all(n);
        let mut asg = BTreeMap::new();
        // relations over no generators at all
        if !ready[0].iter().all(|&ri| relation_ok(pres, ri, &asg, &g)) {
            return Ok(None);
        }
        if let Some(found) = sn_rec(pres, &ready, &perms, &g, 0, &mut asg, &mut nodes) {
            return Ok(Some(SnWitness { n, assignment: found, nodes }));
        }
    }
    Ok(None)
}

fn relation_ok(
    pres: &GroupPresentation,
    ri: usize,
    asg: &BTreeMap<String, Perm>,
    g: &SymmetricGroup,
) -> bool {
    let r = &pres.relations[ri];
    eval_word(&r.lhs, asg, g).expect("bound") == eval_word(&r.rhs, asg, g).expect("bound")
}

fn sn_rec(
    pres: &GroupPresentation,
    ready: &[Vec<usize>],
    perms: &[Perm],
    g: &SymmetricGroup,
    depth: usize,
    asg: &mut BTreeMap<String, Perm>,
    nodes: &mut u64,
) -> Option<BTreeMap<String, Perm>> {
    if depth == pres.generators.len() {
        return if asg.values().any(|p| !p.is_identity()) { Some(asg.clone()) } else { None };
    }
    let name = &pres.generators[depth];
    for p in perms {
        *nodes += 1;
        asg.insert(name.clone(), p.clone());
        if ready[depth + 1].iter().all(|&ri| relation_ok(pres, ri, asg, g)) {
            if let Some(found) = sn_rec(pres, ready, perms, g, depth + 1, asg, nodes) {
                return Some(found);
            }
        }
    }
    asg.remove(name);
    None
}

/// Finite group given by its multiplication table; element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub name: String,
    order: usize,
    table: Vec<usize>,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validates the group axioms; row `a`, column `b` holds `a·b`.
    pub fn from_table(name: &str, order: usize, table: Vec<usize>) -> Result<Self> {
        if order == 0 || table.len() != order * order {
            return Err(GroupError::NotAGroup("table has the wrong size".into()));
        }
        if table.iter().any(|&x| x >= order) {
            return Err(GroupError::NotAGroup("entry out of range".into()));
        }
        let m = |a: usize, b: usize| table[a * order + b];
        if (0..order).any(|a| m(0, a) != a || m(a, 0) != a) {
            return Err(GroupError::NotAGroup("element 0 is not the identity".into()));
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if m(m(a, b), c) != m(a, m(b, c)) {
                        return Err(GroupError::NotAGroup("not associative".into()));
                    }
                }
            }
        }
        let mut inverses = Vec::with_capacity(order);
        for a in 0..order {
            match (0..order).find(|&b| m(a, b) == 0 && m(b, a) == 0) {
                Some(b) => inverses.push(b),
                None => return Err(GroupError::NotAGroup(format!("element {a} has no inverse"))),
            }
        }
        Ok(FiniteGroup { name: name.to_string(), order, table, inverses })
    }

    /// The subgroup generated by `gens` inside any group, listed in
    /// breadth-first order from the identity (right multiplication by
    /// generators). Returns the table group and its elements.
    pub fn generated_by<G: GroupOps>(name: &str, g: &G, gens: &[G::Elem]) -> (Self, Vec<G::Elem>) {
        let mut elems = vec![g.unit()];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for s in gens {
                let x = g.mul(&elems[i], s);
                if !elems.contains(&x) {
                    elems.push(x);
                    queue.push_back(elems.len() - 1);
                }
            }
        }
        let n = elems.len();
        let mut table = vec![0usize; n * n];
        for a in 0..n {
            for b in 0..n {
                let x = g.mul(&elems[a], &elems[b]);
                table[a * n + b] = elems.iter().position(|y| *y == x).expect("closed");
            }
        }
        let fg = FiniteGroup::from_table(name, n, table).expect("closure of a group is a group");
        (fg, elems)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// Order of each element.
    pub fn element_orders(&self) -> Vec<usize> {
        (0..self.order)
            .map(|a| {
                let mut x = a;
                let mut k = 1;
                while x != 0 {
                    x = self.mul(&x, &a);
                    k += 1;
                }
                k
            })
            .collect()
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(&a, &b) == self.mul(&b, &a)))
    }
}

impl GroupOps for FiniteGroup {
    type Elem = usize;
    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.table[a * self.order + b]
    }
    fn inv(&self, a: &usize) -> usize {
        self.inverses[*a]
    }
    fn unit(&self) -> usize {
        0
    }
}

/// All groups of order 2 through 8, up to isomorphism.
pub fn small_groups() -> Vec<FiniteGroup> {
    let perm = |n: usize, cycles: &[&[usize]]| Perm::from_cycles(n, cycles).expect("valid cycles");
    let gen = |name: &str, gens: Vec<Perm>| {
        let n = gens[0].degree();
        FiniteGroup::generated_by(name, &SymmetricGroup { n }, &gens).0
    };
    let rot = |k: usize| Perm::from_images((0..k).map(|i| (i + 1) % k).collect()).expect("rotation");
    vec![
        gen("Z2", vec![rot(2)]),
        gen("Z3", vec![rot(3)]),
        gen("Z4", vec![rot(4)]),
        gen("Z2xZ2", vec![perm(4, &[&[0, 1]]), perm(4, &[&[2, 3]])]),
        gen("Z5", vec![rot(5)]),
        gen("Z6", vec![rot(6)]),
        gen("S3", vec![perm(3, &[&[0, 1]]), perm(3, &[&[0, 1, 2]])]),
        gen("Z7", vec![rot(7)]),
        gen("Z8", vec![rot(8)]),
        gen("Z4xZ2", vec![perm(6, &[&[0, 1, 2, 3]]), perm(6, &[&[4, 5]])]),
        gen("Z2xZ2xZ2", vec![perm(6, &[&[0, 1]]), perm(6, &[&[2, 3]]), perm(6, &[&[4, 5]])]),
        gen("D4", vec![perm(4, &[&[0, 1, 2, 3]]), perm(4, &[&[0, 2]])]),
        gen(
            "Q8",
            vec![perm(8, &[&[0, 1, 2, 3], &[4, 5, 6, 7]]), perm(8, &[&[0, 4, 2, 6], &[1, 7, 3, 5]])],
        ),
    ]
}

/// Faithful fixed point free representation of `g` over GF(p).
///
/// For |G| = 2 this is `g ↦ [-1]`. Otherwise it is the action of G on the
/// quotient of the group algebra by the span of `Σ g`, in the basis
/// `{h + U : h ≠ e}`. Returns the images of all elements in table order.
pub fn rep_lemma_gp(g: &FiniteGroup, p: FieldPrime) -> Result<Vec<Matrix>> {
    let n = g.order();
    if n < 2 {
        return Err(GroupError::TrivialGroup);
    }
    if n % p.get() as usize == 0 {
        return Err(GroupError::CharacteristicDivides(p.get(), n));
    }
    if n == 2 {
        return Ok(vec![Matrix::identity(p, 1), Matrix::scalar(p, 1, -1)]);
    }
    let dim = n - 1;
    let minus_one = p.neg(1);
    let mut out = Vec::with_capacity(n);
    for h in 0..n {
        let mut m = Matrix::zeros(p, dim, dim);
        for b in 1..n {
            let col = b - 1;
            let hb = g.mul(&h, &b);
            if hb == 0 {
                for r in 0..dim {
                    m.set(r, col, minus_one);
                }
            } else {
                m.set(hb - 1, col, 1);
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Whether only the zero vector is fixed by every matrix.
pub fn check_fpf(rep: &[Matrix]) -> Result<bool> {
    let Some(first) = rep.first() else {
        return Ok(false);
    };
    let d = first.rows();
    if rep.iter().any(|m| !m.is_square() || m.rows() != d || m.field() != first.field()) {
        return Err(GroupError::SizeMismatch);
    }
    if d == 0 {
        return Ok(true);
    }
    let id = Matrix::identity(first.field(), d);
    let mut stacked = Matrix::zeros(first.field(), 0, d);
    for m in rep {
        stacked = stacked.vstack(&m.sub(&id)?)?;
    }
    Ok(stacked.kernel().is_zero())
}

/// Common fixed vectors of a list of matrices.
pub fn fixed_space(rep: &[Matrix]) -> Result<Subspace> {
    let first = rep.first().ok_or(GroupError::SizeMismatch)?;
    let d = first.rows();
    let id = Matrix::identity(first.field(), d);
    let mut stacked = Matrix::zeros(first.field(), 0, d);
    for m in rep {
        if !m.is_square() || m.rows() != d {
            return Err(GroupError::SizeMismatch);
        }
        stacked = stacked.vstack(&m.sub(&id)?)?;
    }
    Ok(stacked.kernel())
}

/// Whether distinct elements have distinct images.
pub fn is_faithful(rep: &[Matrix]) -> bool {
    let mut seen = HashMap::new();
    rep.iter().enumerate().all(|(i, m)| seen.insert(m.clone(), i).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &[(&str, i64)]) -> GroupWord {
        GroupWord::new(s.iter().map(|(g, e)| (g.to_string(), *e)))
    }

    #[test]
    fn words_normalize() {
        assert_eq!(word(&[("x", 1), ("x", -1)]), GroupWord::empty());
        assert_eq!(word(&[("x", 2), ("y", 0), ("x", 1)]), word(&[("x", 3)]));
        assert_eq!(word(&[("x", 1), ("y", -1)]).to_string(), "x*y^-1");
        assert_eq!(GroupWord::empty().to_string(), "1");
    }

    #[test]
    fn eval_word_examples() {
        let s3 = SymmetricGroup { n: 3 };
        let c = Perm::from_cycles(3, &[&[0, 1, 2]]).unwrap();
        let mut asg = BTreeMap::new();
        assert!(eval_word(&GroupWord::empty(), &asg, &s3).unwrap().is_identity());
        asg.insert("x".to_string(), c.clone());
        assert!(eval_word(&word(&[("x", 3)]), &asg, &s3).unwrap().is_identity());
        asg.insert("x".to_string(), Perm::from_cycles(3, &[&[0, 1]]).unwrap());
        asg.insert("y".to_string(), Perm::from_cycles(3, &[&[1, 2]]).unwrap());
        assert_eq!(eval_word(&word(&[("x", 1), ("y", 1)]), &asg, &s3).unwrap(), c);
        assert!(matches!(
            eval_word(&word(&[("z", 1)]), &asg, &s3),
            Err(GroupError::Unbound(_))
        ));
    }

    #[test]
    fn search_examples() {
        let x = || GroupWord::generator("x");
        let p = GroupPresentation::new(vec!["x".into()], vec![(x().concat(&x()), GroupWord::empty())])
            .unwrap();
        let w = search_sn(&p, 4).unwrap().unwrap();
        assert_eq!(w.n, 2);
        assert_eq!(w.assignment["x"].to_string(), "(0 1)");

        let p = GroupPresentation::new(vec!["x".into()], vec![(x(), x().concat(&x()))]).unwrap();
        assert!(search_sn(&p, 4).unwrap().is_none());

        let p = GroupPresentation::new(vec!["x".into()], vec![(word(&[("x", 3)]), GroupWord::empty())])
            .unwrap();
        let w = search_sn(&p, 4).unwrap().unwrap();
        assert_eq!(w.n, 3);
        assert_eq!(w.assignment["x"].to_string(), "(0 1 2)");
        assert!(search_sn(&p, 9).is_err());
    }

    #[test]
    fn catalog_profiles() {
        let groups = small_groups();
        assert_eq!(groups.len(), 13);
        let orders: Vec<usize> = groups.iter().map(|g| g.order()).collect();
        assert_eq!(orders, vec![2, 3, 4, 4, 5, 6, 6, 7, 8, 8, 8, 8, 8]);
        let profile = |g: &FiniteGroup| {
            let mut o = g.element_orders();
            o.sort();
            (o, g.is_abelian())
        };
        let profiles: Vec<_> = groups.iter().map(profile).collect();
        for i in 0..profiles.len() {
            for j in 0..i {
                if orders[i] == orders[j] {
                    assert_ne!(profiles[i], profiles[j], "{} vs {}", groups[i].name, groups[j].name);
                }
            }
        }
        let q8 = groups.iter().find(|g| g.name == "Q8").unwrap();
        assert_eq!(q8.element_orders().iter().filter(|&&o| o == 2).count(), 1);
    }

    #[test]
    fn lemma_gp_examples() {
        let groups = small_groups();
        let z2 = &groups[0];
        let z3 = &groups[1];
        let p3 = FieldPrime::new(3).unwrap();
        let p2 = FieldPrime::new(2).unwrap();
        let rep = rep_lemma_gp(z2, p3).unwrap();
        assert_eq!(rep[1], Matrix::from_rows(p3, &[[2]]).unwrap());
        assert!(check_fpf(&rep).unwrap());
        let rep = rep_lemma_gp(z3, p2).unwrap();
        assert_eq!(rep[1], Matrix::from_rows(p2, &[[0, 1], [1, 1]]).unwrap());
        assert!(check_fpf(&rep[1..2]).unwrap());
        assert!(!check_fpf(&[Matrix::identity(p2, 2)]).unwrap());
        assert!(matches!(rep_lemma_gp(z2, p2), Err(GroupError::CharacteristicDivides(2, 2))));
        let s3 = &groups[6];
        let rep = rep_lemma_gp(s3, FieldPrime::new(5).unwrap()).unwrap();
        assert_eq!(rep[1].rows(), 5);
        assert!(check_fpf(&rep).unwrap() && is_faithful(&rep));
    }
}
