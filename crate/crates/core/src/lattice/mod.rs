//! Lattice terms, finite lattice carriers, 4-frames and their coordinate
//! structures.

mod frame;
mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, BitAnd};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffmat::{FfError, FieldPrime, Subspace};

pub use frame::{
    admissible_frame_axioms, build_frame, check_frame, enumerate_frames, fpf_criterion,
    frame_axioms, g_elements, g_membership_equations, gamma, gamma_inv, is_g_member, mult_t,
    r12_add, r12_elements, r12_membership_equation, r12_mult, r12_sub, t_term, term_add,
    term_mult, term_sub, Frame, FrameAxiom, FrameVars, FrameViolation, Orientation,
    ORIENTATION, PAIRS,
};
pub(crate) use frame::frame_holds_table;
pub use table::{IndexedSubspaces, TableLattice};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Field(#[from] FfError),
    #[error("lattice has {count} elements, cap is {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("not a lattice: {0}")]
    NotALattice(String),
    #[error("{what} is not a member of {set}")]
    Membership { what: String, set: &'static str },
    #[error("matrix of size {got} does not act on a 1-block of dimension {expected}")]
    BlockSize { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, LatticeError>;

/// Lattice term over named variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum LatticeTerm {
    Var { name: String },
    #[serde(rename = "c0")]
    Const0,
    #[serde(rename = "c1")]
    Const1,
    Join { left: Box<LatticeTerm>, right: Box<LatticeTerm> },
    Meet { left: Box<LatticeTerm>, right: Box<LatticeTerm> },
}

impl LatticeTerm {
    pub fn var(name: impl Into<String>) -> Self {
        LatticeTerm::Var { name: name.into() }
    }

    pub fn join(a: LatticeTerm, b: LatticeTerm) -> Self {
        LatticeTerm::Join { left: Box::new(a), right: Box::new(b) }
    }

    pub fn meet(a: LatticeTerm, b: LatticeTerm) -> Self {
        LatticeTerm::Meet { left: Box::new(a), right: Box::new(b) }
    }

    /// Left-associated join of the given terms; `empty` if there are none.
    pub fn join_all(terms: impl IntoIterator<Item = LatticeTerm>, empty: LatticeTerm) -> Self {
        terms.into_iter().reduce(LatticeTerm::join).unwrap_or(empty)
    }

    /// Left-associated meet of the given terms; `empty` if there are none.
    pub fn meet_all(terms: impl IntoIterator<Item = LatticeTerm>, empty: LatticeTerm) -> Self {
        terms.into_iter().reduce(LatticeTerm::meet).unwrap_or(empty)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, LatticeTerm::Var { .. })
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            LatticeTerm::Var { name } => Some(name),
            _ => None,
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            LatticeTerm::Var { name } => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            LatticeTerm::Const0 | LatticeTerm::Const1 => {}
            LatticeTerm::Join { left, right } | LatticeTerm::Meet { left, right } => {
                left.collect_vars(out);
                right.collect_vars(out);
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            LatticeTerm::Join { left, right } | LatticeTerm::Meet { left, right } => {
                1 + left.size() + right.size()
            }
            _ => 1,
        }
    }

    /// Replaces variables by terms.
    pub fn substitute(&self, map: &BTreeMap<String, LatticeTerm>) -> LatticeTerm {
        match self {
            LatticeTerm::Var { name } => map.get(name).cloned().unwrap_or_else(|| self.clone()),
            LatticeTerm::Const0 | LatticeTerm::Const1 => self.clone(),
            LatticeTerm::Join { left, right } => {
                LatticeTerm::join(left.substitute(map), right.substitute(map))
            }
            LatticeTerm::Meet { left, right } => {
                LatticeTerm::meet(left.substitute(map), right.substitute(map))
            }
        }
    }

    /// Renames variables.
    pub fn rename(&self, f: &impl Fn(&str) -> String) -> LatticeTerm {
        match self {
            LatticeTerm::Var { name } => LatticeTerm::var(f(name)),
            LatticeTerm::Const0 | LatticeTerm::Const1 => self.clone(),
            LatticeTerm::Join { left, right } => LatticeTerm::join(left.rename(f), right.rename(f)),
            LatticeTerm::Meet { left, right } => LatticeTerm::meet(left.rename(f), right.rename(f)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        // ctx: 0 = top, 1 = right of join, 2 = left of meet, 3 = right of meet
        match self {
            LatticeTerm::Var { name } => write!(f, "{name}"),
            LatticeTerm::Const0 => write!(f, "0"),
            LatticeTerm::Const1 => write!(f, "1"),
            LatticeTerm::Join { left, right } => {
                let paren = ctx != 0;
                if paren {
                    write!(f, "(")?;
                }
                left.fmt_prec(f, 0)?;
                write!(f, " + ")?;
                right.fmt_prec(f, 1)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
            LatticeTerm::Meet { left, right } => {
                let paren = ctx == 3;
                if paren {
                    write!(f, "(")?;
                }
                left.fmt_prec(f, 2)?;
                write!(f, " & ")?;
                right.fmt_prec(f, 3)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for LatticeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Add for LatticeTerm {
    type Output = LatticeTerm;
    fn add(self, rhs: LatticeTerm) -> LatticeTerm {
        LatticeTerm::join(self, rhs)
    }
}

impl BitAnd for LatticeTerm {
    type Output = LatticeTerm;
    fn bitand(self, rhs: LatticeTerm) -> LatticeTerm {
        LatticeTerm::meet(self, rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeEquation {
    pub lhs: LatticeTerm,
    pub rhs: LatticeTerm,
}

impl LatticeEquation {
    pub fn new(lhs: LatticeTerm, rhs: LatticeTerm) -> Self {
        LatticeEquation { lhs, rhs }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut v = self.lhs.vars();
        for x in self.rhs.vars() {
            if !v.contains(&x) {
                v.push(x);
            }
        }
        v
    }
}

impl fmt::Display for LatticeEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Conjunction of lattice equations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeConjunction {
    pub equations: Vec<LatticeEquation>,
}

impl LatticeConjunction {
    pub fn new(equations: Vec<LatticeEquation>) -> Self {
        LatticeConjunction { equations }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        for eq in &self.equations {
            for x in eq.vars() {
                if !v.contains(&x) {
                    v.push(x);
                }
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn push(&mut self, lhs: LatticeTerm, rhs: LatticeTerm) {
        self.equations.push(LatticeEquation::new(lhs, rhs));
    }
}

impl fmt::Display for LatticeConjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, eq) in self.equations.iter().enumerate() {
            if i > 0 {
                write!(f, ";\n")?;
            }
            write!(f, "{eq}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for LatticeConjunction {
    type Err = crate::formulas::ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        crate::formulas::parse_lattice_conjunction(s)
    }
}

impl std::str::FromStr for LatticeTerm {
    type Err = crate::formulas::ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        crate::formulas::parse_lattice_term(s)
    }
}

/// Variable assignment into one carrier.
pub type Assignment<E> = BTreeMap<String, E>;

/// A finite bounded lattice.
pub trait LatticeCarrier {
    type Elem: Clone + Eq + Hash + fmt::Debug;

    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn bottom(&self) -> Self::Elem;
    fn top(&self) -> Self::Elem;

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        &self.meet(a, b) == a
    }

    /// Number of elements, saturating.
    fn cardinality(&self) -> u128;

    /// All elements in a fixed order; fails when there are more than `cap`.
    fn elements(&self, cap: u128) -> Result<Vec<Self::Elem>>;
}

/// The lattice Lt(GF(p)^n) of all subspaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubspaceLattice {
    pub p: FieldPrime,
    pub n: usize,
}

impl SubspaceLattice {
    pub fn new(p: FieldPrime, n: usize) -> Self {
        SubspaceLattice { p, n }
    }

    pub fn contains(&self, u: &Subspace) -> bool {
        u.field() == self.p && u.ambient_dim() == self.n
    }
}

impl LatticeCarrier for SubspaceLattice {
    type Elem = Subspace;

    fn join(&self, a: &Subspace, b: &Subspace) -> Subspace {
        a.sum(b).expect("operands belong to this subspace lattice")
    }

    fn meet(&self, a: &Subspace, b: &Subspace) -> Subspace {
        a.meet(b).expect("operands belong to this subspace lattice")
    }

    fn bottom(&self) -> Subspace {
        Subspace::zero(self.p, self.n)
    }

    fn top(&self) -> Subspace {
        Subspace::full(self.p, self.n)
    }

    fn leq(&self, a: &Subspace, b: &Subspace) -> bool {
        a.is_subspace_of(b)
    }

    fn cardinality(&self) -> u128 {
        Subspace::count_all(self.p, self.n)
    }

    fn elements(&self, cap: u128) -> Result<Vec<Subspace>> {
        Ok(Subspace::enumerate_all(self.p, self.n, cap)?)
    }
}

pub fn eval_term<L: LatticeCarrier + ?Sized>(
    t: &LatticeTerm,
    asg: &Assignment<L::Elem>,
    l: &L,
) -> Result<L::Elem> {
    match t {
        LatticeTerm::Var { name } => {
            asg.get(name).cloned().ok_or_else(|| LatticeError::Unbound(name.clone()))
        }
        LatticeTerm::Const0 => Ok(l.bottom()),
        LatticeTerm::Const1 => Ok(l.top()),
        LatticeTerm::Join { left, right } => {
            Ok(l.join(&eval_term(left, asg, l)?, &eval_term(right, asg, l)?))
        }
        LatticeTerm::Meet { left, right } => {
            Ok(l.meet(&eval_term(left, asg, l)?, &eval_term(right, asg, l)?))
        }
    }
}

pub fn eval_equation<L: LatticeCarrier + ?Sized>(
    eq: &LatticeEquation,
    asg: &Assignment<L::Elem>,
    l: &L,
) -> Result<bool> {
    Ok(eval_term(&eq.lhs, asg, l)? == eval_term(&eq.rhs, asg, l)?)
}

/// Indices of the equations that fail under `asg`.
pub fn failing_equations<L: LatticeCarrier + ?Sized>(
    conj: &LatticeConjunction,
    asg: &Assignment<L::Elem>,
    l: &L,
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, eq) in conj.equations.iter().enumerate() {
        if !eval_equation(eq, asg, l)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// Result of evaluating under the admissibility discipline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Admissible<E> {
    Value(E),
    /// The first offending subterm in evaluation order and its preorder
    /// position within the evaluated term.
    Inadmissible { subterm: LatticeTerm, position: usize },
}

impl<E> Admissible<E> {
    pub fn value(self) -> Option<E> {
        match self {
            Admissible::Value(v) => Some(v),
            Admissible::Inadmissible { .. } => None,
        }
    }
}

/// Evaluates `t`, requiring every join to have arguments meeting in 0 and
/// every meet to have arguments joining to 1.
pub fn admissible_eval<L: LatticeCarrier + ?Sized>(
    t: &LatticeTerm,
    asg: &Assignment<L::Elem>,
    l: &L,
) -> Result<Admissible<L::Elem>> {
    let mut pos = 0;
    admissible_rec(t, asg, l, &mut pos)
}

fn admissible_rec<L: LatticeCarrier + ?Sized>(
    t: &LatticeTerm,
    asg: &Assignment<L::Elem>,
    l: &L,
    pos: &mut usize,
) -> Result<Admissible<L::Elem>> {
    let here = *pos;
    *pos += 1;
    match t {
        LatticeTerm::Join { left, right } | LatticeTerm::Meet { left, right } => {
            let a = match admissible_rec(left, asg, l, pos)? {
                Admissible::Value(v) => v,
                bad => return Ok(bad),
            };
            let b = match admissible_rec(right, asg, l, pos)? {
                Admissible::Value(v) => v,
                bad => return Ok(bad),
            };
            let (ok, value) = if matches!(t, LatticeTerm::Join { .. }) {
                (l.meet(&a, &b) == l.bottom(), l.join(&a, &b))
            } else {
                (l.join(&a, &b) == l.top(), l.meet(&a, &b))
            };
            if ok {
                Ok(Admissible::Value(value))
            } else {
                Ok(Admissible::Inadmissible { subterm: t.clone(), position: here })
            }
        }
        _ => Ok(Admissible::Value(eval_term(t, asg, l)?)),
    }
}

/// Admissible satisfaction of an equation: both sides admissible and equal.
pub fn admissible_holds<L: LatticeCarrier + ?Sized>(
    eq: &LatticeEquation,
    asg: &Assignment<L::Elem>,
    l: &L,
) -> Result<bool> {
    let lhs = admissible_eval(&eq.lhs, asg, l)?;
    let rhs = admissible_eval(&eq.rhs, asg, l)?;
    Ok(match (lhs, rhs) {
        (Admissible::Value(a), Admissible::Value(b)) => a == b,
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf2() -> FieldPrime {
        FieldPrime::new(2).unwrap()
    }

    fn line(v: [i64; 2]) -> Subspace {
        Subspace::span(gf2(), 2, &[v]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let l = SubspaceLattice::new(gf2(), 2);
        let x = LatticeTerm::var("x");
        let mut asg = Assignment::new();
        asg.insert("x".to_string(), line([1, 0]));
        asg.insert("y".to_string(), line([0, 1]));
        asg.insert("z".to_string(), line([1, 1]));
        assert_eq!(eval_term(&x, &asg, &l).unwrap(), line([1, 0]));
        let t = x.clone() + LatticeTerm::Const0;
        assert_eq!(eval_term(&t, &asg, &l).unwrap(), line([1, 0]));
        let t = (x + LatticeTerm::var("y")) & LatticeTerm::var("z");
        assert_eq!(eval_term(&t, &asg, &l).unwrap(), line([1, 1]));
        assert_eq!(
            eval_term(&LatticeTerm::var("w"), &asg, &l),
            Err(LatticeError::Unbound("w".into()))
        );
    }

    #[test]
    fn admissible_examples() {
        let l = SubspaceLattice::new(gf2(), 2);
        let mut asg = Assignment::new();
        asg.insert("x".to_string(), line([1, 0]));
        asg.insert("y".to_string(), line([0, 1]));
        let xy = LatticeTerm::var("x") + LatticeTerm::var("y");
        assert_eq!(admissible_eval(&xy, &asg, &l).unwrap(), Admissible::Value(l.top()));
        let xx = LatticeTerm::var("x") + LatticeTerm::var("x");
        assert!(matches!(
            admissible_eval(&xx, &asg, &l).unwrap(),
            Admissible::Inadmissible { position: 0, .. }
        ));
        let inner = (LatticeTerm::var("x") + LatticeTerm::var("x")) & LatticeTerm::Const1;
        match admissible_eval(&inner, &asg, &l).unwrap() {
            Admissible::Inadmissible { subterm, position } => {
                assert_eq!(position, 1);
                assert_eq!(subterm, xx);
            }
            other => panic!("expected inadmissible, got {other:?}"),
        }
    }

    #[test]
    fn display_round_trips_precedence() {
        let a = LatticeTerm::var("a");
        let b = LatticeTerm::var("b");
        let c = LatticeTerm::var("c");
        let t = (a.clone() + b.clone()) & c.clone();
        assert_eq!(t.to_string(), "(a + b) & c");
        let t = a.clone() + (b.clone() & c.clone());
        assert_eq!(t.to_string(), "a + b & c");
        let t = a.clone() + (b.clone() + c.clone());
        assert_eq!(t.to_string(), "a + (b + c)");
        let t = a & (b & c);
        assert_eq!(t.to_string(), "a & (b & c)");
    }

    #[test]
    fn json_ast_shape() {
        let t = LatticeTerm::var("x") & LatticeTerm::Const1;
        let j = serde_json::to_value(&t).unwrap();
        assert_eq!(
            j,
            serde_json::json!({"op": "meet", "left": {"op": "var", "name": "x"}, "right": {"op": "c1"}})
        );
        let back: LatticeTerm = serde_json::from_value(j).unwrap();
        assert_eq!(back, t);
    }
}
