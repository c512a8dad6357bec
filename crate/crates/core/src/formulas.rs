//! Text grammars and formula-level normal forms.
//!
//! Grammars (statements separated by `;`, `#` starts a comment):
//!
//! * lattice: `x = (y + z) & w; u = 0` where `&` binds tighter than `+`
//! * group: `gens x, y; rel x*y^-1 = 1` (`1`, or `e` when not a generator, is the unit)
//! * ring: `idem x, y; x*x - x = 0`
//! * dependencies: `fd x y -> z w; emvd [x z | y z]`

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::database::{Dependency, DependencySet};
use crate::groups::{GroupPresentation, GroupWord};
use crate::lattice::{
    Assignment, LatticeCarrier, LatticeConjunction, LatticeEquation, LatticeError, LatticeTerm,
    TableLattice,
};
use crate::matring::{RingEquation, RingPoly, RingSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const SYMBOLS: [&str; 15] = ["->", "+", "&", "*", "-", "^", "=", ";", ",", "(", ")", "[", "]", "|", "∩"];

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let (l0, c0) = (line, col);
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    s.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(s), l0, c0));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let n = s.parse().map_err(|_| ParseError {
                line: l0,
                column: c0,
                message: format!("integer `{s}` too large"),
            })?;
            out.push((Tok::Int(n), l0, c0));
            continue;
        }
        let rest = &src[i..];
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                let sym = if *s == "∩" { "&" } else { *s };
                for _ in 0..s.chars().count() {
                    chars.next();
                    col += 1;
                }
                out.push((Tok::Sym(sym), l0, c0));
            }
            None => {
                return Err(ParseError { line: l0, column: c0, message: format!("unexpected character `{c}`") })
            }
        }
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (_, line, column) = self.toks[self.pos];
        Err(ParseError { line, column, message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.unexpected(&format!("`{sym}`"))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("a name"),
        }
    }

    fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.unexpected("`;` or end of input")
        }
    }

    /// Runs `stmt` for each `;`-separated statement; empty statements are skipped.
    fn statements(
        &mut self,
        mut stmt: impl FnMut(&mut Parser) -> Result<(), ParseError>,
    ) -> Result<(), ParseError> {
        loop {
            while self.eat(";") {}
            if self.at_end() {
                return Ok(());
            }
            stmt(self)?;
            if !self.eat(";") {
                return self.finish();
            }
        }
    }

    // lattice

    fn lat_term(&mut self) -> Result<LatticeTerm, ParseError> {
        let mut t = self.lat_meet()?;
        while self.eat("+") {
            t = LatticeTerm::join(t, self.lat_meet()?);
        }
        Ok(t)
    }

    fn lat_meet(&mut self) -> Result<LatticeTerm, ParseError> {
        let mut t = self.lat_atom()?;
        while self.eat("&") {
            t = LatticeTerm::meet(t, self.lat_atom()?);
        }
        Ok(t)
    }

    fn lat_atom(&mut self) -> Result<LatticeTerm, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(LatticeTerm::var(s))
            }
            Tok::Int(0) => {
                self.bump();
                Ok(LatticeTerm::Const0)
            }
            Tok::Int(1) => {
                self.bump();
                Ok(LatticeTerm::Const1)
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.lat_term()?;
                self.expect(")")?;
                Ok(t)
            }
            _ => self.unexpected("a lattice term"),
        }
    }

    // group

    fn word(&mut self, gens: &[String]) -> Result<GroupWord, ParseError> {
        let mut w = self.word_factor(gens)?;
        while self.eat("*") {
            w = w.concat(&self.word_factor(gens)?);
        }
        Ok(w)
    }

    fn word_factor(&mut self, gens: &[String]) -> Result<GroupWord, ParseError> {
        let base = match self.peek().clone() {
            Tok::Ident(s) if gens.contains(&s) => {
                self.bump();
                GroupWord::generator(&s)
            }
            Tok::Ident(s) if s == "e" => {
                self.bump();
                GroupWord::empty()
            }
            Tok::Ident(s) => return self.error(format!("undeclared generator `{s}`")),
            Tok::Int(1) => {
                self.bump();
                GroupWord::empty()
            }
            Tok::Sym("(") => {
                self.bump();
                let w = self.word(gens)?;
                self.expect(")")?;
                w
            }
            _ => return self.unexpected("a group word"),
        };
        if !self.eat("^") {
            return Ok(base);
        }
        let neg = self.eat("-");
        let k = match self.bump() {
            Tok::Int(k) if k <= 1 << 20 => k,
            _ => {
                self.pos -= 1;
                return self.unexpected("an exponent");
            }
        };
        let unit = if neg { base.inverse() } else { base };
        let mut w = GroupWord::empty();
        for _ in 0..k {
            w = w.concat(&unit);
        }
        Ok(w)
    }

    // ring

    fn poly(&mut self) -> Result<RingPoly, ParseError> {
        let mut t = self.poly_product()?;
        loop {
            if self.eat("+") {
                t = t + self.poly_product()?;
            } else if self.eat("-") {
                t = t - self.poly_product()?;
            } else {
                return Ok(t);
            }
        }
    }

    fn poly_product(&mut self) -> Result<RingPoly, ParseError> {
        let mut t = self.poly_unary()?;
        while self.eat("*") {
            t = t * self.poly_unary()?;
        }
        Ok(t)
    }

    fn poly_unary(&mut self) -> Result<RingPoly, ParseError> {
        if self.eat("-") {
            return Ok(match self.poly_unary()? {
                RingPoly::Int { value } => RingPoly::int(-value),
                other => RingPoly::int(0) - other,
            });
        }
        let base = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                RingPoly::var(s)
            }
            Tok::Int(n) => {
                self.bump();
                match i64::try_from(n) {
                    Ok(v) => RingPoly::int(v),
                    Err(_) => {
                        self.pos -= 1;
                        return self.error("integer too large");
                    }
                }
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.poly()?;
                self.expect(")")?;
                t
            }
            _ => return self.unexpected("a ring term"),
        };
        if !self.eat("^") {
            return Ok(base);
        }
        match self.bump() {
            Tok::Int(k) if (1..=64).contains(&k) => {
                let mut t = base.clone();
                for _ in 1..k {
                    t = t * base.clone();
                }
                Ok(t)
            }
            _ => {
                self.pos -= 1;
                self.unexpected("an exponent between 1 and 64")
            }
        }
    }

    fn attrs_until(&mut self, stop: &[&str]) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        while !stop.iter().any(|s| matches!(self.peek(), Tok::Sym(t) if t == s)) && !self.at_end() {
            let a = self.ident()?;
            if !out.contains(&a) {
                out.push(a);
            }
        }
        if out.is_empty() {
            return self.error("expected a nonempty attribute set");
        }
        Ok(out)
    }
}

pub fn parse_lattice_term(src: &str) -> Result<LatticeTerm, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.lat_term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_lattice_conjunction(src: &str) -> Result<LatticeConjunction, ParseError> {
    let mut p = Parser::new(src)?;
    let mut conj = LatticeConjunction::default();
    p.statements(|p| {
        let lhs = p.lat_term()?;
        p.expect("=")?;
        let rhs = p.lat_term()?;
        conj.push(lhs, rhs);
        Ok(())
    })?;
    Ok(conj)
}

pub fn parse_group_presentation(src: &str) -> Result<GroupPresentation, ParseError> {
    let mut p = Parser::new(src)?;
    let mut gens: Vec<String> = Vec::new();
    let mut rels = Vec::new();
    p.statements(|p| {
        if p.at_keyword("gens") {
            p.bump();
            if p.at_end() || matches!(p.peek(), Tok::Sym(";")) {
                return Ok(());
            }
            loop {
                let g = p.ident()?;
                if gens.contains(&g) {
                    p.pos -= 1;
                    return p.error(format!("duplicate generator `{g}`"));
                }
                gens.push(g);
                if !p.eat(",") {
                    return Ok(());
                }
            }
        }
        if p.at_keyword("rel") {
            p.bump();
        }
        let lhs = p.word(&gens)?;
        p.expect("=")?;
        let rhs = p.word(&gens)?;
        rels.push((lhs, rhs));
        Ok(())
    })?;
    GroupPresentation::new(gens, rels)
        .map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() })
}

pub fn parse_ring_system(src: &str) -> Result<RingSystem, ParseError> {
    let mut p = Parser::new(src)?;
    let mut idem: Vec<String> = Vec::new();
    let mut eqs = Vec::new();
    p.statements(|p| {
        if p.at_keyword("idem") {
            p.bump();
            if p.at_end() || matches!(p.peek(), Tok::Sym(";")) {
                return Ok(());
            }
            loop {
                let v = p.ident()?;
                if !idem.contains(&v) {
                    idem.push(v);
                }
                if !p.eat(",") {
                    return Ok(());
                }
            }
        }
        let lhs = p.poly()?;
        p.expect("=")?;
        let rhs = p.poly()?;
        eqs.push(RingEquation::new(lhs, rhs));
        Ok(())
    })?;
    Ok(RingSystem::new(eqs, idem))
}

pub fn parse_deps(src: &str) -> Result<DependencySet, ParseError> {
    let mut p = Parser::new(src)?;
    let mut deps = Vec::new();
    p.statements(|p| {
        if p.at_keyword("fd") {
            p.bump();
            let lhs = p.attrs_until(&["->"])?;
            p.expect("->")?;
            let rhs = p.attrs_until(&[";"])?;
            deps.push(Dependency::Fd { lhs, rhs });
            Ok(())
        } else if p.at_keyword("emvd") {
            p.bump();
            p.expect("[")?;
            let left = p.attrs_until(&["|"])?;
            p.expect("|")?;
            let right = p.attrs_until(&["]"])?;
            p.expect("]")?;
            deps.push(Dependency::Emvd { left, right });
            Ok(())
        } else {
            p.unexpected("`fd` or `emvd`")
        }
    })?;
    Ok(DependencySet::new(deps))
}

/// Deterministic fresh names `_g<n>` avoiding a set of taken names.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    counter: usize,
    taken: HashSet<String>,
    issued: Vec<String>,
}

impl FreshNames {
    pub fn new<S: AsRef<str>>(existing: impl IntoIterator<Item = S>) -> Self {
        FreshNames {
            counter: 0,
            taken: existing.into_iter().map(|s| s.as_ref().to_string()).collect(),
            issued: Vec::new(),
        }
    }

    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }

    pub fn next(&mut self) -> String {
        loop {
            let name = format!("_g{}", self.counter);
            self.counter += 1;
            if self.taken.insert(name.clone()) {
                self.issued.push(name.clone());
                return name;
            }
        }
    }

    /// Every name handed out so far, in order.
    pub fn issued(&self) -> &[String] {
        &self.issued
    }
}

/// Basic equation of an unnested formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasicEq {
    Copy { y: String, x: String },
    Join { y: String, x: String, w: String },
    Meet { y: String, x: String, w: String },
    Zero { y: String },
    One { y: String },
}

impl BasicEq {
    pub fn target(&self) -> &str {
        match self {
            BasicEq::Copy { y, .. }
            | BasicEq::Join { y, .. }
            | BasicEq::Meet { y, .. }
            | BasicEq::Zero { y }
            | BasicEq::One { y } => y,
        }
    }

    pub fn to_equation(&self) -> LatticeEquation {
        let v = LatticeTerm::var;
        match self {
            BasicEq::Copy { y, x } => LatticeEquation::new(v(y), v(x)),
            BasicEq::Join { y, x, w } => LatticeEquation::new(v(y), v(x) + v(w)),
            BasicEq::Meet { y, x, w } => LatticeEquation::new(v(y), v(x) & v(w)),
            BasicEq::Zero { y } => LatticeEquation::new(v(y), LatticeTerm::Const0),
            BasicEq::One { y } => LatticeEquation::new(v(y), LatticeTerm::Const1),
        }
    }
}

impl fmt::Display for BasicEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_equation())
    }
}

/// `∃ bound. ⋀ conjuncts` with every conjunct basic.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PPFormula {
    pub free: Vec<String>,
    pub bound: Vec<String>,
    pub conjuncts: Vec<BasicEq>,
}

impl PPFormula {
    pub fn matrix(&self) -> LatticeConjunction {
        LatticeConjunction::new(self.conjuncts.iter().map(BasicEq::to_equation).collect())
    }

    /// Extends an assignment of the free variables by evaluating bound
    /// variables in definition order. Defined only when every bound variable
    /// is the target of some conjunct before it is used.
    pub fn complete<L: LatticeCarrier + ?Sized>(
        &self,
        asg: &Assignment<L::Elem>,
        l: &L,
    ) -> Result<Assignment<L::Elem>, LatticeError> {
        let mut full = asg.clone();
        let get = |full: &Assignment<L::Elem>, x: &str| {
            full.get(x).cloned().ok_or_else(|| LatticeError::Unbound(x.to_string()))
        };
        for c in &self.conjuncts {
            if full.contains_key(c.target()) {
                continue;
            }
            let val = match c {
                BasicEq::Copy { x, .. } => get(&full, x)?,
                BasicEq::Join { x, w, .. } => l.join(&get(&full, x)?, &get(&full, w)?),
                BasicEq::Meet { x, w, .. } => l.meet(&get(&full, x)?, &get(&full, w)?),
                BasicEq::Zero { .. } => l.bottom(),
                BasicEq::One { .. } => l.top(),
            };
            full.insert(c.target().to_string(), val);
        }
        Ok(full)
    }

    /// Whether the free assignment extends to a model: bound variables are
    /// functionally determined, so completing then checking decides it.
    pub fn holds<L: LatticeCarrier + ?Sized>(
        &self,
        asg: &Assignment<L::Elem>,
        l: &L,
    ) -> Result<bool, LatticeError> {
        let full = self.complete(asg, l)?;
        Ok(crate::lattice::failing_equations(&self.matrix(), &full, l)?.is_empty())
    }
}

impl fmt::Display for PPFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.bound.is_empty() {
            write!(f, "∃{}. ", self.bound.join(" "))?;
        }
        let parts: Vec<String> = self.conjuncts.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" ∧ "))
    }
}

struct Unnester<'a> {
    fresh: &'a mut FreshNames,
    out: Vec<BasicEq>,
    bound: Vec<String>,
}

impl Unnester<'_> {
    fn name(&mut self, t: &LatticeTerm) -> String {
        if let Some(x) = t.as_var() {
            return x.to_string();
        }
        let v = self.fresh.next();
        self.bound.push(v.clone());
        self.define(&v, t);
        v
    }

    fn define(&mut self, y: &str, t: &LatticeTerm) {
        let y = y.to_string();
        let c = match t {
            LatticeTerm::Var { name } => BasicEq::Copy { y, x: name.clone() },
            LatticeTerm::Const0 => BasicEq::Zero { y },
            LatticeTerm::Const1 => BasicEq::One { y },
            LatticeTerm::Join { left, right } => {
                let (x, w) = (self.name(left), self.name(right));
                BasicEq::Join { y, x, w }
            }
            LatticeTerm::Meet { left, right } => {
                let (x, w) = (self.name(left), self.name(right));
                BasicEq::Meet { y, x, w }
            }
        };
        self.out.push(c);
    }
}

/// Flattens every compound subterm occurrence into its own fresh variable.
pub fn unnest(conj: &LatticeConjunction, fresh: &mut FreshNames) -> PPFormula {
    for v in conj.vars() {
        fresh.reserve(&v);
    }
    let mut u = Unnester { fresh, out: Vec::new(), bound: Vec::new() };
    for eq in &conj.equations {
        if let Some(y) = eq.lhs.as_var() {
            u.define(y, &eq.rhs);
        } else if let Some(y) = eq.rhs.as_var() {
            u.define(y, &eq.lhs);
        } else {
            let y = u.name(&eq.lhs);
            u.define(&y, &eq.rhs);
        }
    }
    PPFormula { free: conj.vars(), bound: u.bound, conjuncts: u.out }
}

/// `(s, t)` with `conj ⇔ ∃v̄. s = 0 ∧ t = 1` in complemented modular lattices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClmForm {
    pub s: LatticeTerm,
    pub t: LatticeTerm,
    pub fresh: Vec<String>,
}

pub fn clm_form(conj: &LatticeConjunction, fresh: &mut FreshNames) -> ClmForm {
    for v in conj.vars() {
        fresh.reserve(&v);
    }
    let mut ss = Vec::new();
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for eq in &conj.equations {
        let v = fresh.next();
        let vt = LatticeTerm::var(&v);
        ss.push((eq.lhs.clone() + eq.rhs.clone()) & vt.clone());
        ts.push((eq.lhs.clone() & eq.rhs.clone()) + vt);
        vs.push(v);
    }
    ClmForm {
        s: LatticeTerm::join_all(ss, LatticeTerm::Const0),
        t: LatticeTerm::meet_all(ts, LatticeTerm::Const1),
        fresh: vs,
    }
}

/// Lattice term with orthocomplement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum OrthoTerm {
    Var { name: String },
    #[serde(rename = "c0")]
    Const0,
    #[serde(rename = "c1")]
    Const1,
    Join { left: Box<OrthoTerm>, right: Box<OrthoTerm> },
    Meet { left: Box<OrthoTerm>, right: Box<OrthoTerm> },
    Comp { arg: Box<OrthoTerm> },
}

impl OrthoTerm {
    pub fn join(a: OrthoTerm, b: OrthoTerm) -> Self {
        OrthoTerm::Join { left: Box::new(a), right: Box::new(b) }
    }

    pub fn meet(a: OrthoTerm, b: OrthoTerm) -> Self {
        OrthoTerm::Meet { left: Box::new(a), right: Box::new(b) }
    }

    pub fn comp(a: OrthoTerm) -> Self {
        OrthoTerm::Comp { arg: Box::new(a) }
    }

    /// Evaluates in an ortholattice given by a table with complement.
    pub fn eval(&self, asg: &BTreeMap<String, usize>, l: &TableLattice) -> Result<usize, LatticeError> {
        Ok(match self {
            OrthoTerm::Var { name } => {
                *asg.get(name).ok_or_else(|| LatticeError::Unbound(name.clone()))?
            }
            OrthoTerm::Const0 => l.bottom_idx(),
            OrthoTerm::Const1 => l.top_idx(),
            OrthoTerm::Join { left, right } => l.join_idx(left.eval(asg, l)?, right.eval(asg, l)?),
            OrthoTerm::Meet { left, right } => l.meet_idx(left.eval(asg, l)?, right.eval(asg, l)?),
            OrthoTerm::Comp { arg } => {
                let a = arg.eval(asg, l)?;
                l.complement(a).ok_or_else(|| {
                    LatticeError::NotALattice("carrier has no orthocomplement".into())
                })?
            }
        })
    }
}

impl From<&LatticeTerm> for OrthoTerm {
    fn from(t: &LatticeTerm) -> Self {
        match t {
            LatticeTerm::Var { name } => OrthoTerm::Var { name: name.clone() },
            LatticeTerm::Const0 => OrthoTerm::Const0,
            LatticeTerm::Const1 => OrthoTerm::Const1,
            LatticeTerm::Join { left, right } => OrthoTerm::join(left.as_ref().into(), right.as_ref().into()),
            LatticeTerm::Meet { left, right } => OrthoTerm::meet(left.as_ref().into(), right.as_ref().into()),
        }
    }
}

impl fmt::Display for OrthoTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrthoTerm::Var { name } => write!(f, "{name}"),
            OrthoTerm::Const0 => write!(f, "0"),
            OrthoTerm::Const1 => write!(f, "1"),
            OrthoTerm::Join { left, right } => write!(f, "({left} + {right})"),
            OrthoTerm::Meet { left, right } => write!(f, "({left} & {right})"),
            OrthoTerm::Comp { arg } => write!(f, "{arg}'"),
        }
    }
}

/// `hi + hi^⊥ lo^⊥`, which is 1 exactly when `lo ≤ hi`.
pub fn leq_term(lo: OrthoTerm, hi: OrthoTerm) -> OrthoTerm {
    OrthoTerm::join(hi.clone(), OrthoTerm::meet(OrthoTerm::comp(hi), OrthoTerm::comp(lo)))
}

/// A single term `t` with `t = 1 ⇔ conj` in modular ortholattices.
pub fn mol_form(conj: &LatticeConjunction) -> OrthoTerm {
    let mut parts = Vec::new();
    for eq in &conj.equations {
        let (s, t): (OrthoTerm, OrthoTerm) = ((&eq.lhs).into(), (&eq.rhs).into());
        parts.push(leq_term(s.clone(), t.clone()));
        parts.push(leq_term(t, s));
    }
    parts.into_iter().reduce(OrthoTerm::meet).unwrap_or(OrthoTerm::Const1)
}

/// Equation between positive words in a semigroup.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemigroupEquation {
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
}

impl fmt::Display for SemigroupEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs.join("*"), self.rhs.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonoidLift {
    /// Generator to inverse-witness variable.
    pub inverses: Vec<(String, String)>,
    pub unit: String,
    pub equations: Vec<SemigroupEquation>,
}

impl MonoidLift {
    /// Evaluates every equation in a semigroup given by `mul`.
    pub fn failing<E: Clone + PartialEq>(
        &self,
        asg: &BTreeMap<String, E>,
        mul: impl Fn(&E, &E) -> E,
    ) -> Result<Vec<usize>, LatticeError> {
        let eval = |w: &[String]| -> Result<E, LatticeError> {
            let mut acc: Option<E> = None;
            for x in w {
                let v = asg.get(x).ok_or_else(|| LatticeError::Unbound(x.clone()))?;
                acc = Some(match acc {
                    None => v.clone(),
                    Some(a) => mul(&a, v),
                });
            }
            acc.ok_or_else(|| LatticeError::Unbound("empty word".into()))
        };
        let mut out = Vec::new();
        for (i, eq) in self.equations.iter().enumerate() {
            if eval(&eq.lhs)? != eval(&eq.rhs)? {
                out.push(i);
            }
        }
        Ok(out)
    }
}

/// Group presentation to semigroup equations: inverse witness `y_i` and unit
/// `u` per generator with `x y = u = y x`, `x u = x = u x`, `y u = y = u y`.
pub fn monoid_lift(pres: &GroupPresentation, fresh: &mut FreshNames) -> MonoidLift {
    for g in &pres.generators {
        fresh.reserve(g);
    }
    let unit = fresh.next();
    let inverses: Vec<(String, String)> =
        pres.generators.iter().map(|g| (g.clone(), fresh.next())).collect();
    let eq = |l: &[&str], r: &[&str]| SemigroupEquation {
        lhs: l.iter().map(|s| s.to_string()).collect(),
        rhs: r.iter().map(|s| s.to_string()).collect(),
    };
    let u = unit.as_str();
    let mut equations = Vec::new();
    for (x, y) in &inverses {
        let (x, y) = (x.as_str(), y.as_str());
        equations.push(eq(&[x, y], &[u]));
        equations.push(eq(&[y, x], &[u]));
        equations.push(eq(&[x, u], &[x]));
        equations.push(eq(&[u, x], &[x]));
        equations.push(eq(&[y, u], &[y]));
        equations.push(eq(&[u, y], &[y]));
    }
    let spell = |w: &GroupWord| -> Vec<String> {
        let mut out = Vec::new();
        for (g, e) in w.factors() {
            let letter = if *e > 0 {
                g.clone()
            } else {
                inverses.iter().find(|(x, _)| x == g).map(|(_, y)| y.clone()).expect("declared")
            };
            for _ in 0..e.unsigned_abs() {
                out.push(letter.clone());
            }
        }
        if out.is_empty() {
            out.push(unit.clone());
        }
        out
    };
    for r in &pres.relations {
        equations.push(SemigroupEquation { lhs: spell(&r.lhs), rhs: spell(&r.rhs) });
    }
    MonoidLift { inverses, unit, equations }
}
