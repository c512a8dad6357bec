//! Matrix rings M_d(GF(p)): idempotents, principal right ideals, the
//! pp-definable join and meet of idempotents, polynomial evaluation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffmat::{FfError, FieldPrime, Matrix, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("matrix is not idempotent: {0:?}")]
    NotIdempotent(Matrix),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("idempotent variable `{0}` is not a declared variable")]
    UndeclaredIdempotent(String),
    #[error("enumeration of {count} matrices exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error(transparent)]
    Field(#[from] FfError),
}

pub type Result<T> = std::result::Result<T, RingError>;

/// Polynomial in non-commuting variables with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum RingPoly {
    Var { name: String },
    Int { value: i64 },
    Add { left: Box<RingPoly>, right: Box<RingPoly> },
    Sub { left: Box<RingPoly>, right: Box<RingPoly> },
    Mul { left: Box<RingPoly>, right: Box<RingPoly> },
}

impl RingPoly {
    pub fn var(name: impl Into<String>) -> Self {
        RingPoly::Var { name: name.into() }
    }
    pub fn int(value: i64) -> Self {
        RingPoly::Int { value }
    }
    pub fn add(a: RingPoly, b: RingPoly) -> Self {
        RingPoly::Add { left: Box::new(a), right: Box::new(b) }
    }
    pub fn sub(a: RingPoly, b: RingPoly) -> Self {
        RingPoly::Sub { left: Box::new(a), right: Box::new(b) }
    }
    pub fn mul(a: RingPoly, b: RingPoly) -> Self {
        RingPoly::Mul { left: Box::new(a), right: Box::new(b) }
    }

    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<String>) {
        match self {
            RingPoly::Var { name } => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            RingPoly::Int { .. } => {}
            RingPoly::Add { left, right }
            | RingPoly::Sub { left, right }
            | RingPoly::Mul { left, right } => {
                left.collect(out);
                right.collect(out);
            }
        }
    }

    // precedence: 0 sum level, 1 product level, 2 atom
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let (prec, body): (u8, Box<dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result + '_>) = match self
        {
            RingPoly::Var { name } => (2, Box::new(move |f| write!(f, "{name}"))),
            RingPoly::Int { value } if *value >= 0 => (2, Box::new(move |f| write!(f, "{value}"))),
            RingPoly::Int { value } => (1, Box::new(move |f| write!(f, "{value}"))),
            RingPoly::Add { left, right } => (
                0,
                Box::new(move |f| {
                    left.fmt_prec(f, 0)?;
                    write!(f, " + ")?;
                    right.fmt_prec(f, 1)
                }),
            ),
            RingPoly::Sub { left, right } => (
                0,
                Box::new(move |f| {
                    left.fmt_prec(f, 0)?;
                    write!(f, " - ")?;
                    right.fmt_prec(f, 1)
                }),
            ),
            RingPoly::Mul { left, right } => (
                1,
                Box::new(move |f| {
                    left.fmt_prec(f, 1)?;
                    write!(f, "*")?;
                    right.fmt_prec(f, 2)
                }),
            ),
        };
        if prec < min {
            write!(f, "(")?;
            body(f)?;
            write!(f, ")")
        } else {
            body(f)
        }
    }
}

impl fmt::Display for RingPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl std::ops::Add for RingPoly {
    type Output = RingPoly;
    fn add(self, rhs: RingPoly) -> RingPoly {
        RingPoly::add(self, rhs)
    }
}

impl std::ops::Sub for RingPoly {
    type Output = RingPoly;
    fn sub(self, rhs: RingPoly) -> RingPoly {
        RingPoly::sub(self, rhs)
    }
}

impl std::ops::Mul for RingPoly {
    type Output = RingPoly;
    fn mul(self, rhs: RingPoly) -> RingPoly {
        RingPoly::mul(self, rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingEquation {
    pub lhs: RingPoly,
    pub rhs: RingPoly,
}

impl RingEquation {
    pub fn new(lhs: RingPoly, rhs: RingPoly) -> Self {
        RingEquation { lhs, rhs }
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

impl fmt::Display for RingEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Conjunction of ring equations, some variables required idempotent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingSystem {
    pub variables: Vec<String>,
    pub equations: Vec<RingEquation>,
    pub idempotent_vars: Vec<String>,
}

impl RingSystem {
    /// Collects variables from the equations (first occurrence order) after
    /// the idempotent ones.
    pub fn new(equations: Vec<RingEquation>, idempotent_vars: Vec<String>) -> Self {
        let mut variables = idempotent_vars.clone();
        for eq in &equations {
            for v in eq.vars() {
                if !variables.contains(&v) {
                    variables.push(v);
                }
            }
        }
        RingSystem { variables, equations, idempotent_vars }
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.idempotent_vars {
            if !self.variables.contains(v) {
                return Err(RingError::UndeclaredIdempotent(v.clone()));
            }
        }
        for eq in &self.equations {
            for v in eq.vars() {
                if !self.variables.contains(&v) {
                    return Err(RingError::Unbound(v));
                }
            }
        }
        Ok(())
    }

    /// The system with idempotency written out as equations `x*x = x`.
    pub fn explicit_equations(&self) -> Vec<RingEquation> {
        let mut out: Vec<RingEquation> = self
            .idempotent_vars
            .iter()
            .map(|v| RingEquation::new(RingPoly::var(v) * RingPoly::var(v), RingPoly::var(v)))
            .collect();
        out.extend(self.equations.iter().cloned());
        out
    }

    /// Whether `asg` satisfies every equation and idempotency condition.
    pub fn holds(&self, asg: &BTreeMap<String, Matrix>, p: FieldPrime, d: usize) -> Result<bool> {
        for eq in self.explicit_equations() {
            if eval_poly(&eq.lhs, asg, p, d)? != eval_poly(&eq.rhs, asg, p, d)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for RingSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "idem {}", self.idempotent_vars.join(", "))?;
        for eq in &self.equations {
            write!(f, ";\n{eq}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for RingSystem {
    type Err = crate::formulas::ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        crate::formulas::parse_ring_system(s)
    }
}

/// Evaluates a polynomial in M_d(GF(p)).
pub fn eval_poly(
    poly: &RingPoly,
    asg: &BTreeMap<String, Matrix>,
    p: FieldPrime,
    d: usize,
) -> Result<Matrix> {
    match poly {
        RingPoly::Var { name } => {
            let m = asg.get(name).ok_or_else(|| RingError::Unbound(name.clone()))?;
            if m.rows() != d || m.cols() != d || m.field() != p {
                return Err(RingError::SizeMismatch(format!(
                    "`{name}` is {}x{} over GF({}), expected {d}x{d} over GF({})",
                    m.rows(),
                    m.cols(),
                    m.field().get(),
                    p.get()
                )));
            }
            Ok(m.clone())
        }
        RingPoly::Int { value } => Ok(Matrix::scalar(p, d, *value)),
        RingPoly::Add { left, right } => {
            Ok(eval_poly(left, asg, p, d)?.add(&eval_poly(right, asg, p, d)?)?)
        }
        RingPoly::Sub { left, right } => {
            Ok(eval_poly(left, asg, p, d)?.sub(&eval_poly(right, asg, p, d)?)?)
        }
        RingPoly::Mul { left, right } => {
            Ok(eval_poly(left, asg, p, d)?.mul(&eval_poly(right, asg, p, d)?)?)
        }
    }
}

pub fn is_idempotent(e: &Matrix) -> bool {
    e.is_square() && e.mul(e).map(|x| x == *e).unwrap_or(false)
}

fn require_idempotent(ms: &[&Matrix]) -> Result<()> {
    for m in ms {
        if !is_idempotent(m) {
            return Err(RingError::NotIdempotent((*m).clone()));
        }
    }
    Ok(())
}

/// Column space, i.e. the image of the map `v ↦ a v`.
pub fn colspace(a: &Matrix) -> Subspace {
    Subspace::column_space(a)
}

/// Matrix whose columns are the given subspace's basis vectors.
fn basis_columns(u: &Subspace) -> Matrix {
    u.basis().transpose()
}

/// The idempotent with image `u` and kernel `w` (`u ⊕ w` the whole space).
pub fn projection(u: &Subspace, w: &Subspace) -> Result<Matrix> {
    let d = u.ambient_dim();
    let p = u.field();
    if u.dim() + w.dim() != d || !u.meet(w)?.is_zero() {
        return Err(RingError::SizeMismatch("image and kernel are not complementary".into()));
    }
    let basis = basis_columns(u).hstack(&basis_columns(w))?;
    let inv = basis.inverse().expect("complementary bases form an invertible matrix");
    let mut diag = Matrix::zeros(p, d, d);
    for i in 0..u.dim() {
        diag.set(i, i, 1);
    }
    Ok(basis.mul(&diag)?.mul(&inv)?)
}

/// Every idempotent of M_d(GF(p)), sorted by entries.
pub fn idempotents(d: usize, p: FieldPrime, cap: u128) -> Result<Vec<Matrix>> {
    let subs = Subspace::enumerate_all(p, d, cap).map_err(|e| match e {
        FfError::CapExceeded { count, cap } => RingError::CapExceeded { count, cap },
        other => RingError::Field(other),
    })?;
    let mut out = Vec::new();
    for u in &subs {
        for w in &subs {
            if u.dim() + w.dim() == d && u.meet(w)?.is_zero() {
                out.push(projection(u, w)?);
                if out.len() as u128 > cap {
                    return Err(RingError::CapExceeded { count: out.len() as u128, cap });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `ge = e ∧ gf = f ∧ ∃r∃s. g = er + fs`.
pub fn sigma_holds(e: &Matrix, f: &Matrix, g: &Matrix) -> Result<bool> {
    require_idempotent(&[e, f, g])?;
    if g.mul(e)? != *e || g.mul(f)? != *f {
        return Ok(false);
    }
    Ok(e.hstack(f)?.solve(g)?.is_some())
}

/// Idempotent `g` with `gR = eR + fR`, and `r`, `s` with `g = er + fs`.
pub fn sigma_witness(e: &Matrix, f: &Matrix) -> Result<(Matrix, Matrix, Matrix)> {
    require_idempotent(&[e, f])?;
    let p = e.field();
    let d = e.rows();
    if e.mul(f)? == *f {
        return Ok((e.clone(), Matrix::identity(p, d), Matrix::zeros(p, d, d)));
    }
    if f.mul(e)? == *e {
        return Ok((f.clone(), Matrix::zeros(p, d, d), Matrix::identity(p, d)));
    }
    let image = colspace(e).sum(&colspace(f))?;
    let g = projection(&image, &image.standard_complement())?;
    let x = e.hstack(f)?.solve(&g)?.expect("g maps into eR + fR");
    Ok((g, x.row_block(0, d), x.row_block(d, 2 * d)))
}

/// `h = f − f r (f − ef)` with `r` a quasi-inverse of `f − ef`, so that
/// `hR = f·ann(f − ef) = eR ∩ fR`.
fn mu_h(e: &Matrix, f: &Matrix) -> Result<Matrix> {
    let a = f.sub(&e.mul(f)?)?;
    let r = a.quasi_inverse()?;
    Ok(f.sub(&f.mul(&r)?.mul(&a)?)?)
}

/// `∃r∃s. (f−ef)r(f−ef) = f−ef ∧ g h = h ∧ g = h s` with `h = f − fr(f−ef)`.
pub fn mu_holds(e: &Matrix, f: &Matrix, g: &Matrix) -> Result<bool> {
    require_idempotent(&[e, f, g])?;
    let h = mu_h(e, f)?;
    Ok(g.mul(&h)? == h && h.solve(g)?.is_some())
}

/// Idempotent `g = h·x` with `x` a quasi-inverse of `h`, so `gR = hR`;
/// returns `(g, r, s)` with `r` the quasi-inverse of `f − ef` and `g = h s`.
pub fn mu_witness(e: &Matrix, f: &Matrix) -> Result<(Matrix, Matrix, Matrix)> {
    require_idempotent(&[e, f])?;
    let r = f.sub(&e.mul(f)?)?.quasi_inverse()?;
    let h = mu_h(e, f)?;
    let s = h.quasi_inverse()?;
    let g = h.mul(&s)?;
    Ok((g, r, s))
}
