use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::{
    eval_equation, Assignment, LatticeCarrier, LatticeEquation, LatticeError, LatticeTerm, Result,
    SubspaceLattice, TableLattice,
};
use crate::ffmat::{FieldPrime, Matrix, Subspace};

/// Index pairs (i, j), i < j, in the order used for `Frame::pairs`.
pub const PAIRS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

fn pair_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    PAIRS.iter().position(|&p| p == (a, b)).expect("indices in 1..=4 and distinct")
}

/// A 4-frame `(a_1..a_4, a_12..a_34, a_⊥, a_⊤)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame<E> {
    pub atoms: [E; 4],
    pub pairs: [E; 6],
    pub bot: E,
    pub top: E,
}

impl<E: Clone> Frame<E> {
    /// Every component equal to `e`.
    pub fn uniform(e: E) -> Self {
        Frame {
            atoms: std::array::from_fn(|_| e.clone()),
            pairs: std::array::from_fn(|_| e.clone()),
            bot: e.clone(),
            top: e,
        }
    }

    /// `a_i`, 1-based.
    pub fn atom(&self, i: usize) -> &E {
        &self.atoms[i - 1]
    }

    /// `a_ij = a_ji`, 1-based.
    pub fn pair(&self, i: usize, j: usize) -> &E {
        &self.pairs[pair_slot(i, j)]
    }

    pub fn pair_mut(&mut self, i: usize, j: usize) -> &mut E {
        &mut self.pairs[pair_slot(i, j)]
    }

    /// Components in the order of [`FrameVars::names`].
    pub fn components(&self) -> Vec<E> {
        let mut v: Vec<E> = self.atoms.to_vec();
        v.extend(self.pairs.iter().cloned());
        v.push(self.bot.clone());
        v.push(self.top.clone());
        v
    }

    pub fn from_components(c: &[E]) -> Option<Self> {
        if c.len() != 12 {
            return None;
        }
        Some(Frame {
            atoms: std::array::from_fn(|i| c[i].clone()),
            pairs: std::array::from_fn(|i| c[4 + i].clone()),
            bot: c[10].clone(),
            top: c[11].clone(),
        })
    }

    pub fn to_assignment(&self, vars: &FrameVars) -> Assignment<E> {
        vars.names().into_iter().zip(self.components()).collect()
    }

    pub fn from_assignment(vars: &FrameVars, asg: &Assignment<E>) -> Option<Self> {
        let c: Option<Vec<E>> = vars.names().iter().map(|n| asg.get(n).cloned()).collect();
        Frame::from_components(&c?)
    }

    pub fn map<F, T>(&self, f: F) -> Frame<T>
    where
        F: Fn(&E) -> T,
    {
        Frame {
            atoms: std::array::from_fn(|i| f(&self.atoms[i])),
            pairs: std::array::from_fn(|i| f(&self.pairs[i])),
            bot: f(&self.bot),
            top: f(&self.top),
        }
    }
}

/// Variable names standing for the frame components in formulas.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameVars {
    pub atoms: [String; 4],
    pub pairs: [String; 6],
    pub bot: String,
    pub top: String,
}

impl Default for FrameVars {
    fn default() -> Self {
        FrameVars::with_prefix("z")
    }
}

impl FrameVars {
    pub fn with_prefix(prefix: &str) -> Self {
        FrameVars {
            atoms: std::array::from_fn(|i| format!("{prefix}{}", i + 1)),
            pairs: std::array::from_fn(|k| format!("{prefix}{}{}", PAIRS[k].0, PAIRS[k].1)),
            bot: format!("{prefix}_bot"),
            top: format!("{prefix}_top"),
        }
    }

    /// `a1..a4, a12, a13, a14, a23, a24, a34, a_bot, a_top`.
    pub fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.atoms.to_vec();
        v.extend(self.pairs.iter().cloned());
        v.push(self.bot.clone());
        v.push(self.top.clone());
        v
    }

    pub fn atom(&self, i: usize) -> LatticeTerm {
        LatticeTerm::var(&self.atoms[i - 1])
    }

    pub fn pair(&self, i: usize, j: usize) -> LatticeTerm {
        LatticeTerm::var(&self.pairs[pair_slot(i, j)])
    }

    pub fn bot_term(&self) -> LatticeTerm {
        LatticeTerm::var(&self.bot)
    }

    pub fn top_term(&self) -> LatticeTerm {
        LatticeTerm::var(&self.top)
    }

    /// Left-associated sum of the atoms with indices in `idx` (increasing);
    /// the empty sum is the bottom variable.
    pub fn atom_sum(&self, idx: impl IntoIterator<Item = usize>) -> LatticeTerm {
        LatticeTerm::join_all(idx.into_iter().map(|i| self.atom(i)), self.bot_term())
    }

    /// Sum of all atoms except `j`.
    pub fn co_atom(&self, j: usize) -> LatticeTerm {
        self.atom_sum((1..=4).filter(|&l| l != j))
    }
}

/// One instance of a frame axiom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameAxiom {
    /// `(Σ_{i∈I} a_i) ∩ (Σ_{j∈J} a_j) = Σ_{k∈I∩J} a_k`; sets as bitmasks over 1..4.
    Independence { left: u8, right: u8 },
    TopIsSum,
    /// `a_i + a_j = a_i + a_ij`
    PairJoin { i: usize, j: usize },
    /// `a_i ∩ a_ij = a_⊥`
    PairMeet { i: usize, j: usize },
    /// `a_ik = (a_i + a_k) ∩ (a_ij + a_jk)`
    Transposition { i: usize, j: usize, k: usize },
}

fn set_label(mask: u8) -> String {
    let items: Vec<String> = (1..=4).filter(|i| mask & (1 << (i - 1)) != 0).map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn sub(i: usize, j: usize) -> String {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    format!("a_{a}{b}")
}

impl FrameAxiom {
    /// The axiom family, independent of indices.
    pub fn family(&self) -> &'static str {
        match self {
            FrameAxiom::Independence { .. } => "(Σ_I a_i) ∩ (Σ_J a_j) = Σ_{I∩J} a_k",
            FrameAxiom::TopIsSum => "a_⊤ = Σ a_ℓ",
            FrameAxiom::PairJoin { .. } => "a_i + a_j = a_i + a_ij",
            FrameAxiom::PairMeet { .. } => "a_i ∩ a_ij = a_⊥",
            FrameAxiom::Transposition { .. } => "a_ik = (a_i + a_k) ∩ (a_ij + a_jk)",
        }
    }
}

impl fmt::Display for FrameAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FrameAxiom::Independence { left, right } => write!(
                f,
                "(Σ_{} a_i) ∩ (Σ_{} a_j) = Σ_{} a_k",
                set_label(left),
                set_label(right),
                set_label(left & right)
            ),
            FrameAxiom::TopIsSum => write!(f, "a_⊤ = a_1 + a_2 + a_3 + a_4"),
            FrameAxiom::PairJoin { i, j } => {
                write!(f, "a_{i} + a_{j} = a_{i} + {}", sub(i, j))
            }
            FrameAxiom::PairMeet { i, j } => write!(f, "a_{i} ∩ {} = a_⊥", sub(i, j)),
            FrameAxiom::Transposition { i, j, k } => write!(
                f,
                "{} = (a_{i} + a_{k}) ∩ ({} + {})",
                sub(i, k),
                sub(i, j),
                sub(j, k)
            ),
        }
    }
}

/// All frame axioms as lattice equations over `vars`, in a fixed order:
/// the 256 independence identities, `a_⊤ = Σ`, the pair identities for
/// every ordered pair, and the transposition identities for every ordered
/// triple of distinct indices.
pub fn frame_axioms(vars: &FrameVars) -> Vec<(FrameAxiom, LatticeEquation)> {
    let members = |mask: u8| (1..=4usize).filter(move |i| mask & (1 << (i - 1)) != 0);
    let mut out = Vec::with_capacity(305);
    for left in 0u8..16 {
        for right in 0u8..16 {
            let lhs = LatticeTerm::meet(vars.atom_sum(members(left)), vars.atom_sum(members(right)));
            let rhs = vars.atom_sum(members(left & right));
            out.push((FrameAxiom::Independence { left, right }, LatticeEquation::new(lhs, rhs)));
        }
    }
    out.push((FrameAxiom::TopIsSum, LatticeEquation::new(vars.top_term(), vars.atom_sum(1..=4))));
    for i in 1..=4 {
        for j in (1..=4).filter(|&j| j != i) {
            out.push((
                FrameAxiom::PairJoin { i, j },
                LatticeEquation::new(vars.atom(i) + vars.atom(j), vars.atom(i) + vars.pair(i, j)),
            ));
        }
    }
    for i in 1..=4 {
        for j in (1..=4).filter(|&j| j != i) {
            out.push((
                FrameAxiom::PairMeet { i, j },
                LatticeEquation::new(vars.atom(i) & vars.pair(i, j), vars.bot_term()),
            ));
        }
    }
    for i in 1..=4 {
        for j in (1..=4).filter(|&j| j != i) {
            for k in (1..=4).filter(|&k| k != i && k != j) {
                out.push((
                    FrameAxiom::Transposition { i, j, k },
                    LatticeEquation::new(
                        vars.pair(i, k),
                        (vars.atom(i) + vars.atom(k)) & (vars.pair(i, j) + vars.pair(j, k)),
                    ),
                ));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameViolation {
    pub axiom: FrameAxiom,
    pub equation: String,
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.axiom)
    }
}

/// Lists every violated frame axiom; empty iff `f` is a 4-frame.
pub fn check_frame<L: LatticeCarrier + ?Sized>(f: &Frame<L::Elem>, l: &L) -> Vec<FrameViolation> {
    let vars = FrameVars::default();
    let asg = f.to_assignment(&vars);
    frame_axioms(&vars)
        .into_iter()
        .filter(|(_, eq)| !eval_equation(eq, &asg, l).expect("all frame variables bound"))
        .map(|(axiom, eq)| FrameViolation { axiom, equation: eq.to_string() })
        .collect()
}

/// The canonical frame of Lt(GF(p)^{4d}): `a_i` is the i-th block of `d`
/// coordinates, `a_1j = {v - ε_j v}` and `a_kj = (a_k + a_j) ∩ (a_1k + a_1j)`.
pub fn build_frame(p: FieldPrime, d: usize) -> Result<(SubspaceLattice, Frame<Subspace>)> {
    if d == 0 {
        return Err(LatticeError::BlockSize { expected: 1, got: 0 });
    }
    let n = 4 * d;
    let l = SubspaceLattice::new(p, n);
    let block = |i: usize| {
        let mut m = Matrix::zeros(p, d, n);
        for k in 0..d {
            m.set(k, (i - 1) * d + k, 1);
        }
        Subspace::row_space(&m)
    };
    let graph = |j: usize| {
        let mut m = Matrix::zeros(p, d, n);
        for k in 0..d {
            m.set(k, k, 1);
            m.set(k, (j - 1) * d + k, p.get() - 1);
        }
        Subspace::row_space(&m)
    };
    let atoms: [Subspace; 4] = std::array::from_fn(|i| block(i + 1));
    let mut frame = Frame {
        atoms,
        pairs: std::array::from_fn(|_| l.bottom()),
        bot: l.bottom(),
        top: l.top(),
    };
    for j in 2..=4 {
        *frame.pair_mut(1, j) = graph(j);
    }
    for (k, j) in [(2, 3), (2, 4), (3, 4)] {
        let v = l.meet(
            &l.join(frame.atom(k), frame.atom(j)),
            &l.join(frame.pair(1, k), frame.pair(1, j)),
        );
        *frame.pair_mut(k, j) = v;
    }
    Ok((l, frame))
}

/// `g + a_1 = g + a_2 = a_1 + a_2` and `g ∩ a_1 = g ∩ a_2 = a_⊥`.
pub fn is_g_member<L: LatticeCarrier + ?Sized>(g: &L::Elem, f: &Frame<L::Elem>, l: &L) -> bool {
    let s = l.join(f.atom(1), f.atom(2));
    l.join(g, f.atom(1)) == s
        && l.join(g, f.atom(2)) == s
        && l.meet(g, f.atom(1)) == f.bot
        && l.meet(g, f.atom(2)) == f.bot
}

/// The four membership identities as equations in the term `g`.
pub fn g_membership_equations(g: &LatticeTerm, vars: &FrameVars) -> Vec<LatticeEquation> {
    let s = vars.atom(1) + vars.atom(2);
    vec![
        LatticeEquation::new(g.clone() + vars.atom(1), s.clone()),
        LatticeEquation::new(g.clone() + vars.atom(2), s),
        LatticeEquation::new(g.clone() & vars.atom(1), vars.bot_term()),
        LatticeEquation::new(g.clone() & vars.atom(2), vars.bot_term()),
    ]
}

/// All members of G(L, f), in carrier enumeration order.
pub fn g_elements<L: LatticeCarrier + ?Sized>(
    f: &Frame<L::Elem>,
    l: &L,
    cap: u128,
) -> Result<Vec<L::Elem>> {
    Ok(l.elements(cap)?.into_iter().filter(|g| is_g_member(g, f, l)).collect())
}

/// `([y + ((x + z_23)(z_1 + z_3) + z_12)(z_2 + z_3)](z_1 + z_3) + z_23)(z_1 + z_2)`
pub fn t_term(x: LatticeTerm, y: LatticeTerm, z: &FrameVars) -> LatticeTerm {
    let x13 = (x + z.pair(2, 3)) & (z.atom(1) + z.atom(3));
    let x23 = (x13 + z.pair(1, 2)) & (z.atom(2) + z.atom(3));
    let w = (y + x23) & (z.atom(1) + z.atom(3));
    (w + z.pair(2, 3)) & (z.atom(1) + z.atom(2))
}

/// How the group law of G(L, ā) transports along Γ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `t(Γf, Γg) = Γ(f∘g)`
    Straight,
    /// `t(Γf, Γg) = Γ(g∘f)`
    Opposite,
}

/// Verified by the coordinate-group test suite.
pub const ORIENTATION: Orientation = Orientation::Straight;

fn require<L: LatticeCarrier + ?Sized>(ok: bool, what: &L::Elem, set: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LatticeError::Membership { what: format!("{what:?}"), set })
    }
}

/// The group product of G(L, f), given by [`t_term`].
pub fn mult_t<L: LatticeCarrier + ?Sized>(
    g: &L::Elem,
    h: &L::Elem,
    f: &Frame<L::Elem>,
    l: &L,
) -> Result<L::Elem> {
    require::<L>(is_g_member(g, f, l), g, "G(L, a)")?;
    require::<L>(is_g_member(h, f, l), h, "G(L, a)")?;
    let vars = FrameVars::default();
    let mut asg = f.to_assignment(&vars);
    asg.insert("x".into(), g.clone());
    asg.insert("y".into(), h.clone());
    super::eval_term(&t_term(LatticeTerm::var("x"), LatticeTerm::var("y"), &vars), &asg, l)
}

/// `x ⊕ a_2 = a_1 + a_2`.
pub fn in_r12<L: LatticeCarrier + ?Sized>(x: &L::Elem, f: &Frame<L::Elem>, l: &L) -> bool {
    l.join(x, f.atom(2)) == l.join(f.atom(1), f.atom(2)) && l.meet(x, f.atom(2)) == f.bot
}

/// `x + z_2 = z_1 + z_2`; admissible evaluation also enforces `x ∩ z_2 = 0`.
pub fn r12_membership_equation(x: &LatticeTerm, vars: &FrameVars) -> LatticeEquation {
    LatticeEquation::new(x.clone() + vars.atom(2), vars.atom(1) + vars.atom(2))
}

/// Transport of `x` from index pair (1,2) to (1,3), admissible form.
fn to13(x: LatticeTerm, z: &FrameVars) -> LatticeTerm {
    (x + z.pair(2, 3)) & z.co_atom(2)
}

/// Product term on R12: evaluates to `Γ(fg)` at `Γf, Γg`; admissible on R12.
pub fn term_mult(x: LatticeTerm, y: LatticeTerm, z: &FrameVars) -> LatticeTerm {
    let x23 = (to13(x, z) + z.pair(1, 2)) & z.co_atom(1);
    let w = (y + x23) & z.co_atom(2);
    (w + z.pair(2, 3)) & z.co_atom(3)
}

/// Difference term on R12: `([(s_13 + z_2 + z_4) ∩ (r + z_23)] + z_3 + z_4) ∩ (z_1 + z_2)`.
pub fn term_sub(r: LatticeTerm, s: LatticeTerm, z: &FrameVars) -> LatticeTerm {
    let inner = (to13(s, z) + z.atom(2) + z.atom(4)) & (r + z.pair(2, 3));
    (inner + z.atom(3) + z.atom(4)) & (z.atom(1) + z.atom(2))
}

/// Sum term on R12: `r ⊖ (z_1 ⊖ s)`.
pub fn term_add(r: LatticeTerm, s: LatticeTerm, z: &FrameVars) -> LatticeTerm {
    let neg = term_sub(z.atom(1), s, z);
    term_sub(r, neg, z)
}

fn eval_binary<L: LatticeCarrier + ?Sized>(
    build: fn(LatticeTerm, LatticeTerm, &FrameVars) -> LatticeTerm,
    r: &L::Elem,
    s: &L::Elem,
    f: &Frame<L::Elem>,
    l: &L,
) -> Result<L::Elem> {
    require::<L>(in_r12(r, f, l), r, "R12(L, a)")?;
    require::<L>(in_r12(s, f, l), s, "R12(L, a)")?;
    let vars = FrameVars::default();
    let mut asg = f.to_assignment(&vars);
    asg.insert("x".into(), r.clone());
    asg.insert("y".into(), s.clone());
    super::eval_term(&build(LatticeTerm::var("x"), LatticeTerm::var("y"), &vars), &asg, l)
}

pub fn r12_sub<L: LatticeCarrier + ?Sized>(
    r: &L::Elem,
    s: &L::Elem,
    f: &Frame<L::Elem>,
    l: &L,
) -> Result<L::Elem> {
    eval_binary(term_sub, r, s, f, l)
}

pub fn r12_add<L: LatticeCarrier + ?Sized>(
    r: &L::Elem,
    s: &L::Elem,
    f: &Frame<L::Elem>,
    l: &L,
) -> Result<L::Elem> {
    eval_binary(term_add, r, s, f, l)
}

pub fn r12_mult<L: LatticeCarrier + ?Sized>(
    r: &L::Elem,
    s: &L::Elem,
    f: &Frame<L::Elem>,
    l: &L,
) -> Result<L::Elem> {
    eval_binary(term_mult, r, s, f, l)
}

/// All members of R12(L, f).
pub fn r12_elements<L: LatticeCarrier + ?Sized>(
    f: &Frame<L::Elem>,
    l: &L,
    cap: u128,
) -> Result<Vec<L::Elem>> {
    Ok(l.elements(cap)?.into_iter().filter(|x| in_r12(x, f, l)).collect())
}

/// Frame formula whose admissible satisfaction characterizes frames with
/// `a_⊥ = 0`, `a_⊤ = 1`: `Σ z_ℓ = 1`, `z_i + z_j = z_i + z_ij`, and
/// `(Σ_{ℓ≠j} z_ℓ) ∩ (z_ij + z_jk) = z_ik`.
pub fn admissible_frame_axioms(vars: &FrameVars) -> Vec<LatticeEquation> {
    let mut out = vec![LatticeEquation::new(vars.atom_sum(1..=4), LatticeTerm::Const1)];
    for i in 1..=4 {
        for j in (1..=4).filter(|&j| j != i) {
            out.push(LatticeEquation::new(
                vars.atom(i) + vars.atom(j),
                vars.atom(i) + vars.pair(i, j),
            ));
        }
    }
    for i in 1..=4 {
        for j in (1..=4).filter(|&j| j != i) {
            for k in (1..=4).filter(|&k| k != i && k != j) {
                out.push(LatticeEquation::new(
                    vars.co_atom(j) & (vars.pair(i, j) + vars.pair(j, k)),
                    vars.pair(i, k),
                ));
            }
        }
    }
    out
}

/// `ε: a_1 → a_2` on the basis rows of `a_1`: the `a_2`-component of each
/// basis vector in the decomposition `a_12 ⊕ a_2`.
fn epsilon_rows(f: &Frame<Subspace>) -> Result<Matrix> {
    let a1 = f.atom(1);
    let a2 = f.atom(2);
    let p = a1.field();
    let mut e = Matrix::zeros(p, a1.dim(), a1.ambient_dim());
    for i in 0..a1.dim() {
        let parts = Subspace::decompose(a1.basis().row(i), &[f.pair(1, 2), a2]).ok_or_else(|| {
            LatticeError::Membership { what: "a_1".into(), set: "a_12 ⊕ a_2" }
        })?;
        let comp = Matrix::from_data(p, 1, a2.dim(), parts[1].clone())?.mul(a2.basis())?;
        for c in 0..a1.ambient_dim() {
            e.set(i, c, comp.get(0, c));
        }
    }
    Ok(e)
}

/// `Γ(f) = {v − ε(f v) : v ∈ a_1}`; `fmap` acts on coordinates with respect
/// to the reduced basis of `a_1`, on column vectors.
pub fn gamma(fmap: &Matrix, f: &Frame<Subspace>) -> Result<Subspace> {
    let a1 = f.atom(1);
    let d = a1.dim();
    if fmap.rows() != d || fmap.cols() != d {
        return Err(LatticeError::BlockSize { expected: d, got: fmap.rows().max(fmap.cols()) });
    }
    let e = epsilon_rows(f)?;
    let r = a1.basis().sub(&fmap.transpose().mul(&e)?)?;
    Ok(Subspace::row_space(&r))
}

/// Inverse of [`gamma`] on R12.
pub fn gamma_inv(g: &Subspace, f: &Frame<Subspace>) -> Result<Matrix> {
    let a1 = f.atom(1);
    let a2 = f.atom(2);
    let l = SubspaceLattice::new(a1.field(), a1.ambient_dim());
    if !l.contains(g) || !in_r12(g, f, &l) {
        return Err(LatticeError::Membership { what: format!("{g:?}"), set: "R12(L, a)" });
    }
    let p = a1.field();
    let d = a1.dim();
    let e = epsilon_rows(f)?;
    let mut m = Matrix::zeros(p, d, d);
    for i in 0..d {
        let parts = Subspace::decompose(a1.basis().row(i), &[g, a2]).ok_or_else(|| {
            LatticeError::Membership { what: "a_1".into(), set: "g ⊕ a_2" }
        })?;
        // b_i = x + y with x ∈ g, y ∈ a_2, and y = ε(f b_i)
        let y = Matrix::from_data(p, 1, a2.dim(), parts[1].clone())?.mul(a2.basis())?;
        let coords = e
            .transpose()
            .solve(&y.transpose())?
            .expect("ε maps a basis of a_1 onto a basis of a_2");
        for k in 0..d {
            m.set(k, i, coords.get(k, 0));
        }
    }
    Ok(m)
}

/// `a_12 ∩ ⋂ g_i = a_⊥`, for members `g_i` of G(L, f).
pub fn fpf_criterion<L: LatticeCarrier + ?Sized>(
    gs: &[L::Elem],
    f: &Frame<L::Elem>,
    l: &L,
) -> Result<bool> {
    let mut acc = f.pair(1, 2).clone();
    for g in gs {
        require::<L>(is_g_member(g, f, l), g, "G(L, a)")?;
        acc = l.meet(&acc, g);
    }
    Ok(acc == f.bot)
}

/// Direct index-level frame check on a table lattice; agrees with
/// [`check_frame`] being empty.
pub(crate) fn frame_holds_table(l: &TableLattice, f: &Frame<usize>) -> bool {
    let j = |a: usize, b: usize| l.join_idx(a, b);
    let m = |a: usize, b: usize| l.meet_idx(a, b);
    let sum = |mask: u8| {
        (1..=4usize)
            .filter(|i| mask & (1 << (i - 1)) != 0)
            .map(|i| f.atoms[i - 1])
            .reduce(j)
            .unwrap_or(f.bot)
    };
    let sums: Vec<usize> = (0u8..16).map(sum).collect();
    for a in 0..16 {
        for b in 0..16 {
            if m(sums[a], sums[b]) != sums[a & b] {
                return false;
            }
        }
    }
    if f.top != sums[15] {
        return false;
    }
    for i in 1..=4 {
        for k in (1..=4).filter(|&k| k != i) {
            let (ai, aik) = (*f.atom(i), *f.pair(i, k));
            if j(ai, *f.atom(k)) != j(ai, aik) || m(ai, aik) != f.bot {
                return false;
            }
            for jj in (1..=4).filter(|&x| x != i && x != k) {
                let rhs = m(j(ai, *f.atom(k)), j(*f.pair(i, jj), *f.pair(jj, k)));
                if aik != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// Enumerates 4-frames of a table lattice.
///
/// `a_1` ranges over `a1_choices` (all elements if `None`); with
/// `fix_bounds` the frame must have `a_⊥ = 0` and `a_⊤ = 1`. Each `a_1j`
/// ranges over the common complements of `a_1`, `a_j` below `a_1 + a_j`, and
/// `a_kj` is forced by the transposition axiom. With `verify` only tuples
/// satisfying every frame axiom are visited; otherwise the visitor receives
/// all tuples built this way and must check the remaining axioms itself.
pub fn enumerate_frames(
    l: &TableLattice,
    a1_choices: Option<&[usize]>,
    fix_bounds: bool,
    verify: bool,
    visit: &mut dyn FnMut(&Frame<usize>) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let n = l.len();
    let all: Vec<usize> = (0..n).collect();
    let a1s = a1_choices.unwrap_or(&all);
    let bots: Vec<usize> = if fix_bounds { vec![l.bottom_idx()] } else { all.clone() };
    for &bot in &bots {
        for &a1 in a1s {
            if !l.leq_idx(bot, a1) {
                continue;
            }
            // common complements of a1 and x inside [bot, a1 + x], per x
            let mut g1: Vec<Option<Vec<usize>>> = vec![None; n];
            let mut g1_of = |x: usize| -> Vec<usize> {
                if g1[x].is_none() {
                    let s = l.join_idx(a1, x);
                    let list = (0..n)
                        .filter(|&g| {
                            l.join_idx(g, a1) == s
                                && l.join_idx(g, x) == s
                                && l.meet_idx(g, a1) == bot
                                && l.meet_idx(g, x) == bot
                        })
                        .collect();
                    g1[x] = Some(list);
                }
                g1[x].clone().unwrap()
            };
            for a2 in 0..n {
                if l.meet_idx(a1, a2) != bot {
                    continue;
                }
                let g12 = g1_of(a2);
                if g12.is_empty() {
                    continue;
                }
                let s2 = l.join_idx(a1, a2);
                for a3 in 0..n {
                    if l.meet_idx(s2, a3) != bot {
                        continue;
                    }
                    let g13 = g1_of(a3);
                    if g13.is_empty() {
                        continue;
                    }
                    let s3 = l.join_idx(s2, a3);
                    for a4 in 0..n {
                        if l.meet_idx(s3, a4) != bot {
                            continue;
                        }
                        let top = l.join_idx(s3, a4);
                        if fix_bounds && top != l.top_idx() {
                            continue;
                        }
                        let g14 = g1_of(a4);
                        for &a12 in &g12 {
                            for &a13 in &g13 {
                                for &a14 in &g14 {
                                    let atoms = [a1, a2, a3, a4];
                                    let kj = |k: usize, jj: usize, ak1: usize, a1j: usize| {
                                        l.meet_idx(
                                            l.join_idx(atoms[k - 1], atoms[jj - 1]),
                                            l.join_idx(ak1, a1j),
                                        )
                                    };
                                    let a23 = kj(2, 3, a12, a13);
                                    let a24 = kj(2, 4, a12, a14);
                                    let a34 = kj(3, 4, a13, a14);
                                    let frame = Frame {
                                        atoms,
                                        pairs: [a12, a13, a14, a23, a24, a34],
                                        bot,
                                        top,
                                    };
                                    if verify && !frame_holds_table(l, &frame) {
                                        continue;
                                    }
                                    visit(&frame)?;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    ControlFlow::Continue(())
}
