//! Satisfiability-preserving translations between the constraint languages,
//! the JSON artifact envelope, and the constructive witness chain for group
//! presentations with a finite permutation model.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::database::{self, Database, DbError, Dependency, DependencySet};
use crate::ffmat::{FfError, FieldPrime, Matrix, Subspace};
use crate::formulas::{unnest, BasicEq, FreshNames, PPFormula};
use crate::groups::{self, FiniteGroup, GroupError, GroupOps, GroupPresentation, GroupWord, SymmetricGroup};
use crate::lattice::{
    self, admissible_frame_axioms, admissible_holds, build_frame, frame_axioms, g_membership_equations,
    gamma, r12_membership_equation, t_term, term_add, term_mult, term_sub, Assignment, FrameVars,
    LatticeCarrier, LatticeConjunction, LatticeEquation, LatticeError, LatticeTerm, SubspaceLattice,
};
use crate::matring::{RingEquation, RingPoly, RingSystem};
use crate::relalg::{build_tau, eta, tau_values, RelError, Relation, Type1Conjunct, Type1Formula};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("composition `{0}` needs three distinct variables")]
    Precondition(String),
    #[error("no permutation model of degree <= {0} with a nontrivial generator")]
    NoPermutationModel(usize),
    #[error("no prime below {0} is coprime to the group order {1}")]
    NoPrime(u32, usize),
    #[error("witness failed validation at stage {stage}: {detail}")]
    WitnessRejected { stage: Stage, detail: String },
    #[error("payload does not match stage {stage}: {source}")]
    Payload { stage: Stage, source: serde_json::Error },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Relation(#[from] RelError),
    #[error(transparent)]
    Database(#[from] DbError),
    #[error(transparent)]
    Field(#[from] FfError),
}

pub type Result<T> = std::result::Result<T, ReductionError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Group,
    Lattice,
    Ring,
    Relalg,
    Deps,
    Gc,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Group, Stage::Lattice, Stage::Ring, Stage::Relalg, Stage::Deps, Stage::Gc];

    /// The edges of the pipeline.
    pub const EDGES: [(Stage, Stage); 5] = [
        (Stage::Group, Stage::Lattice),
        (Stage::Lattice, Stage::Ring),
        (Stage::Lattice, Stage::Relalg),
        (Stage::Relalg, Stage::Deps),
        (Stage::Ring, Stage::Gc),
    ];

    pub fn is_edge(from: Stage, to: Stage) -> bool {
        Stage::EDGES.contains(&(from, to))
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Group => "group",
            Stage::Lattice => "lattice",
            Stage::Ring => "ring",
            Stage::Relalg => "relalg",
            Stage::Deps => "deps",
            Stage::Gc => "gc",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// What a satisfying assignment must additionally fulfil at each stage.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Nontriviality {
    None,
    /// Some watched lattice variable (all if `watch` is empty) is not 0.
    SomeNonBottom { watch: Vec<String> },
    /// The two named variables take different values.
    BoundsDistinct { bot: String, top: String },
    /// Some watched ring variable (all if `watch` is empty) is not 0.
    SomeNonzero { watch: Vec<String> },
    /// The named relation is not Δ.
    NotDelta { var: String },
    NotAlmostTrivial,
}

/// One reduction step applied to reach an artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub transform: String,
    pub source_hash: String,
    pub fresh: Vec<String>,
}

/// `{"stage", "formula", "provenance"}` envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineArtifact {
    pub stage: Stage,
    pub formula: serde_json::Value,
    pub provenance: Vec<Provenance>,
}

impl PipelineArtifact {
    pub fn new<T: Serialize>(stage: Stage, formula: &T, provenance: Vec<Provenance>) -> Self {
        PipelineArtifact {
            stage,
            formula: serde_json::to_value(formula).expect("formula serializes"),
            provenance,
        }
    }

    pub fn payload<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.formula.clone())
            .map_err(|source| ReductionError::Payload { stage: self.stage, source })
    }

    /// SHA-256 of the compact JSON of the formula.
    pub fn hash(&self) -> String {
        content_hash(&self.formula)
    }

    /// Applies `transform` and records it in the provenance chain.
    pub fn derive<T: Serialize>(&self, stage: Stage, transform: &str, formula: &T, fresh: Vec<String>) -> Self {
        let mut provenance = self.provenance.clone();
        provenance.push(Provenance { transform: transform.into(), source_hash: self.hash(), fresh });
        PipelineArtifact::new(stage, formula, provenance)
    }
}

pub fn content_hash<T: Serialize + ?Sized>(x: &T) -> String {
    let bytes = serde_json::to_vec(x).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}

/// Lattice-stage payload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeFormula {
    pub conjunction: LatticeConjunction,
    #[serde(default)]
    pub frame_vars: Option<FrameVars>,
    #[serde(default)]
    pub generators: Vec<String>,
    #[serde(default)]
    pub inverse_witnesses: Vec<(String, String)>,
    /// Variables fixed by an equation `v = term`, in dependency order.
    #[serde(default)]
    pub definitions: Vec<(String, LatticeTerm)>,
    pub nontriviality: Nontriviality,
}

impl LatticeFormula {
    pub fn plain(conjunction: LatticeConjunction) -> Self {
        LatticeFormula {
            conjunction,
            frame_vars: None,
            generators: Vec::new(),
            inverse_witnesses: Vec::new(),
            definitions: Vec::new(),
            nontriviality: Nontriviality::SomeNonBottom { watch: Vec::new() },
        }
    }

    /// Fills the defined variables of a partial assignment.
    pub fn complete<L: LatticeCarrier + ?Sized>(&self, asg: &Assignment<L::Elem>, l: &L) -> Result<Assignment<L::Elem>> {
        let mut out = asg.clone();
        for (v, t) in &self.definitions {
            if !out.contains_key(v) {
                let val = lattice::eval_term(t, &out, l)?;
                out.insert(v.clone(), val);
            }
        }
        Ok(out)
    }

    /// Indices of failing equations, and whether the nontriviality check holds.
    pub fn check<L: LatticeCarrier + ?Sized>(&self, asg: &Assignment<L::Elem>, l: &L) -> Result<(Vec<usize>, bool)> {
        let failing = lattice::failing_equations(&self.conjunction, asg, l)?;
        Ok((failing, lattice_nontrivial(&self.nontriviality, asg, l)))
    }
}

/// Evaluates a lattice-stage nontriviality condition.
pub fn lattice_nontrivial<L: LatticeCarrier + ?Sized>(n: &Nontriviality, asg: &Assignment<L::Elem>, l: &L) -> bool {
    match n {
        Nontriviality::None => true,
        Nontriviality::SomeNonBottom { watch } => {
            let bot = l.bottom();
            if watch.is_empty() {
                asg.values().any(|v| *v != bot)
            } else {
                watch.iter().any(|w| asg.get(w).is_some_and(|v| *v != bot))
            }
        }
        Nontriviality::BoundsDistinct { bot, top } => match (asg.get(bot), asg.get(top)) {
            (Some(a), Some(b)) => a != b,
            _ => false,
        },
        _ => false,
    }
}

fn frame_vars_avoiding(names: &[String]) -> FrameVars {
    let mut prefix = "z".to_string();
    loop {
        let fv = FrameVars::with_prefix(&prefix);
        if fv.names().iter().all(|n| !names.contains(n)) {
            return fv;
        }
        prefix.push('z');
    }
}

/// The lattice translation π# of a group presentation.
pub fn group_to_lattice(pres: &GroupPresentation) -> (LatticeFormula, Vec<String>) {
    let z = frame_vars_avoiding(&pres.generators);
    let mut fresh = FreshNames::new(pres.generators.iter().chain(z.names().iter()));
    let mut conj = LatticeConjunction::default();
    for (_, eq) in frame_axioms(&z) {
        conj.equations.push(eq);
    }
    conj.push(z.bot_term(), LatticeTerm::Const0);
    conj.push(z.top_term(), LatticeTerm::Const1);
    for g in &pres.generators {
        conj.equations.extend(g_membership_equations(&LatticeTerm::var(g), &z));
    }
    let mut inverses: Vec<(String, String)> = Vec::new();
    for g in &pres.generators {
        let negative = pres
            .relations
            .iter()
            .flat_map(|r| r.lhs.factors().iter().chain(r.rhs.factors()))
            .any(|(h, e)| h == g && *e < 0);
        if negative {
            let y = fresh.next();
            conj.equations.extend(g_membership_equations(&LatticeTerm::var(&y), &z));
            let (gt, yt) = (LatticeTerm::var(g), LatticeTerm::var(&y));
            conj.push(t_term(gt.clone(), yt.clone(), &z), z.pair(1, 2));
            conj.push(t_term(yt, gt, &z), z.pair(1, 2));
            inverses.push((g.clone(), y));
        }
    }
    let mut definitions = Vec::new();
    let mut encode = |w: &GroupWord, conj: &mut LatticeConjunction| -> LatticeTerm {
        let mut letters = Vec::new();
        for (g, e) in w.factors() {
            let letter = if *e > 0 {
                g.clone()
            } else {
                inverses.iter().find(|(x, _)| x == g).map(|(_, y)| y.clone()).expect("witness exists")
            };
            letters.extend(std::iter::repeat_n(letter, e.unsigned_abs() as usize));
        }
        let mut it = letters.into_iter();
        let Some(first) = it.next() else {
            return z.pair(1, 2);
        };
        let mut acc = LatticeTerm::var(first);
        for next in it {
            let v = fresh.next();
            let t = t_term(acc, LatticeTerm::var(next), &z);
            conj.push(LatticeTerm::var(&v), t.clone());
            definitions.push((v.clone(), t));
            acc = LatticeTerm::var(v);
        }
        acc
    };
    for r in &pres.relations {
        let lhs = encode(&r.lhs, &mut conj);
        let rhs = encode(&r.rhs, &mut conj);
        conj.push(lhs, rhs);
    }
    let fpf = LatticeTerm::meet_all(
        std::iter::once(z.pair(1, 2)).chain(pres.generators.iter().map(LatticeTerm::var)),
        LatticeTerm::Const1,
    );
    conj.push(fpf, z.bot_term());
    let nontriviality = Nontriviality::BoundsDistinct { bot: z.bot.clone(), top: z.top.clone() };
    let lf = LatticeFormula {
        conjunction: conj,
        frame_vars: Some(z),
        generators: pres.generators.clone(),
        inverse_witnesses: inverses,
        definitions,
        nontriviality,
    };
    (lf, fresh.issued().to_vec())
}

/// Ring system over idempotent variables equivalent (on End(V)) to a
/// lattice conjunction.
pub fn lattice_to_ring(conj: &LatticeConjunction) -> (RingSystem, Vec<String>) {
    let mut fresh = FreshNames::new(conj.vars());
    let pp = unnest(conj, &mut fresh);
    let mut idem: Vec<String> = pp.free.clone();
    idem.extend(pp.bound.iter().cloned());
    let v = |n: &str| RingPoly::var(n);
    let mut eqs = Vec::new();
    for c in &pp.conjuncts {
        match c {
            BasicEq::Copy { y, x } => eqs.push(RingEquation::new(v(y), v(x))),
            BasicEq::Zero { y } => eqs.push(RingEquation::new(v(y), RingPoly::int(0))),
            BasicEq::One { y } => eqs.push(RingEquation::new(v(y), RingPoly::int(1))),
            BasicEq::Join { y, x, w } => {
                let (r, s) = (fresh.next(), fresh.next());
                eqs.push(RingEquation::new(v(y) * v(x), v(x)));
                eqs.push(RingEquation::new(v(y) * v(w), v(w)));
                eqs.push(RingEquation::new(v(y), v(x) * v(&r) + v(w) * v(&s)));
            }
            BasicEq::Meet { y, x, w } => {
                let (r, s) = (fresh.next(), fresh.next());
                let a = v(w) - v(x) * v(w);
                let h = v(w) - v(w) * v(&r) * a.clone();
                eqs.push(RingEquation::new(a.clone() * v(&r) * a.clone(), a));
                eqs.push(RingEquation::new(v(y) * h.clone(), h.clone()));
                eqs.push(RingEquation::new(v(y), h * v(&s)));
            }
        }
    }
    (RingSystem::new(eqs, idem), fresh.issued().to_vec())
}

/// Relation-algebra payload: ψ plus the side components of ψ^∃.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelalgFormula {
    pub psi: Type1Formula,
    /// ȳ: the relation variables ranging over Eq, intersecting to Δ.
    pub vars: Vec<String>,
    pub tau: Type1Formula,
    pub tau_vars: Vec<String>,
    /// The product of all of ȳ; required to differ from Δ.
    pub unit: String,
    pub require_nabla: bool,
    pub unnested: PPFormula,
}

impl RelalgFormula {
    /// Values for copies, τ chain and unit from values of the lattice
    /// variables (free and bound in `unnested`).
    pub fn complete(&self, base: &BTreeMap<String, Relation>) -> Result<BTreeMap<String, Relation>> {
        let mut out = base.clone();
        for c in &self.psi.conjuncts {
            if let Type1Conjunct::Equal { u, v } = c {
                if !out.contains_key(u) && *u != self.unit {
                    if let Some(val) = out.get(v).cloned() {
                        out.insert(u.clone(), val);
                    }
                }
            }
        }
        let ys: Vec<Relation> = self
            .vars
            .iter()
            .map(|y| out.get(y).cloned().ok_or_else(|| RelError::Unbound(y.clone())))
            .collect::<std::result::Result<_, _>>()?;
        let chain = tau_values(&ys)?;
        for (v, val) in self.tau_vars.iter().zip(&chain) {
            out.insert(v.clone(), val.clone());
        }
        if let Some(last) = chain.last() {
            out.insert(self.unit.clone(), last.clone());
        }
        Ok(out)
    }

    /// Names of the violated components of ψ^∃ (empty when it holds).
    pub fn violations(&self, asg: &BTreeMap<String, Relation>) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let get = |x: &str| asg.get(x).ok_or_else(|| RelError::Unbound(x.to_string()));
        let mut meet: Option<Relation> = None;
        for y in &self.vars {
            let r = get(y)?;
            if !r.in_eq() {
                out.push(format!("Eq({y})"));
            }
            meet = Some(match meet {
                None => r.clone(),
                Some(m) => m.intersect(r)?,
            });
        }
        if let Some(m) = meet {
            if m != Relation::delta(m.size()) {
                out.push("⋂ ȳ = Δ".into());
            }
        }
        for i in self.psi.failing(asg)? {
            out.push(format!("ψ: {}", self.psi.conjuncts[i]));
        }
        for i in self.tau.failing(asg)? {
            out.push(format!("τ: {}", self.tau.conjuncts[i]));
        }
        let u = get(&self.unit)?;
        if *u == Relation::delta(u.size()) {
            out.push(format!("{} ≠ Δ", self.unit));
        }
        if self.require_nabla && *u != Relation::full(u.size()) {
            out.push(format!("{} = ∇", self.unit));
        }
        Ok(out)
    }
}

/// Unnests, then `y = x + w` becomes `y = x∘w ∧ y = w∘x`, `y = x∩w` stays,
/// `y = 0` becomes `y = Δ` and `y = 1` becomes `y = u` for the product `u`
/// of all variables.
pub fn lattice_to_relalg(conj: &LatticeConjunction, require_nabla: bool) -> (RelalgFormula, Vec<String>) {
    let mut fresh = FreshNames::new(conj.vars());
    let pp = unnest(conj, &mut fresh);
    let unit = fresh.next();
    let mut vars: Vec<String> = pp.free.clone();
    vars.extend(pp.bound.iter().cloned());
    let mut psi = Vec::new();
    for c in &pp.conjuncts {
        match c {
            BasicEq::Copy { y, x } => psi.push(Type1Conjunct::Equal { u: y.clone(), v: x.clone() }),
            BasicEq::Zero { y } => psi.push(Type1Conjunct::Delta { u: y.clone() }),
            BasicEq::One { y } => psi.push(Type1Conjunct::Equal { u: y.clone(), v: unit.clone() }),
            BasicEq::Meet { y, x, w } => psi.push(Type1Conjunct::Meet { u: y.clone(), v: x.clone(), w: w.clone() }),
            BasicEq::Join { y, x, w } => {
                // keep the three composition variables distinct
                let mut copy = |src: &String, psi: &mut Vec<Type1Conjunct>, vars: &mut Vec<String>| {
                    let c = fresh.next();
                    psi.push(Type1Conjunct::Equal { u: c.clone(), v: src.clone() });
                    vars.push(c.clone());
                    c
                };
                let x2 = if x == y { copy(x, &mut psi, &mut vars) } else { x.clone() };
                let w2 = if w == y || w == &x2 { copy(w, &mut psi, &mut vars) } else { w.clone() };
                psi.push(Type1Conjunct::Compose { u: y.clone(), v: x2.clone(), w: w2.clone() });
                psi.push(Type1Conjunct::Compose { u: y.clone(), v: w2, w: x2 });
            }
        }
    }
    let (tau, tau_vars) = build_tau(&unit, &vars, &mut fresh);
    let rf = RelalgFormula {
        psi: Type1Formula::new(psi),
        vars,
        tau,
        tau_vars,
        unit,
        require_nabla,
        unnested: pp,
    };
    (rf, fresh.issued().to_vec())
}

/// Dependency-stage payload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepsFormula {
    pub attrs: Vec<String>,
    pub deps: DependencySet,
}

impl DepsFormula {
    /// Failing dependency indices, and whether the database is not almost trivial.
    pub fn check(&self, d: &Database) -> (Vec<usize>, bool) {
        (self.deps.failing(d), !database::almost_trivial(d))
    }
}

/// Dependencies over the relation variables: a database satisfies them and
/// is not almost trivial iff ψ^∃ has a model.
pub fn type1_to_deps(rf: &RelalgFormula) -> Result<DepsFormula> {
    let mut attrs: Vec<String> = rf.vars.clone();
    for v in rf.tau_vars.iter().chain(std::iter::once(&rf.unit)) {
        if !attrs.contains(v) {
            attrs.push(v.clone());
        }
    }
    for c in rf.psi.conjuncts.iter().chain(&rf.tau.conjuncts) {
        for v in c.vars() {
            if !attrs.iter().any(|a| a == v) {
                attrs.push(v.to_string());
            }
        }
    }
    let mut deps = Vec::new();
    for c in rf.psi.conjuncts.iter().chain(&rf.tau.conjuncts) {
        match c {
            Type1Conjunct::Equal { u, v } => {
                deps.push(Dependency::fd(&[u], &[v]));
                deps.push(Dependency::fd(&[v], &[u]));
            }
            Type1Conjunct::Meet { u, v, w } => {
                deps.push(Dependency::fd(&[v, w], &[u]));
                deps.push(Dependency::fd(&[u], &[v, w]));
            }
            Type1Conjunct::Compose { u, v, w } => {
                if u == v || u == w || v == w {
                    return Err(ReductionError::Precondition(c.to_string()));
                }
                deps.push(Dependency::emvd(&[v, u], &[w, u]));
                deps.push(Dependency::fd(&[v], &[u]));
                deps.push(Dependency::fd(&[w], &[u]));
            }
            Type1Conjunct::Delta { u } => deps.push(Dependency::fd(std::slice::from_ref(u), &attrs)),
        }
    }
    deps.push(Dependency::fd(&rf.vars, &attrs));
    if rf.require_nabla {
        let rest: Vec<String> = attrs.iter().filter(|a| **a != rf.unit).cloned().collect();
        deps.push(Dependency::emvd(std::slice::from_ref(&rf.unit), &rest));
        deps.push(Dependency::fd(&rest, std::slice::from_ref(&rf.unit)));
    }
    Ok(DepsFormula { attrs, deps: DependencySet::new(deps) })
}

/// Grassmann-Cayley payload: equations to be satisfied admissibly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcFormula {
    pub frame_vars: FrameVars,
    pub ring_vars: Vec<String>,
    pub equations: Vec<LatticeEquation>,
}

impl GcFormula {
    /// Indices of equations that do not hold admissibly.
    pub fn failing<L: LatticeCarrier + ?Sized>(&self, asg: &Assignment<L::Elem>, l: &L) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, eq) in self.equations.iter().enumerate() {
            if !admissible_holds(eq, asg, l)? {
                out.push(i);
            }
        }
        Ok(out)
    }
}

fn gc_term(p: &RingPoly, z: &FrameVars) -> LatticeTerm {
    match p {
        RingPoly::Var { name } => LatticeTerm::var(name),
        RingPoly::Int { value } => {
            let mut t = z.atom(1);
            for _ in 0..value.unsigned_abs() {
                t = term_add(t, z.pair(1, 2), z);
            }
            if *value < 0 {
                t = term_sub(z.atom(1), t, z);
            }
            if *value == 1 {
                t = z.pair(1, 2);
            }
            t
        }
        RingPoly::Add { left, right } => term_add(gc_term(left, z), gc_term(right, z), z),
        RingPoly::Sub { left, right } => term_sub(gc_term(left, z), gc_term(right, z), z),
        RingPoly::Mul { left, right } => term_mult(gc_term(left, z), gc_term(right, z), z),
    }
}

/// Each ring equation `p = q` becomes `T(p − q) = z_1` with ring operations
/// replaced by the coordinate-ring terms, after the admissible frame axioms
/// and R12 membership of every ring variable.
pub fn ring_to_gc(sys: &RingSystem) -> GcFormula {
    let z = frame_vars_avoiding(&sys.variables);
    let mut equations = admissible_frame_axioms(&z);
    for v in &sys.variables {
        equations.push(r12_membership_equation(&LatticeTerm::var(v), &z));
    }
    for eq in sys.explicit_equations() {
        let diff = RingPoly::sub(eq.lhs.clone(), eq.rhs.clone());
        equations.push(LatticeEquation::new(gc_term(&diff, &z), z.atom(1)));
    }
    GcFormula { frame_vars: z, ring_vars: sys.variables.clone(), equations }
}

/// Witnesses and artifacts of the constructive chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstructiveRun {
    pub p: FieldPrime,
    pub d: usize,
    pub degree: usize,
    pub group_order: usize,
    pub artifacts: Vec<PipelineArtifact>,
    /// Values of every lattice variable (including unnesting variables).
    pub lattice_witness: BTreeMap<String, Subspace>,
    pub database: Database,
}

fn smallest_prime_coprime(order: usize, bound: u32) -> Option<FieldPrime> {
    (2..bound).filter_map(|p| FieldPrime::new(p).ok()).find(|p| order % p.get() as usize != 0)
}

/// Group → lattice → relation algebra → dependencies, with a witness built at
/// every stage and validated by that stage's evaluator.
pub fn constructive_pipeline(pres: &GroupPresentation, n_max: usize) -> Result<ConstructiveRun> {
    let sn = groups::search_sn(pres, n_max)?.ok_or(ReductionError::NoPermutationModel(n_max))?;
    let sym = SymmetricGroup { n: sn.n };
    let gens: Vec<_> = pres.generators.iter().map(|g| sn.assignment[g].clone()).collect();
    let (group, elems) = FiniteGroup::generated_by("model", &sym, &gens);
    let index = |x: &groups::Perm| elems.iter().position(|e| e == x).expect("generated element");
    let p = smallest_prime_coprime(group.order(), 100).ok_or(ReductionError::NoPrime(100, group.order()))?;
    let rep = groups::rep_lemma_gp(&group, p)?;
    let d = rep[0].rows();
    let (l, frame) = build_frame(p, d)?;

    let group_art = PipelineArtifact::new(Stage::Group, pres, Vec::new());
    let (lf, fresh) = group_to_lattice(pres);
    let lat_art = group_art.derive(Stage::Lattice, "group_to_lattice", &lf, fresh);
    let z = lf.frame_vars.clone().expect("frame variables");

    let mut asg = frame.to_assignment(&z);
    for (g, perm) in pres.generators.iter().zip(&gens) {
        asg.insert(g.clone(), gamma(&rep[index(perm)], &frame)?);
    }
    for (g, y) in &lf.inverse_witnesses {
        let inv = group.inv(&index(&sn.assignment[g]));
        asg.insert(y.clone(), gamma(&rep[inv], &frame)?);
    }
    let asg = lf.complete(&asg, &l)?;
    let (failing, nontrivial) = lf.check(&asg, &l)?;
    if !failing.is_empty() || !nontrivial {
        return Err(ReductionError::WitnessRejected {
            stage: Stage::Lattice,
            detail: match failing.first() {
                Some(&i) => format!("equation {i}: {}", lf.conjunction.equations[i]),
                None => "z_⊥ = z_⊤".into(),
            },
        });
    }

    let (rf, fresh) = lattice_to_relalg(&lf.conjunction, false);
    let rel_art = lat_art.derive(Stage::Relalg, "lattice_to_relalg", &rf, fresh);
    let full = rf.unnested.complete(&asg, &l)?;
    let mut rels = BTreeMap::new();
    for (k, v) in &full {
        rels.insert(k.clone(), eta(v)?);
    }
    let rels = rf.complete(&rels)?;
    let bad = rf.violations(&rels)?;
    if let Some(first) = bad.first() {
        return Err(ReductionError::WitnessRejected { stage: Stage::Relalg, detail: first.clone() });
    }

    let df = type1_to_deps(&rf)?;
    let dep_art = rel_art.derive(Stage::Deps, "type1_to_deps", &df, Vec::new());
    let eta_list: Vec<(String, Relation)> = df.attrs.iter().map(|a| (a.clone(), rels[a].clone())).collect();
    let db = database::build_dae(&eta_list)?;
    let (failing, nontrivial) = df.check(&db);
    if !failing.is_empty() || !nontrivial {
        return Err(ReductionError::WitnessRejected {
            stage: Stage::Deps,
            detail: match failing.first() {
                Some(&i) => format!("dependency {}", df.deps.deps[i]),
                None => "database is almost trivial".into(),
            },
        });
    }
    Ok(ConstructiveRun {
        p,
        d,
        degree: sn.n,
        group_order: group.order(),
        artifacts: vec![group_art, lat_art, rel_art, dep_art],
        lattice_witness: full,
        database: db,
    })
}

/// Matrix assignment for `lattice_to_ring(conj)` from a subspace assignment of the
/// lattice variables: each variable maps to the projection onto its value
/// along the standard complement, and the existential `(r, s)` of every
/// join/meet block is solved for.
pub fn ring_witness_from_lattice(
    conj: &LatticeConjunction,
    asg: &Assignment<Subspace>,
    l: &SubspaceLattice,
) -> Result<BTreeMap<String, Matrix>> {
    use crate::matring::projection;
    // replay the name issue order of lattice_to_ring
    let mut fresh = FreshNames::new(conj.vars());
    let pp = unnest(conj, &mut fresh);
    let full = pp.complete(asg, l)?;
    let mut out: BTreeMap<String, Matrix> = BTreeMap::new();
    for (k, v) in &full {
        out.insert(k.clone(), projection(v, &v.standard_complement()).map_err(ring_err)?);
    }
    for c in &pp.conjuncts {
        let (y, x, w, join) = match c {
            BasicEq::Join { y, x, w } => (y, x, w, true),
            BasicEq::Meet { y, x, w } => (y, x, w, false),
            _ => continue,
        };
        let (r, s) = (fresh.next(), fresh.next());
        let (e, f, g) = (&out[x], &out[w], &out[y]);
        let d = e.rows();
        let unsolvable = || ReductionError::WitnessRejected { stage: Stage::Ring, detail: c.to_string() };
        let (rv, sv) = if join {
            let x = e.hstack(f)?.solve(g)?.ok_or_else(unsolvable)?;
            (x.row_block(0, d), x.row_block(d, 2 * d))
        } else {
            let a = f.sub(&e.mul(f)?)?;
            let rv = a.quasi_inverse()?;
            let h = f.sub(&f.mul(&rv)?.mul(&a)?)?;
            (rv, h.solve(g)?.ok_or_else(unsolvable)?)
        };
        out.insert(r, rv);
        out.insert(s, sv);
    }
    Ok(out)
}

fn ring_err(e: crate::matring::RingError) -> ReductionError {
    ReductionError::WitnessRejected { stage: Stage::Ring, detail: e.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse_group_presentation;

    #[test]
    fn stage_edges() {
        assert!(Stage::is_edge(Stage::Group, Stage::Lattice));
        assert!(!Stage::is_edge(Stage::Group, Stage::Deps));
        assert_eq!("relalg".parse::<Stage>().unwrap(), Stage::Relalg);
    }

    #[test]
    fn pi_sharp_inventory() {
        let pres = parse_group_presentation("gens x; rel x^3 = 1").unwrap();
        let (lf, fresh) = group_to_lattice(&pres);
        // 305 frame axioms, 2 bounds, 4 membership, 2 chain steps, relation, fpf
        assert_eq!(lf.conjunction.len(), 305 + 2 + 4 + 2 + 1 + 1);
        assert_eq!(fresh, vec!["_g0", "_g1"]);
        assert!(lf.inverse_witnesses.is_empty());
        let inv = parse_group_presentation("gens x; rel x^-1 = x").unwrap();
        let (lf, _) = group_to_lattice(&inv);
        assert_eq!(lf.inverse_witnesses.len(), 1);
        let clash = parse_group_presentation("gens z1").unwrap();
        let (lf, _) = group_to_lattice(&clash);
        assert_eq!(lf.frame_vars.unwrap().atoms[0], "zz1");
    }

    #[test]
    fn relalg_translation_of_join() {
        let conj: LatticeConjunction = "x = y + z".parse().unwrap();
        let (rf, _) = lattice_to_relalg(&conj, false);
        let c = |u: &str, v: &str, w: &str| Type1Conjunct::Compose { u: u.into(), v: v.into(), w: w.into() };
        assert_eq!(rf.psi.conjuncts, vec![c("x", "y", "z"), c("x", "z", "y")]);
        let df = type1_to_deps(&rf).unwrap();
        assert!(df.deps.deps.contains(&Dependency::emvd(&["y", "x"], &["z", "x"])));
        let dup: LatticeConjunction = "x = x + y".parse().unwrap();
        let (rf, _) = lattice_to_relalg(&dup, false);
        assert!(type1_to_deps(&rf).is_ok());
    }

    #[test]
    fn ring_translation_shapes() {
        let conj: LatticeConjunction = "x = 1".parse().unwrap();
        let (sys, _) = lattice_to_ring(&conj);
        assert_eq!(sys.idempotent_vars, vec!["x"]);
        assert_eq!(sys.equations[0].to_string(), "x = 1");
        let gc = ring_to_gc(&"idem ; x - x = 0".parse().unwrap());
        assert_eq!(gc.equations.len(), admissible_frame_axioms(&gc.frame_vars).len() + 2);
    }

    #[test]
    fn artifact_provenance() {
        let pres = parse_group_presentation("gens x; rel x^2 = x").unwrap();
        let a = PipelineArtifact::new(Stage::Group, &pres, Vec::new());
        let (lf, fresh) = group_to_lattice(&pres);
        let b = a.derive(Stage::Lattice, "group_to_lattice", &lf, fresh.clone());
        assert_eq!(b.provenance[0].source_hash, a.hash());
        assert_eq!(b.provenance[0].fresh, fresh);
        let back: LatticeFormula = b.payload().unwrap();
        assert_eq!(back, lf);
        assert!(b.payload::<RingSystem>().is_err());
    }

    #[test]
    #[ignore]
    fn z3_chain_timing() {
        let pres = parse_group_presentation("gens x; rel x^3 = 1").unwrap();
        let t = std::time::Instant::now();
        let run = constructive_pipeline(&pres, 4).unwrap();
        eprintln!("{:?} attrs={} tuples={}", t.elapsed(), run.database.attrs().len(), run.database.len());
    }
}
