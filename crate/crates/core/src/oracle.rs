//! Exhaustive nontrivial-satisfiability search over finite carriers.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::database::{self, DbError, DependencySet};
use crate::ffmat::{FfError, FieldPrime, Matrix, Subspace};
use crate::lattice::{
    enumerate_frames, frame_axioms, g_membership_equations, Frame, IndexedSubspaces,
    LatticeCarrier, LatticeConjunction, LatticeError, LatticeTerm, TableLattice,
};
use crate::matring::{eval_poly, idempotents, RingError, RingSystem};
use crate::reductions::{lattice_nontrivial, LatticeFormula, Nontriviality};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{what}: search space of {size} exceeds cap {cap}")]
    CapExceeded { what: String, size: u128, cap: u128 },
    #[error("node budget of {0} exhausted")]
    NodeBudget(u64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Database(#[from] DbError),
    #[error(transparent)]
    Field(#[from] FfError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Lattice,
    Ring,
    Group,
    Database,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pruning {
    /// Frames first when the formula carries frame variables, else plain.
    #[default]
    Auto,
    /// Frames enumerated and verified up front, other variables over the
    /// whole carrier.
    FrameNaive,
    Plain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub kind: StructureKind,
    pub carrier: String,
    pub order: Vec<String>,
    pub pruning: String,
    /// Upper bound on leaves, saturating.
    pub size: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    #[serde(skip)]
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "assignment", rename_all = "snake_case")]
pub enum Outcome<E> {
    Witness(BTreeMap<String, E>),
    Exhausted,
}

impl<E> Outcome<E> {
    pub fn witness(&self) -> Option<&BTreeMap<String, E>> {
        match self {
            Outcome::Witness(w) => Some(w),
            Outcome::Exhausted => None,
        }
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, Outcome::Exhausted)
    }

    pub fn map<F, T>(self, f: F) -> Outcome<T>
    where
        F: Fn(E) -> T,
    {
        match self {
            Outcome::Witness(w) => Outcome::Witness(w.into_iter().map(|(k, v)| (k, f(v))).collect()),
            Outcome::Exhausted => Outcome::Exhausted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult<E> {
    pub space: SearchSpace,
    pub outcome: Outcome<E>,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub threads: usize,
    /// Node budget per partition.
    pub node_cap: u64,
    /// Largest carrier or domain product accepted.
    pub size_cap: u128,
    pub pruning: Pruning,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { threads: 1, node_cap: 5_000_000_000, size_cap: 10_000_000, pruning: Pruning::Auto }
    }
}

// ---------------------------------------------------------------------------
// compiled lattice terms

#[derive(Clone, Copy, Debug)]
enum Op {
    Var(u32),
    Const(u32),
    Join,
    Meet,
}

#[derive(Clone, Debug)]
struct Prog(Vec<Op>);

impl Prog {
    fn compile(t: &LatticeTerm, index: &HashMap<String, u32>, l: &TableLattice) -> Prog {
        fn go(t: &LatticeTerm, index: &HashMap<String, u32>, l: &TableLattice, out: &mut Vec<Op>) {
            match t {
                LatticeTerm::Var { name } => out.push(Op::Var(index[name])),
                LatticeTerm::Const0 => out.push(Op::Const(l.bottom_idx() as u32)),
                LatticeTerm::Const1 => out.push(Op::Const(l.top_idx() as u32)),
                LatticeTerm::Join { left, right } => {
                    go(left, index, l, out);
                    go(right, index, l, out);
                    out.push(Op::Join);
                }
                LatticeTerm::Meet { left, right } => {
                    go(left, index, l, out);
                    go(right, index, l, out);
                    out.push(Op::Meet);
                }
            }
        }
        let mut out = Vec::new();
        go(t, index, l, &mut out);
        Prog(out)
    }

    #[inline]
    fn eval(&self, vals: &[u32], l: &TableLattice, stack: &mut Vec<u32>) -> u32 {
        stack.clear();
        for op in &self.0 {
            match *op {
                Op::Var(v) => stack.push(vals[v as usize]),
                Op::Const(c) => stack.push(c),
                Op::Join | Op::Meet => {
                    let b = stack.pop().expect("operand") as usize;
                    let a = stack.pop().expect("operand") as usize;
                    let r = if matches!(op, Op::Join) { l.join_idx(a, b) } else { l.meet_idx(a, b) };
                    stack.push(r as u32);
                }
            }
        }
        stack[0]
    }
}

#[derive(Clone, Debug)]
struct CompiledEq {
    lhs: Prog,
    rhs: Prog,
}

impl CompiledEq {
    #[inline]
    fn holds(&self, vals: &[u32], l: &TableLattice, stack: &mut Vec<u32>) -> bool {
        self.lhs.eval(vals, l, stack) == self.rhs.eval(vals, l, stack)
    }
}

#[derive(Clone, Debug)]
enum Domain {
    All,
    GMember,
    Defined(Prog),
}

/// Variable order, per-position domains and the equations that become
/// checkable at each position.
#[derive(Clone, Debug)]
struct Plan {
    names: Vec<String>,
    eqs: Vec<CompiledEq>,
    order: Vec<u32>,
    domains: Vec<Domain>,
    checks: Vec<Vec<usize>>,
    leaf: Vec<usize>,
    /// Frame variable indices: atoms, pairs, bot, top.
    frame: Option<[u32; 12]>,
    frame_axioms_present: bool,
    nontrivial: Nontriviality,
}

impl Plan {
    fn build(lf: &LatticeFormula, l: &TableLattice, frame_mode: bool, g_domains: bool) -> Plan {
        let conj = &lf.conjunction;
        let names = conj.vars();
        let index: HashMap<String, u32> = names.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
        let frame_vars = lf.frame_vars.as_ref().filter(|_| frame_mode);
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        let mut frame_idx = None;
        let mut frame_axioms_present = false;
        if let Some(z) = frame_vars {
            let list = z.names();
            if let Some(missing) = list.iter().find(|n| !index.contains_key(*n)) {
                // give every frame variable a slot
                let mut lf2 = lf.clone();
                lf2.conjunction.push(LatticeTerm::var(missing), LatticeTerm::var(missing));
                return Plan::build(&lf2, l, frame_mode, g_domains);
            }
            let mut arr = [0u32; 12];
            for (k, n) in list.iter().enumerate() {
                arr[k] = index[n];
            }
            frame_idx = Some(arr);
            let axioms: HashSet<_> = frame_axioms(z).into_iter().map(|(_, e)| e).collect();
            let mut found = HashSet::new();
            for (i, eq) in conj.equations.iter().enumerate() {
                if axioms.contains(eq) {
                    found.insert(eq.clone());
                    covered.insert(i);
                }
            }
            frame_axioms_present = found.len() == axioms.len();
            if !frame_axioms_present {
                covered.clear();
            }
        }
        let eqs: Vec<CompiledEq> = conj
            .equations
            .iter()
            .map(|e| CompiledEq { lhs: Prog::compile(&e.lhs, &index, l), rhs: Prog::compile(&e.rhs, &index, l) })
            .collect();
        let eq_vars: Vec<BTreeSet<u32>> = conj
            .equations
            .iter()
            .map(|e| e.vars().iter().map(|v| index[v]).collect())
            .collect();

        let n = names.len();
        let mut assigned = vec![false; n];
        if let Some(arr) = frame_idx {
            for v in arr {
                assigned[v as usize] = true;
            }
        }
        // G-membership candidates
        let mut g_member = vec![false; n];
        if let (Some(z), true) = (frame_vars, g_domains) {
            let all: HashSet<_> = conj.equations.iter().collect();
            for (i, name) in names.iter().enumerate() {
                if !assigned[i] && g_membership_equations(&LatticeTerm::var(name), z).iter().all(|e| all.contains(e)) {
                    g_member[i] = true;
                }
            }
        }
        let mut used = covered.clone();
        let mut order = Vec::new();
        let mut domains = Vec::new();
        while assigned.iter().any(|a| !a) {
            // a variable defined by an equation over assigned ones
            let mut pick: Option<(u32, Domain, usize)> = None;
            for (i, e) in conj.equations.iter().enumerate() {
                if used.contains(&i) {
                    continue;
                }
                for (side, other) in [(&e.lhs, &e.rhs), (&e.rhs, &e.lhs)] {
                    if let Some(v) = side.as_var() {
                        let vi = index[v];
                        let other_vars = &eq_vars[i];
                        let ready = !assigned[vi as usize]
                            && other.vars().iter().all(|w| w != v && assigned[index[w] as usize]);
                        if ready && other_vars.iter().all(|&w| w == vi || assigned[w as usize]) {
                            pick = Some((vi, Domain::Defined(Prog::compile(other, &index, l)), i));
                            break;
                        }
                    }
                }
                if pick.is_some() {
                    break;
                }
            }
            let (v, dom) = match pick {
                Some((v, d, i)) => {
                    used.insert(i);
                    (v, d)
                }
                None => {
                    let mut best: Option<(usize, bool, u32)> = None;
                    for v in 0..n as u32 {
                        if assigned[v as usize] {
                            continue;
                        }
                        let closes = eq_vars
                            .iter()
                            .enumerate()
                            .filter(|(i, vs)| {
                                !used.contains(i)
                                    && vs.contains(&v)
                                    && vs.iter().all(|&w| w == v || assigned[w as usize])
                            })
                            .count();
                        let key = (closes, g_member[v as usize], v);
                        let better = match best {
                            None => true,
                            Some((c, g, _)) => (closes, g_member[v as usize]) > (c, g),
                        };
                        if better {
                            best = Some(key);
                        }
                    }
                    let v = best.expect("unassigned variable").2;
                    (v, if g_member[v as usize] { Domain::GMember } else { Domain::All })
                }
            };
            assigned[v as usize] = true;
            order.push(v);
            domains.push(dom);
        }
        let pos: HashMap<u32, usize> = order.iter().enumerate().map(|(p, v)| (*v, p)).collect();
        let mut checks = vec![Vec::new(); order.len()];
        let mut leaf = Vec::new();
        for (i, vs) in eq_vars.iter().enumerate() {
            if used.contains(&i) {
                continue;
            }
            match vs.iter().filter_map(|v| pos.get(v)).max() {
                Some(&p) => checks[p].push(i),
                None => leaf.push(i),
            }
        }
        Plan {
            names,
            eqs,
            order,
            domains,
            checks,
            leaf,
            frame: frame_idx,
            frame_axioms_present,
            nontrivial: lf.nontriviality.clone(),
        }
    }

    fn order_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        if let Some(arr) = self.frame {
            out.extend(arr.iter().map(|&v| self.names[v as usize].clone()));
        }
        out.extend(self.order.iter().map(|&v| self.names[v as usize].clone()));
        out
    }

    fn nontrivial(&self, vals: &[u32], l: &TableLattice) -> bool {
        match &self.nontrivial {
            Nontriviality::None => true,
            Nontriviality::SomeNonBottom { watch } => {
                let bot = l.bottom_idx() as u32;
                if watch.is_empty() {
                    vals.iter().any(|&v| v != bot)
                } else {
                    watch
                        .iter()
                        .filter_map(|w| self.names.iter().position(|n| n == w))
                        .any(|i| vals[i] != bot)
                }
            }
            Nontriviality::BoundsDistinct { bot, top } => {
                let i = self.names.iter().position(|n| n == bot);
                let j = self.names.iter().position(|n| n == top);
                matches!((i, j), (Some(i), Some(j)) if vals[i] != vals[j])
            }
            _ => false,
        }
    }
}

struct Walker<'a> {
    plan: &'a Plan,
    l: &'a TableLattice,
    vals: Vec<u32>,
    stack: Vec<u32>,
    nodes: u64,
    node_cap: u64,
    g_cands: Vec<u32>,
    /// Result of the leaf-only checks for the current frame.
    frame_ok: Option<bool>,
    filter_nontrivial: bool,
    over_budget: bool,
}

impl Walker<'_> {
    fn rec(&mut self, pos: usize, visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>) -> ControlFlow<()> {
        if pos == self.plan.order.len() {
            return self.leaf(visit);
        }
        let v = self.plan.order[pos] as usize;
        let cands: Vec<u32> = match &self.plan.domains[pos] {
            Domain::Defined(p) => vec![p.eval(&self.vals, self.l, &mut self.stack)],
            Domain::GMember => self.g_cands.clone(),
            Domain::All => (0..self.l.len() as u32).collect(),
        };
        for c in cands {
            self.nodes += 1;
            if self.nodes > self.node_cap {
                self.over_budget = true;
                return ControlFlow::Break(());
            }
            self.vals[v] = c;
            let ok = self.plan.checks[pos]
                .iter()
                .all(|&i| self.plan.eqs[i].holds(&self.vals, self.l, &mut self.stack));
            if ok {
                self.rec(pos + 1, visit)?;
            }
        }
        ControlFlow::Continue(())
    }

    fn leaf(&mut self, visit: &mut dyn FnMut(&[u32]) -> ControlFlow<()>) -> ControlFlow<()> {
        let ok = match self.frame_ok {
            Some(ok) => ok,
            None => {
                let mut ok = self.plan.leaf.iter().all(|&i| self.plan.eqs[i].holds(&self.vals, self.l, &mut self.stack));
                if ok && self.plan.frame_axioms_present {
                    let arr = self.plan.frame.expect("frame");
                    let c: Vec<usize> = arr.iter().map(|&v| self.vals[v as usize] as usize).collect();
                    let f = Frame::from_components(&c).expect("12 components");
                    ok = crate::lattice::frame_holds_table(self.l, &f);
                }
                if self.plan.frame.is_some() {
                    self.frame_ok = Some(ok);
                }
                ok
            }
        };
        if !ok || (self.filter_nontrivial && !self.plan.nontrivial(&self.vals, self.l)) {
            return ControlFlow::Continue(());
        }
        visit(&self.vals)
    }
}

struct Partition {
    nodes: u64,
    witness: Option<Vec<u32>>,
    over_budget: bool,
}

fn run_partition(
    plan: &Plan,
    l: &TableLattice,
    part: Option<u32>,
    opts: &SearchOptions,
    stop: &dyn Fn() -> bool,
) -> Partition {
    let mut w = Walker {
        plan,
        l,
        vals: vec![0; plan.names.len()],
        stack: Vec::with_capacity(64),
        nodes: 0,
        node_cap: opts.node_cap,
        g_cands: Vec::new(),
        frame_ok: None,
        filter_nontrivial: true,
        over_budget: false,
    };
    let mut found: Option<Vec<u32>> = None;
    let mut take = |vals: &[u32]| {
        found = Some(vals.to_vec());
        ControlFlow::Break(())
    };
    match plan.frame {
        Some(arr) => {
            let a1 = part.map(|a| vec![a as usize]);
            let naive = !plan.domains.iter().any(|d| matches!(d, Domain::GMember));
            let mut g_cache: HashMap<(usize, usize), Vec<u32>> = HashMap::new();
            let mut visit_frame = |f: &Frame<usize>| {
                if stop() {
                    return ControlFlow::Break(());
                }
                for (k, c) in f.components().into_iter().enumerate() {
                    w.vals[arr[k] as usize] = c as u32;
                }
                w.frame_ok = None;
                if naive && plan.frame_axioms_present {
                    // verified by the enumerator
                    w.frame_ok = Some(plan.leaf.iter().all(|&i| plan.eqs[i].holds(&w.vals, l, &mut w.stack)));
                    if w.frame_ok == Some(false) {
                        return ControlFlow::Continue(());
                    }
                }
                let key = (f.atoms[0], f.atoms[1]);
                w.g_cands = g_cache
                    .entry(key)
                    .or_insert_with(|| {
                        let s = l.join_idx(key.0, key.1);
                        (0..l.len())
                            .filter(|&g| {
                                l.join_idx(g, key.0) == s
                                    && l.join_idx(g, key.1) == s
                                    && l.meet_idx(g, key.0) == f.bot
                                    && l.meet_idx(g, key.1) == f.bot
                            })
                            .map(|g| g as u32)
                            .collect()
                    })
                    .clone();
                w.rec(0, &mut take)
            };
            let _ = enumerate_frames(l, a1.as_deref(), true, naive, &mut visit_frame);
        }
        None => {
            if let Some(c) = part {
                // first position pinned to one candidate
                w.nodes += 1;
                if w.nodes > w.node_cap {
                    return Partition { nodes: w.nodes, witness: None, over_budget: true };
                }
                let v = plan.order[0] as usize;
                w.vals[v] = c;
                let ok = plan.checks[0].iter().all(|&i| plan.eqs[i].holds(&w.vals, l, &mut w.stack));
                if ok {
                    let _ = w.rec(1, &mut take);
                }
            } else {
                let _ = w.rec(0, &mut take);
            }
        }
    }
    Partition { nodes: w.nodes, witness: found, over_budget: w.over_budget }
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool")
}

/// Runs partitions in parallel; the witness of the first partition (in
/// partition order) that has one wins, and statistics cover exactly the
/// partitions up to it, so results do not depend on the thread count.
fn run_plan(plan: &Plan, l: &TableLattice, opts: &SearchOptions) -> Result<(Option<Vec<u32>>, u64)> {
    let parts: Vec<Option<u32>> = if plan.frame.is_some() {
        (0..l.len() as u32).map(Some).collect()
    } else if matches!(plan.domains.first(), Some(Domain::All)) {
        (0..l.len() as u32).map(Some).collect()
    } else {
        vec![None]
    };
    let best = AtomicUsize::new(usize::MAX);
    let results: Vec<Partition> = pool(opts.threads).install(|| {
        parts
            .par_iter()
            .enumerate()
            .map(|(i, &p)| {
                let stop = || best.load(Ordering::Relaxed) < i;
                if stop() {
                    return Partition { nodes: 0, witness: None, over_budget: false };
                }
                let r = run_partition(plan, l, p, opts, &stop);
                if r.witness.is_some() {
                    best.fetch_min(i, Ordering::Relaxed);
                }
                r
            })
            .collect()
    });
    let win = results.iter().position(|r| r.witness.is_some());
    let upto = win.map_or(results.len(), |i| i + 1);
    if results[..upto].iter().any(|r| r.over_budget) {
        return Err(OracleError::NodeBudget(opts.node_cap));
    }
    let nodes = results[..upto].iter().map(|r| r.nodes).sum();
    Ok((win.map(|i| results[i].witness.clone().expect("witness")), nodes))
}

fn frame_count_bound(l: &TableLattice) -> u128 {
    (l.len() as u128).saturating_pow(4)
}

/// Nontrivial satisfying assignment of a lattice formula in a table lattice.
///
/// With frame variables (and `Pruning::Auto`) frames are enumerated first,
/// variables carrying all four G-membership identities range over the
/// common complements of `a_1, a_2`, and the frame axioms are checked once a
/// frame survives every other equation.
pub fn search_lattice(lf: &LatticeFormula, l: &TableLattice, opts: &SearchOptions) -> Result<SearchResult<usize>> {
    let start = Instant::now();
    let (frame_mode, g_domains) = match (opts.pruning, lf.frame_vars.is_some()) {
        (Pruning::Plain, _) | (_, false) => (false, false),
        (Pruning::FrameNaive, true) => (true, false),
        (Pruning::Auto, true) => (true, true),
    };
    let plan = Plan::build(lf, l, frame_mode, g_domains);
    let free = plan.domains.iter().filter(|d| !matches!(d, Domain::Defined(_))).count() as u32;
    let mut size = (l.len() as u128).saturating_pow(free);
    if plan.frame.is_some() {
        size = size.saturating_mul(frame_count_bound(l));
    }
    if (l.len() as u128) > opts.size_cap {
        return Err(OracleError::CapExceeded { what: "lattice carrier".into(), size: l.len() as u128, cap: opts.size_cap });
    }
    let (wit, nodes) = run_plan(&plan, l, opts)?;
    let outcome = match wit {
        Some(vals) => Outcome::Witness(plan.names.iter().cloned().zip(vals.iter().map(|&v| v as usize)).collect()),
        None => Outcome::Exhausted,
    };
    let pruning = match (frame_mode, g_domains) {
        (true, true) => "frame_first",
        (true, false) => "frame_naive",
        _ => "plain",
    };
    Ok(SearchResult {
        space: SearchSpace {
            kind: StructureKind::Lattice,
            carrier: format!("table({})", l.len()),
            order: plan.order_names(),
            pruning: pruning.into(),
            size,
        },
        outcome,
        stats: SearchStats { nodes, elapsed_ms: start.elapsed().as_millis() as u64 },
    })
}

/// [`search_lattice`] over Lt(GF(p)^n), reporting subspaces.
pub fn search_subspace_lattice(
    lf: &LatticeFormula,
    p: FieldPrime,
    n: usize,
    opts: &SearchOptions,
) -> Result<SearchResult<Subspace>> {
    let count = Subspace::count_all(p, n);
    if count > opts.size_cap.min(100_000) {
        return Err(OracleError::CapExceeded { what: format!("Lt({p}^{n})"), size: count, cap: opts.size_cap.min(100_000) });
    }
    let idx = IndexedSubspaces::new(p, n, opts.size_cap)?;
    let r = search_lattice(lf, &idx.table, opts)?;
    Ok(SearchResult {
        space: SearchSpace { carrier: format!("Lt({p}^{n})"), ..r.space },
        outcome: r.outcome.map(|i| idx.subspace(i).clone()),
        stats: r.stats,
    })
}

/// Calls `visit` on every satisfying assignment (no nontriviality filter),
/// in search order.
pub fn for_each_model(
    conj: &LatticeConjunction,
    l: &TableLattice,
    node_cap: u64,
    visit: &mut dyn FnMut(&BTreeMap<String, usize>) -> ControlFlow<()>,
) -> Result<()> {
    let lf = LatticeFormula { nontriviality: Nontriviality::None, ..LatticeFormula::plain(conj.clone()) };
    let plan = Plan::build(&lf, l, false, false);
    let mut w = Walker {
        plan: &plan,
        l,
        vals: vec![0; plan.names.len()],
        stack: Vec::new(),
        nodes: 0,
        node_cap,
        g_cands: Vec::new(),
        frame_ok: None,
        filter_nontrivial: false,
        over_budget: false,
    };
    let names = plan.names.clone();
    let mut adapter = |vals: &[u32]| {
        let asg: BTreeMap<String, usize> = names.iter().cloned().zip(vals.iter().map(|&v| v as usize)).collect();
        visit(&asg)
    };
    let _ = w.rec(0, &mut adapter);
    if w.over_budget {
        return Err(OracleError::NodeBudget(node_cap));
    }
    Ok(())
}

/// Whether `∀x̄. conj ⇒ ψ` holds in `a`, where ψ says every variable equals
/// `x_1` and `f(x_1, …, x_1) = x_1` for each of `+`, `∩`, `0`, `1`.
/// Equivalently: every satisfying assignment generates a one-element
/// subalgebra.
pub fn quasi_identity_check(conj: &LatticeConjunction, a: &TableLattice) -> Result<bool> {
    let mut vars = conj.vars();
    let mut conj = conj.clone();
    if vars.is_empty() {
        conj.push(LatticeTerm::var("x1"), LatticeTerm::var("x1"));
        vars = conj.vars();
    }
    let x1 = vars[0].clone();
    let mut all_hold = true;
    for_each_model(&conj, a, u64::MAX, &mut |asg| {
        let v = asg[&x1];
        let psi = vars.iter().all(|x| asg[x] == v)
            && a.join_idx(v, v) == v
            && a.meet_idx(v, v) == v
            && a.bottom_idx() == v
            && a.top_idx() == v;
        if psi {
            ControlFlow::Continue(())
        } else {
            all_hold = false;
            ControlFlow::Break(())
        }
    })?;
    Ok(all_hold)
}

// ---------------------------------------------------------------------------
// rings

struct RingComponent {
    vars: Vec<String>,
    triggers: Vec<String>,
    eqs: Vec<usize>,
}

/// Nontrivial common zero of a ring system in M_d(GF(p)).
///
/// Idempotent variables are enumerated over the idempotents; the remaining
/// variables split into components (connected through shared equations),
/// each searched over all matrices once its idempotent variables are set,
/// memoized on their values.
pub fn search_ring(
    sys: &RingSystem,
    d: usize,
    p: FieldPrime,
    watch: &[String],
    opts: &SearchOptions,
) -> Result<SearchResult<Matrix>> {
    let start = Instant::now();
    sys.validate()?;
    let eqs = sys.explicit_equations();
    let idem: Vec<String> = sys.idempotent_vars.clone();
    let others: Vec<String> = sys.variables.iter().filter(|v| !idem.contains(v)).cloned().collect();
    let idem_dom = idempotents(d, p, opts.size_cap)?;
    let mat_count = (p.get() as u128).saturating_pow((d * d) as u32);

    // components of the non-idempotent variables
    let eq_vars: Vec<Vec<String>> = eqs.iter().map(|e| e.vars()).collect();
    let mut comp_of: BTreeMap<String, usize> = BTreeMap::new();
    let mut comps: Vec<RingComponent> = Vec::new();
    for v in &others {
        if comp_of.contains_key(v) {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![v.clone()];
        let mut c = RingComponent { vars: Vec::new(), triggers: Vec::new(), eqs: Vec::new() };
        comp_of.insert(v.clone(), id);
        while let Some(x) = stack.pop() {
            c.vars.push(x.clone());
            for (i, vs) in eq_vars.iter().enumerate() {
                if !vs.contains(&x) {
                    continue;
                }
                if !c.eqs.contains(&i) {
                    c.eqs.push(i);
                }
                for y in vs {
                    if idem.contains(y) {
                        if !c.triggers.contains(y) {
                            c.triggers.push(y.clone());
                        }
                    } else if !comp_of.contains_key(y) {
                        comp_of.insert(y.clone(), id);
                        stack.push(y.clone());
                    }
                }
            }
        }
        c.eqs.sort();
        c.vars.sort_by_key(|x| others.iter().position(|o| o == x));
        let size = mat_count.saturating_pow(c.vars.len() as u32);
        if size > opts.size_cap {
            return Err(OracleError::CapExceeded { what: format!("component {:?}", c.vars), size, cap: opts.size_cap });
        }
        comps.push(c);
    }
    let idem_size = (idem_dom.len() as u128).saturating_pow(idem.len() as u32);
    if idem_size > opts.size_cap {
        return Err(OracleError::CapExceeded { what: "idempotent assignments".into(), size: idem_size, cap: opts.size_cap });
    }

    // greedy order of idempotent variables: close the most equations first
    let mut order: Vec<String> = Vec::new();
    while order.len() < idem.len() {
        let score = |v: &String| {
            let mut done: Vec<&String> = order.iter().collect();
            done.push(v);
            let eq_closed = eq_vars
                .iter()
                .filter(|vs| vs.contains(v) && vs.iter().all(|x| done.contains(&x)))
                .count();
            let comp_closed = comps
                .iter()
                .filter(|c| c.triggers.contains(v) && c.triggers.iter().all(|x| done.contains(&x)))
                .count();
            eq_closed + comp_closed
        };
        let next = idem
            .iter()
            .filter(|v| !order.contains(v))
            .max_by_key(|v| (score(v), std::cmp::Reverse(idem.iter().position(|x| x == *v))))
            .expect("remaining")
            .clone();
        order.push(next);
    }
    let pos = |v: &String| order.iter().position(|x| x == v);
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); order.len().max(1)];
    let mut comp_checks: Vec<Vec<usize>> = vec![Vec::new(); order.len().max(1)];
    let mut leaf_eqs = Vec::new();
    for (i, vs) in eq_vars.iter().enumerate() {
        if vs.iter().any(|v| comp_of.contains_key(v)) {
            continue;
        }
        match vs.iter().filter_map(pos).max() {
            Some(k) => checks[k].push(i),
            None => leaf_eqs.push(i),
        }
    }
    let mut leaf_comps = Vec::new();
    for (ci, c) in comps.iter().enumerate() {
        match c.triggers.iter().filter_map(pos).max() {
            Some(k) => comp_checks[k].push(ci),
            None => leaf_comps.push(ci),
        }
    }

    struct Ctx<'a> {
        eqs: &'a [crate::matring::RingEquation],
        comps: &'a [RingComponent],
        p: FieldPrime,
        d: usize,
        watch: &'a [String],
        memo: Vec<HashMap<Vec<Matrix>, Option<(Vec<Matrix>, Option<Vec<Matrix>>)>>>,
        nodes: u64,
        node_cap: u64,
    }

    impl Ctx<'_> {
        fn holds(&self, i: usize, asg: &BTreeMap<String, Matrix>) -> bool {
            let e = &self.eqs[i];
            match (eval_poly(&e.lhs, asg, self.p, self.d), eval_poly(&e.rhs, asg, self.p, self.d)) {
                (Ok(a), Ok(b)) => a == b,
                _ => false,
            }
        }

        fn watched(&self, v: &str) -> bool {
            self.watch.is_empty() || self.watch.iter().any(|w| w == v)
        }

        /// First solution, and first solution with a watched nonzero value.
        fn solve(
            &mut self,
            ci: usize,
            asg: &mut BTreeMap<String, Matrix>,
        ) -> Result<Option<(Vec<Matrix>, Option<Vec<Matrix>>)>> {
            let key: Vec<Matrix> = self.comps[ci].triggers.iter().map(|t| asg[t].clone()).collect();
            if let Some(r) = self.memo[ci].get(&key) {
                return Ok(r.clone());
            }
            let vars = self.comps[ci].vars.clone();
            let eqs = self.comps[ci].eqs.clone();
            let all: Vec<Matrix> = Matrix::all(self.p, self.d, self.d).collect();
            let mut idx = vec![0usize; vars.len()];
            let mut first: Option<Vec<Matrix>> = None;
            let mut nonzero: Option<Vec<Matrix>> = None;
            let wants_nonzero = vars.iter().any(|v| self.watched(v));
            'outer: loop {
                self.nodes += 1;
                if self.nodes > self.node_cap {
                    return Err(OracleError::NodeBudget(self.node_cap));
                }
                for (v, &k) in vars.iter().zip(&idx) {
                    asg.insert(v.clone(), all[k].clone());
                }
                if eqs.iter().all(|&i| self.holds(i, asg)) {
                    let vals: Vec<Matrix> = idx.iter().map(|&k| all[k].clone()).collect();
                    if first.is_none() {
                        first = Some(vals.clone());
                    }
                    let nz = vars.iter().zip(&vals).any(|(v, m)| self.watched(v) && !m.is_zero());
                    if nz {
                        nonzero = Some(vals);
                        break;
                    }
                    if !wants_nonzero {
                        break;
                    }
                }
                for k in (0..idx.len()).rev() {
                    idx[k] += 1;
                    if idx[k] < all.len() {
                        continue 'outer;
                    }
                    idx[k] = 0;
                }
                break;
            }
            for v in &vars {
                asg.remove(v);
            }
            let r = first.map(|f| (f, nonzero));
            self.memo[ci].insert(key, r.clone());
            Ok(r)
        }
    }

    let mut ctx = Ctx {
        eqs: &eqs,
        comps: &comps,
        p,
        d,
        watch,
        memo: (0..comps.len()).map(|_| HashMap::new()).collect(),
        nodes: 0,
        node_cap: opts.node_cap,
    };

    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        order: &[String],
        dom: &[Matrix],
        checks: &[Vec<usize>],
        comp_checks: &[Vec<usize>],
        leaf: (&[usize], &[usize]),
        ctx: &mut Ctx<'_>,
        asg: &mut BTreeMap<String, Matrix>,
    ) -> Result<Option<BTreeMap<String, Matrix>>> {
        if k == order.len() {
            for &i in leaf.0 {
                if !ctx.holds(i, asg) {
                    return Ok(None);
                }
            }
            let mut sols = Vec::new();
            for ci in (0..ctx.comps.len()).collect::<Vec<_>>() {
                match ctx.solve(ci, asg)? {
                    Some(s) => sols.push(s),
                    None => return Ok(None),
                }
            }
            let base_nonzero = asg.iter().any(|(v, m)| ctx.watched(v) && !m.is_zero());
            let pick_nz = if base_nonzero { None } else { sols.iter().position(|s| s.1.is_some()) };
            if !base_nonzero && pick_nz.is_none() {
                return Ok(None);
            }
            let mut out = asg.clone();
            for (ci, s) in sols.iter().enumerate() {
                let vals = if Some(ci) == pick_nz { s.1.as_ref().expect("nonzero") } else { &s.0 };
                for (v, m) in ctx.comps[ci].vars.iter().zip(vals) {
                    out.insert(v.clone(), m.clone());
                }
            }
            return Ok(Some(out));
        }
        for m in dom {
            ctx.nodes += 1;
            if ctx.nodes > ctx.node_cap {
                return Err(OracleError::NodeBudget(ctx.node_cap));
            }
            asg.insert(order[k].clone(), m.clone());
            if !checks[k].iter().all(|&i| ctx.holds(i, asg)) {
                continue;
            }
            let mut ok = true;
            for &ci in &comp_checks[k] {
                if ctx.solve(ci, asg)?.is_none() {
                    ok = false;
                    break;
                }
            }
            if ok {
                if let Some(w) = rec(k + 1, order, dom, checks, comp_checks, leaf, ctx, asg)? {
                    return Ok(Some(w));
                }
            }
        }
        asg.remove(&order[k]);
        Ok(None)
    }

    let mut asg = BTreeMap::new();
    let found = rec(0, &order, &idem_dom, &checks, &comp_checks, (&leaf_eqs, &leaf_comps), &mut ctx, &mut asg)?;
    let comp_size: u128 = comps.iter().map(|c| mat_count.saturating_pow(c.vars.len() as u32)).sum();
    Ok(SearchResult {
        space: SearchSpace {
            kind: StructureKind::Ring,
            carrier: format!("M{d}({p})"),
            order: order.iter().chain(others.iter()).cloned().collect(),
            pruning: "idempotents_then_components".into(),
            size: idem_size.saturating_mul(comp_size.max(1)),
        },
        outcome: match found {
            Some(w) => Outcome::Witness(w),
            None => Outcome::Exhausted,
        },
        stats: SearchStats { nodes: ctx.nodes, elapsed_ms: start.elapsed().as_millis() as u64 },
    })
}

// ---------------------------------------------------------------------------
// databases

pub const DB_ATTR_CAP: usize = 16;

/// First injective `f: attrs → Lt(GF(p)^n)` (lexicographic in subspace
/// order) whose database D(V, f) satisfies `deps` and is not almost trivial.
pub fn search_database(
    deps: &DependencySet,
    p: FieldPrime,
    n: usize,
    attrs: &[String],
    opts: &SearchOptions,
) -> Result<SearchResult<Subspace>> {
    let start = Instant::now();
    if attrs.len() > DB_ATTR_CAP {
        return Err(OracleError::CapExceeded { what: "attributes".into(), size: attrs.len() as u128, cap: DB_ATTR_CAP as u128 });
    }
    let elems = Subspace::enumerate_all(p, n, opts.size_cap)?;
    let mut size: u128 = 1;
    for k in 0..attrs.len() {
        size = size.saturating_mul(elems.len().saturating_sub(k) as u128);
    }
    if size > opts.size_cap {
        return Err(OracleError::CapExceeded { what: "injective maps".into(), size, cap: opts.size_cap });
    }
    // dependency i is checkable once its last attribute is placed
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); attrs.len().max(1)];
    for (i, d) in deps.deps.iter().enumerate() {
        let last = d.attrs().map(|a| attrs.iter().position(|x| x == a)).max().flatten();
        match last {
            Some(k) => checks[k].push(i),
            // unknown attribute: never satisfiable
            None if d.attrs().next().is_some() => return Ok(exhausted_db(attrs, p, n, size, 0, start)),
            None => checks[0].push(i),
        }
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut nodes = 0u64;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        attrs: &[String],
        elems: &[Subspace],
        deps: &DependencySet,
        checks: &[Vec<usize>],
        chosen: &mut Vec<usize>,
        nodes: &mut u64,
        cap: u64,
    ) -> Result<bool> {
        let build = |chosen: &[usize]| {
            let f: Vec<(String, Subspace)> =
                chosen.iter().enumerate().map(|(i, &e)| (attrs[i].clone(), elems[e].clone())).collect();
            database::build_dvf(&f)
        };
        if k == attrs.len() {
            let db = build(chosen)?;
            return Ok(!database::almost_trivial(&db));
        }
        for e in 0..elems.len() {
            if chosen.contains(&e) {
                continue;
            }
            *nodes += 1;
            if *nodes > cap {
                return Err(OracleError::NodeBudget(cap));
            }
            chosen.push(e);
            let ok = checks[k].is_empty() || {
                let db = build(chosen)?;
                checks[k].iter().all(|&i| deps.deps[i].holds(&db))
            };
            if ok && rec(k + 1, attrs, elems, deps, checks, chosen, nodes, cap)? {
                return Ok(true);
            }
            chosen.pop();
        }
        Ok(false)
    }

    if attrs.is_empty() {
        return Ok(exhausted_db(attrs, p, n, size, 0, start));
    }
    let found = rec(0, attrs, &elems, deps, &checks, &mut chosen, &mut nodes, opts.node_cap)?;
    let mut r = exhausted_db(attrs, p, n, size, nodes, start);
    if found {
        r.outcome = Outcome::Witness(attrs.iter().cloned().zip(chosen.iter().map(|&e| elems[e].clone())).collect());
    }
    Ok(r)
}

fn exhausted_db(attrs: &[String], p: FieldPrime, n: usize, size: u128, nodes: u64, start: Instant) -> SearchResult<Subspace> {
    SearchResult {
        space: SearchSpace {
            kind: StructureKind::Database,
            carrier: format!("D({p}^{n}, f)"),
            order: attrs.to_vec(),
            pruning: "prefix_projection".into(),
            size,
        },
        outcome: Outcome::Exhausted,
        stats: SearchStats { nodes, elapsed_ms: start.elapsed().as_millis() as u64 },
    }
}

/// Re-checks a lattice witness with the generic evaluator.
pub fn validate_lattice_witness<L: LatticeCarrier + ?Sized>(
    lf: &LatticeFormula,
    asg: &BTreeMap<String, L::Elem>,
    l: &L,
) -> Result<bool> {
    let failing = crate::lattice::failing_equations(&lf.conjunction, asg, l)?;
    Ok(failing.is_empty() && lattice_nontrivial(&lf.nontriviality, asg, l))
}

/// Output of the Z3 demo: the constructive chain for `x³ = e` and the
/// frame-first refutation of `x = x²` in Lt(GF(2)^4).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemoReport {
    pub presentation: String,
    pub run: crate::reductions::ConstructiveRun,
    pub refuted: String,
    pub refutation: SearchResult<Subspace>,
}

pub fn z3_demo(opts: &SearchOptions) -> std::result::Result<DemoReport, crate::reductions::ReductionError> {
    use crate::reductions::{constructive_pipeline, group_to_lattice};
    let z3 = "gens x; rel x^3 = 1";
    let pres = crate::formulas::parse_group_presentation(z3).expect("fixed presentation");
    let run = constructive_pipeline(&pres, 4)?;
    let idem = "gens x; rel x = x^2";
    let (lf, _) = group_to_lattice(&crate::formulas::parse_group_presentation(idem).expect("fixed presentation"));
    let two = FieldPrime::new(2).expect("prime");
    let refutation = search_subspace_lattice(&lf, two, 4, opts).map_err(|e| {
        crate::reductions::ReductionError::WitnessRejected { stage: crate::reductions::Stage::Lattice, detail: e.to_string() }
    })?;
    Ok(DemoReport { presentation: z3.into(), run, refuted: idem.into(), refutation })
}
