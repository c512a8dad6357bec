use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::info;
use modcon::ffmat::{FieldPrime, Matrix, Subspace};
use modcon::formulas::parse_group_presentation;
use modcon::groups::{eval_word, search_sn, Perm, SymmetricGroup};
use modcon::lattice::{
    admissible_holds, build_frame, check_frame, Frame, FrameVars, SubspaceLattice,
};
use modcon::matring::eval_poly;
use modcon::oracle::{
    search_database, search_ring, search_subspace_lattice, DemoReport, OracleError, SearchOptions,
};
use modcon::reductions::{
    constructive_pipeline, group_to_lattice, lattice_to_relalg, lattice_to_ring, ring_to_gc,
    type1_to_deps, PipelineArtifact, ReductionError, Stage,
};
use modcon::relalg::Relation;
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{read_artifact, read_assignment, read_database, read_json, Formula};
use crate::{CliError, Format, Settings};

/// Exit status of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
}

pub struct Out {
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl Out {
    /// Writes `value` as JSON, or `text` in text mode.
    pub fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> Result<(), CliError> {
        let body = match self.format {
            Format::Json => serde_json::to_string_pretty(value).expect("serializable") + "\n",
            Format::Text => text() + "\n",
        };
        match &self.path {
            Some(p) => std::fs::write(p, body).map_err(|e| CliError::Io(p.display().to_string(), e)),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }
}

fn field(p: u32) -> Result<FieldPrime, CliError> {
    FieldPrime::new(p).map_err(|e| CliError::Usage(e.to_string()))
}

fn reduction(e: ReductionError) -> CliError {
    CliError::Failed(e.to_string())
}

fn oracle(e: OracleError) -> CliError {
    match e {
        OracleError::CapExceeded { .. } | OracleError::NodeBudget(_) => CliError::Cap(e.to_string()),
        other => CliError::Failed(other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// reduce / verify

/// Applies the transform of one pipeline edge.
pub fn apply_edge(art: &PipelineArtifact, to: Stage, nabla: bool) -> Result<PipelineArtifact, CliError> {
    if !Stage::is_edge(art.stage, to) {
        let edges: Vec<String> = Stage::EDGES.iter().map(|(a, b)| format!("{a}->{b}")).collect();
        return Err(CliError::Usage(format!(
            "no reduction from {} to {to}; valid edges: {}",
            art.stage,
            edges.join(", ")
        )));
    }
    Ok(match (Formula::of(art)?, to) {
        (Formula::Group(pres), Stage::Lattice) => {
            let (lf, fresh) = group_to_lattice(&pres);
            art.derive(to, "group_to_lattice", &lf, fresh)
        }
        (Formula::Lattice(lf), Stage::Ring) => {
            let (sys, fresh) = lattice_to_ring(&lf.conjunction);
            art.derive(to, "lattice_to_ring", &sys, fresh)
        }
        (Formula::Lattice(lf), Stage::Relalg) => {
            let (rf, fresh) = lattice_to_relalg(&lf.conjunction, nabla);
            art.derive(to, "lattice_to_relalg", &rf, fresh)
        }
        (Formula::Relalg(rf), Stage::Deps) => {
            let df = type1_to_deps(&rf).map_err(reduction)?;
            art.derive(to, "type1_to_deps", &df, Vec::new())
        }
        (Formula::Ring(sys), Stage::Gc) => {
            let gc = ring_to_gc(&sys);
            art.derive(to, "ring_to_gc", &gc, Vec::new())
        }
        _ => unreachable!("edge checked above"),
    })
}

pub fn reduce(input: &Path, from: Stage, to: Stage, nabla: bool, out: &Out) -> Result<Status, CliError> {
    let art = read_artifact(input, Some(from))?;
    let next = apply_edge(&art, to, nabla)?;
    out.emit(&next, || {
        format!("{} -> {}: {} ({} fresh)", from, to, next.hash(), next.provenance.last().map_or(0, |p| p.fresh.len()))
    })?;
    Ok(Status::Ok)
}

/// Replays every recorded transform and compares hashes.
pub fn verify(input: &Path, out: &Out) -> Result<Status, CliError> {
    let v: Value = read_json(input)?;
    let chain: Vec<PipelineArtifact> = if v.is_array() {
        serde_json::from_value(v).map_err(|e| CliError::Parse(e.to_string()))?
    } else {
        vec![serde_json::from_value(v).map_err(|e| CliError::Parse(e.to_string()))?]
    };
    let mut problems = Vec::new();
    for (i, art) in chain.iter().enumerate() {
        if art.provenance.is_empty() {
            continue;
        }
        let Some(prev) = i.checked_sub(1).map(|k| &chain[k]) else {
            problems.push(format!("artifact {i}: provenance without a source artifact"));
            continue;
        };
        let last = art.provenance.last().expect("nonempty");
        if last.source_hash != prev.hash() {
            problems.push(format!("artifact {i}: source hash {} != {}", last.source_hash, prev.hash()));
            continue;
        }
        let nabla = art.formula.get("require_nabla").and_then(Value::as_bool).unwrap_or(false);
        let replay = apply_edge(prev, art.stage, nabla)?;
        if replay != *art {
            problems.push(format!("artifact {i}: replaying {} does not reproduce it", last.transform));
        }
    }
    let report = json!({ "artifacts": chain.len(), "ok": problems.is_empty(), "violations": problems });
    out.emit(&report, || match problems.is_empty() {
        true => format!("ok: {} artifacts replay", chain.len()),
        false => problems.join("\n"),
    })?;
    Ok(if problems.is_empty() { Status::Ok } else { Status::Violation })
}

// ---------------------------------------------------------------------------
// check

fn report(out: &Out, violations: Vec<String>, extra: Value) -> Result<Status, CliError> {
    let ok = violations.is_empty();
    let mut v = json!({ "ok": ok, "violations": violations });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    out.emit(&v, || if ok { "ok".into() } else { format!("violated:\n  {}", violations.join("\n  ")) })?;
    Ok(if ok { Status::Ok } else { Status::Violation })
}

pub fn check_frame_cmd(input: Option<&Path>, p: u32, d: usize, out: &Out) -> Result<Status, CliError> {
    let (l, f) = match input {
        Some(path) => {
            let f: Frame<Subspace> = read_json(path)?;
            (SubspaceLattice::new(f.top.field(), f.top.ambient_dim()), f)
        }
        None => build_frame(field(p)?, d).map_err(|e| CliError::Failed(e.to_string()))?,
    };
    let v = check_frame(&f, &l).iter().map(|x| x.to_string()).collect();
    report(out, v, json!({ "carrier": format!("Lt({}^{})", l.p, l.n) }))
}

/// Canonical frame values for frame variables missing from `asg`.
fn fill_frame(asg: &mut BTreeMap<String, Subspace>, z: &FrameVars, pd: Option<(u32, usize)>) -> Result<(), CliError> {
    if z.names().iter().all(|n| asg.contains_key(n)) {
        return Ok(());
    }
    let Some((p, d)) = pd else {
        return Err(CliError::Usage("assignment lacks frame variables; pass --p and --d to use the canonical frame".into()));
    };
    let (_, f) = build_frame(field(p)?, d).map_err(|e| CliError::Failed(e.to_string()))?;
    for (k, v) in f.to_assignment(z) {
        asg.entry(k).or_insert(v);
    }
    Ok(())
}

fn subspace_lattice(asg: &BTreeMap<String, Subspace>) -> Result<SubspaceLattice, CliError> {
    let u = asg.values().next().ok_or_else(|| CliError::Usage("empty assignment".into()))?;
    if asg.values().any(|w| w.field() != u.field() || w.ambient_dim() != u.ambient_dim()) {
        return Err(CliError::Usage("assignment mixes ambient spaces".into()));
    }
    Ok(SubspaceLattice::new(u.field(), u.ambient_dim()))
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Assignment,
    Type1,
    Admissible,
}

pub fn check_witness(
    input: &Path,
    witness: &Path,
    kind: CheckKind,
    from: Option<Stage>,
    pd: Option<(u32, usize)>,
    out: &Out,
) -> Result<Status, CliError> {
    let art = read_artifact(input, from)?;
    let formula = Formula::of(&art)?;
    match (formula, kind) {
        (Formula::Lattice(lf), CheckKind::Assignment) => {
            let mut asg: BTreeMap<String, Subspace> = read_assignment(witness)?;
            if let Some(z) = &lf.frame_vars {
                fill_frame(&mut asg, z, pd)?;
            }
            let l = subspace_lattice(&asg)?;
            let full = lf.complete(&asg, &l).map_err(failed)?;
            let (failing, nontrivial) = lf.check(&full, &l).map_err(failed)?;
            let mut v: Vec<String> =
                failing.iter().map(|&i| format!("equation {i}: {}", lf.conjunction.equations[i])).collect();
            if !nontrivial {
                v.push(format!("nontriviality: {}", serde_json::to_string(&lf.nontriviality).expect("serializable")));
            }
            report(out, v, json!({ "stage": "lattice", "equations": lf.conjunction.len() }))
        }
        (Formula::Lattice(lf), CheckKind::Admissible) => {
            let mut asg: BTreeMap<String, Subspace> = read_assignment(witness)?;
            if let Some(z) = &lf.frame_vars {
                fill_frame(&mut asg, z, pd)?;
            }
            let l = subspace_lattice(&asg)?;
            let mut v = Vec::new();
            for (i, eq) in lf.conjunction.equations.iter().enumerate() {
                if !admissible_holds(eq, &asg, &l).map_err(failed)? {
                    v.push(format!("equation {i}: {eq}"));
                }
            }
            report(out, v, json!({ "stage": "lattice" }))
        }
        (Formula::Gc(gc), CheckKind::Admissible | CheckKind::Assignment) => {
            let mut asg: BTreeMap<String, Subspace> = read_assignment(witness)?;
            fill_frame(&mut asg, &gc.frame_vars, pd)?;
            let l = subspace_lattice(&asg)?;
            let v = gc.failing(&asg, &l).map_err(failed)?.iter().map(|&i| format!("equation {i}: {}", gc.equations[i])).collect();
            report(out, v, json!({ "stage": "gc" }))
        }
        (Formula::Ring(sys), CheckKind::Assignment) => {
            let asg: BTreeMap<String, Matrix> = read_assignment(witness)?;
            let m = asg.values().next().ok_or_else(|| CliError::Usage("empty assignment".into()))?;
            let (p, d) = (m.field(), m.rows());
            let mut v = Vec::new();
            for (i, eq) in sys.explicit_equations().iter().enumerate() {
                let l = eval_poly(&eq.lhs, &asg, p, d).map_err(failed)?;
                let r = eval_poly(&eq.rhs, &asg, p, d).map_err(failed)?;
                if l != r {
                    v.push(format!("equation {i}: {eq}"));
                }
            }
            report(out, v, json!({ "stage": "ring" }))
        }
        (Formula::Relalg(rf), CheckKind::Assignment) => {
            let asg: BTreeMap<String, Relation> = read_assignment(witness)?;
            let full = rf.complete(&asg).map_err(failed)?;
            report(out, rf.violations(&full).map_err(failed)?, json!({ "stage": "relalg" }))
        }
        (Formula::Relalg(rf), CheckKind::Type1) => {
            let asg: BTreeMap<String, Relation> = read_assignment(witness)?;
            let v = rf.psi.failing(&asg).map_err(failed)?.iter().map(|&i| rf.psi.conjuncts[i].to_string()).collect();
            report(out, v, json!({ "stage": "relalg" }))
        }
        (Formula::Group(pres), CheckKind::Assignment) => {
            let asg: BTreeMap<String, Perm> = read_assignment(witness)?;
            let n = asg.values().next().map_or(1, Perm::degree);
            let g = SymmetricGroup { n };
            let mut v = Vec::new();
            for r in &pres.relations {
                if eval_word(&r.lhs, &asg, &g).map_err(failed)? != eval_word(&r.rhs, &asg, &g).map_err(failed)? {
                    v.push(format!("{} = {}", r.lhs, r.rhs));
                }
            }
            if asg.values().all(Perm::is_identity) {
                v.push("all generators are the identity".into());
            }
            report(out, v, json!({ "stage": "group" }))
        }
        (_, kind) => Err(CliError::Usage(format!(
            "`check {}` does not apply to a {} artifact",
            match kind {
                CheckKind::Assignment => "assignment",
                CheckKind::Type1 => "type1",
                CheckKind::Admissible => "admissible",
            },
            art.stage
        ))),
    }
}

pub fn check_deps(input: &Path, db: &Path, out: &Out) -> Result<Status, CliError> {
    let art = read_artifact(input, Some(Stage::Deps))?;
    let Formula::Deps(df) = Formula::of(&art)? else { unreachable!("deps stage") };
    let d = read_database(db)?;
    let (failing, nontrivial) = df.check(&d);
    let mut v: Vec<String> = failing.iter().map(|&i| df.deps.deps[i].to_string()).collect();
    if !nontrivial {
        v.push("database is almost trivial".into());
    }
    report(out, v, json!({ "dependencies": df.deps.deps.len(), "tuples": d.len() }))
}

// ---------------------------------------------------------------------------
// search

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Structure {
    Lattice,
    Ring,
    Group,
    Database,
}

pub struct SearchArgs<'a> {
    pub structure: Structure,
    pub input: &'a Path,
    pub p: u32,
    pub n: usize,
    pub d: usize,
    pub n_max: usize,
    pub watch: Vec<String>,
}

fn search_status<E>(outcome: &modcon::oracle::Outcome<E>) -> Status {
    if outcome.is_exhausted() {
        Status::Violation
    } else {
        Status::Ok
    }
}

fn outcome_line(witness: bool, nodes: u64) -> String {
    if witness {
        format!("witness ({nodes} nodes)")
    } else {
        format!("exhausted ({nodes} nodes)")
    }
}

pub fn search(a: SearchArgs<'_>, opts: &SearchOptions, out: &Out) -> Result<Status, CliError> {
    let stage = match a.structure {
        Structure::Lattice => Stage::Lattice,
        Structure::Ring => Stage::Ring,
        Structure::Group => Stage::Group,
        Structure::Database => Stage::Deps,
    };
    let art = read_artifact(a.input, Some(stage))?;
    let formula = Formula::of(&art)?;
    match (a.structure, formula) {
        (Structure::Lattice, Formula::Lattice(mut lf)) => {
            if !a.watch.is_empty() {
                lf.nontriviality = modcon::reductions::Nontriviality::SomeNonBottom { watch: a.watch };
            }
            let r = search_subspace_lattice(&lf, field(a.p)?, a.n, opts).map_err(oracle)?;
            out.emit(&r, || outcome_line(!r.outcome.is_exhausted(), r.stats.nodes))?;
            Ok(search_status(&r.outcome))
        }
        (Structure::Ring, Formula::Ring(sys)) => {
            let watch = if a.watch.is_empty() { sys.variables.clone() } else { a.watch };
            let r = search_ring(&sys, a.d, field(a.p)?, &watch, opts).map_err(oracle)?;
            out.emit(&r, || outcome_line(!r.outcome.is_exhausted(), r.stats.nodes))?;
            Ok(search_status(&r.outcome))
        }
        (Structure::Database, Formula::Deps(df)) => {
            let r = search_database(&df.deps, field(a.p)?, a.n, &df.attrs, opts).map_err(oracle)?;
            out.emit(&r, || outcome_line(!r.outcome.is_exhausted(), r.stats.nodes))?;
            Ok(search_status(&r.outcome))
        }
        (Structure::Group, Formula::Group(pres)) => {
            let found = search_sn(&pres, a.n_max).map_err(|e| match e {
                modcon::groups::GroupError::DegreeCap { .. } => CliError::Cap(e.to_string()),
                other => CliError::Failed(other.to_string()),
            })?;
            let v = match &found {
                Some(w) => json!({
                    "space": { "kind": "group", "carrier": format!("S_{}", w.n), "n_max": a.n_max },
                    "outcome": { "kind": "witness", "assignment": w.assignment },
                    "stats": { "nodes": w.nodes },
                }),
                None => json!({
                    "space": { "kind": "group", "carrier": format!("S_1..S_{}", a.n_max), "n_max": a.n_max },
                    "outcome": { "kind": "exhausted" },
                }),
            };
            out.emit(&v, || match &found {
                Some(w) => format!("witness in S_{}: {:?}", w.n, w.assignment),
                None => format!("exhausted up to S_{}", a.n_max),
            })?;
            Ok(if found.is_some() { Status::Ok } else { Status::Violation })
        }
        (s, _) => Err(CliError::Usage(format!("a {} artifact cannot be searched as {s:?}", art.stage))),
    }
}

// ---------------------------------------------------------------------------
// demo

pub fn demo(settings: &Settings, dump: Option<&Path>, out: &Out) -> Result<Status, CliError> {
    let opts = settings.search_options();
    let z3 = "gens x; rel x^3 = 1";
    let idem = "gens x; rel x = x^2";
    info!("z3 pipeline: threads={} seed={}", opts.threads, settings.seed);
    let run = constructive_pipeline(&parse_group_presentation(z3).expect("fixed"), 4).map_err(reduction)?;
    let (lf, _) = group_to_lattice(&parse_group_presentation(idem).expect("fixed"));
    let refutation = search_subspace_lattice(&lf, field(2)?, 4, &opts).map_err(oracle)?;
    let report = DemoReport { presentation: z3.into(), run, refuted: idem.into(), refutation };
    if let Some(dir) = dump {
        dump_demo(dir, &report)?;
    }
    let exhausted = report.refutation.outcome.is_exhausted();
    out.emit(&report, || {
        let r = &report.run;
        let mut lines = vec![format!("π = {{{}}}", report.presentation)];
        lines.push(format!("  group: permutation model in S_{} of order {}", r.degree, r.group_order));
        lines.push(format!("  representation: {}^{}, frame in Lt({}^{})", r.p, r.d, r.p, 4 * r.d));
        for a in &r.artifacts {
            lines.push(format!("  {:<8} {}  validated", a.stage.to_string(), &a.hash()[..16]));
        }
        lines.push(format!(
            "  database: {} attributes, {} tuples, dependencies hold, not almost trivial",
            r.database.attrs().len(),
            r.database.len()
        ));
        lines.push(format!(
            "π = {{{}}} in Lt(GF(2)^4): {}",
            report.refuted,
            outcome_line(!exhausted, report.refutation.stats.nodes)
        ));
        lines.join("\n")
    })?;
    Ok(if exhausted { Status::Ok } else { Status::Violation })
}

fn write_json<T: Serialize>(dir: &Path, name: &str, v: &T) -> Result<(), CliError> {
    let path = dir.join(name);
    let body = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    std::fs::write(&path, body).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn dump_demo(dir: &Path, report: &DemoReport) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    let r = &report.run;
    write_json(dir, "artifacts.json", &r.artifacts)?;
    for a in &r.artifacts {
        write_json(dir, &format!("{}.json", a.stage), a)?;
    }
    write_json(dir, "lattice_witness.json", &r.lattice_witness)?;
    write_json(dir, "database.json", &r.database)?;
    write_json(dir, "refutation.json", &report.refutation)
}
