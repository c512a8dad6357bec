//! Python bindings. Structured results cross the boundary as plain
//! dicts and lists (via JSON); matrices, subspaces and artifacts are classes.

use std::collections::BTreeMap;

use modcon::database::Database;
use modcon::ffmat::{FieldPrime, Matrix, Subspace};
use modcon::formulas::{parse_deps, parse_group_presentation, parse_lattice_conjunction, parse_ring_system};
use modcon::groups::{search_sn, GroupPresentation};
use modcon::lattice::{build_frame, check_frame as frame_violations, frame_axioms, FrameVars, SubspaceLattice};
use modcon::matring::{idempotents as idempotent_matrices, RingSystem};
use modcon::oracle::{search_database, search_ring, search_subspace_lattice, z3_demo as run_demo, SearchOptions};
use modcon::reductions::{
    group_to_lattice, lattice_to_relalg, lattice_to_ring, ring_to_gc, type1_to_deps, DepsFormula, LatticeFormula,
    PipelineArtifact, RelalgFormula, Stage,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, x: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(x).map_err(value_err)?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

fn from_py<T: DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let s: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(value_err)
}

fn field(p: u32) -> PyResult<FieldPrime> {
    FieldPrime::new(p).map_err(value_err)
}

fn options(threads: usize, node_cap: Option<u64>, size_cap: Option<u128>) -> SearchOptions {
    let d = SearchOptions::default();
    SearchOptions { threads, node_cap: node_cap.unwrap_or(d.node_cap), size_cap: size_cap.unwrap_or(d.size_cap), ..d }
}

/// Matrix over GF(p), acting on column vectors.
#[pyclass(name = "Matrix", module = "modcon", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyMatrix(Matrix);

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(rows: Vec<Vec<i64>>, p: u32) -> PyResult<Self> {
        Matrix::from_rows(field(p)?, &rows).map(PyMatrix).map_err(value_err)
    }

    #[staticmethod]
    fn identity(n: usize, p: u32) -> PyResult<Self> {
        Ok(PyMatrix(Matrix::identity(field(p)?, n)))
    }

    #[staticmethod]
    fn zeros(rows: usize, cols: usize, p: u32) -> PyResult<Self> {
        Ok(PyMatrix(Matrix::zeros(field(p)?, rows, cols)))
    }

    #[getter]
    fn p(&self) -> u32 {
        self.0.field().get()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn tolist(&self) -> Vec<Vec<u32>> {
        self.0.to_rows()
    }

    fn __add__(&self, o: PyRef<'_, Self>) -> PyResult<Self> {
        self.0.add(&o.0).map(PyMatrix).map_err(value_err)
    }

    fn __sub__(&self, o: PyRef<'_, Self>) -> PyResult<Self> {
        self.0.sub(&o.0).map(PyMatrix).map_err(value_err)
    }

    fn __neg__(&self) -> Self {
        PyMatrix(self.0.neg())
    }

    fn __matmul__(&self, o: PyRef<'_, Self>) -> PyResult<Self> {
        self.0.mul(&o.0).map(PyMatrix).map_err(value_err)
    }

    fn transpose(&self) -> Self {
        PyMatrix(self.0.transpose())
    }

    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn rref(&self) -> Self {
        PyMatrix(self.0.rref())
    }

    fn inverse(&self) -> Option<Self> {
        self.0.inverse().map(PyMatrix)
    }

    fn quasi_inverse(&self) -> PyResult<Self> {
        self.0.quasi_inverse().map(PyMatrix).map_err(value_err)
    }

    fn kernel(&self) -> PySubspace {
        PySubspace(self.0.kernel())
    }

    fn column_space(&self) -> PySubspace {
        PySubspace(Subspace::column_space(&self.0))
    }

    fn is_idempotent(&self) -> bool {
        modcon::matring::is_idempotent(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Matrix({:?}, p={})", self.0.to_rows(), self.p())
    }
}

/// Subspace of GF(p)^n.
#[pyclass(name = "Subspace", module = "modcon", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PySubspace(Subspace);

#[pymethods]
impl PySubspace {
    #[new]
    fn new(vectors: Vec<Vec<i64>>, ambient: usize, p: u32) -> PyResult<Self> {
        Subspace::span(field(p)?, ambient, &vectors).map(PySubspace).map_err(value_err)
    }

    #[staticmethod]
    fn zero(ambient: usize, p: u32) -> PyResult<Self> {
        Ok(PySubspace(Subspace::zero(field(p)?, ambient)))
    }

    #[staticmethod]
    fn full(ambient: usize, p: u32) -> PyResult<Self> {
        Ok(PySubspace(Subspace::full(field(p)?, ambient)))
    }

    /// Number of subspaces of GF(p)^n.
    #[staticmethod]
    fn count(p: u32, n: usize) -> PyResult<u128> {
        Ok(Subspace::count_all(field(p)?, n))
    }

    #[staticmethod]
    #[pyo3(signature = (p, n, cap = 100_000))]
    fn enumerate(p: u32, n: usize, cap: u128) -> PyResult<Vec<Self>> {
        let all = Subspace::enumerate_all(field(p)?, n, cap).map_err(value_err)?;
        Ok(all.into_iter().map(PySubspace).collect())
    }

    #[getter]
    fn p(&self) -> u32 {
        self.0.field().get()
    }

    #[getter]
    fn ambient(&self) -> usize {
        self.0.ambient_dim()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn basis(&self) -> Vec<Vec<u32>> {
        self.0.basis().to_rows()
    }

    fn join(&self, o: PyRef<'_, Self>) -> PyResult<Self> {
        self.0.sum(&o.0).map(PySubspace).map_err(value_err)
    }

    fn meet(&self, o: PyRef<'_, Self>) -> PyResult<Self> {
        self.0.meet(&o.0).map(PySubspace).map_err(value_err)
    }

    fn __contains__(&self, v: Vec<i64>) -> PyResult<bool> {
        if v.len() != self.0.ambient_dim() {
            return Err(PyValueError::new_err(format!("vector of length {}, expected {}", v.len(), self.0.ambient_dim())));
        }
        let f = self.0.field();
        Ok(self.0.contains_vector(&v.iter().map(|&x| f.reduce(x)).collect::<Vec<_>>()))
    }

    fn is_subspace_of(&self, o: PyRef<'_, Self>) -> bool {
        self.0.is_subspace_of(&o.0)
    }

    fn __repr__(&self) -> String {
        format!("Subspace({:?}, ambient={}, p={})", self.basis(), self.ambient(), self.p())
    }
}

/// Formula at one pipeline stage, with its provenance chain.
#[pyclass(name = "Artifact", module = "modcon", eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyArtifact(PipelineArtifact);

fn stage(s: &str) -> PyResult<Stage> {
    s.parse().map_err(PyValueError::new_err)
}

fn payload<T: DeserializeOwned>(a: &PipelineArtifact) -> PyResult<T> {
    a.payload().map_err(value_err)
}

#[pymethods]
impl PyArtifact {
    /// Parses text in the grammar of `stage` (group, lattice, ring or deps).
    #[staticmethod]
    fn parse(text: &str, stage_name: &str) -> PyResult<Self> {
        let s = stage(stage_name)?;
        let art = match s {
            Stage::Group => PipelineArtifact::new(s, &parse_group_presentation(text).map_err(value_err)?, vec![]),
            Stage::Lattice => {
                let conj = parse_lattice_conjunction(text).map_err(value_err)?;
                PipelineArtifact::new(s, &LatticeFormula::plain(conj), vec![])
            }
            Stage::Ring => PipelineArtifact::new(s, &parse_ring_system(text).map_err(value_err)?, vec![]),
            Stage::Deps => {
                let deps = parse_deps(text).map_err(value_err)?;
                PipelineArtifact::new(s, &DepsFormula { attrs: deps.attrs(), deps }, vec![])
            }
            Stage::Relalg | Stage::Gc => return Err(PyValueError::new_err(format!("the {s} stage has no text form"))),
        };
        Ok(PyArtifact(art))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyArtifact).map_err(value_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(value_err)
    }

    #[getter]
    fn stage(&self) -> &'static str {
        self.0.stage.name()
    }

    #[getter]
    fn hash(&self) -> String {
        self.0.hash()
    }

    #[getter]
    fn formula(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.formula)
    }

    #[getter]
    fn provenance(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.0.provenance)
    }

    /// Applies the pipeline edge from this stage to `to`.
    #[pyo3(signature = (to, nabla = false))]
    fn reduce(&self, to: &str, nabla: bool) -> PyResult<Self> {
        let a = &self.0;
        let to = stage(to)?;
        let out = match (a.stage, to) {
            (Stage::Group, Stage::Lattice) => {
                let (lf, fresh) = group_to_lattice(&payload::<GroupPresentation>(a)?);
                a.derive(to, "group_to_lattice", &lf, fresh)
            }
            (Stage::Lattice, Stage::Ring) => {
                let (sys, fresh) = lattice_to_ring(&payload::<LatticeFormula>(a)?.conjunction);
                a.derive(to, "lattice_to_ring", &sys, fresh)
            }
            (Stage::Lattice, Stage::Relalg) => {
                let (rf, fresh) = lattice_to_relalg(&payload::<LatticeFormula>(a)?.conjunction, nabla);
                a.derive(to, "lattice_to_relalg", &rf, fresh)
            }
            (Stage::Relalg, Stage::Deps) => {
                let df = type1_to_deps(&payload::<RelalgFormula>(a)?).map_err(value_err)?;
                a.derive(to, "type1_to_deps", &df, vec![])
            }
            (Stage::Ring, Stage::Gc) => a.derive(to, "ring_to_gc", &ring_to_gc(&payload::<RingSystem>(a)?), vec![]),
            (from, to) => return Err(PyValueError::new_err(format!("no reduction from {from} to {to}"))),
        };
        Ok(PyArtifact(out))
    }

    /// Failing equations of a lattice artifact under an assignment of subspaces.
    fn check_lattice(&self, py: Python<'_>, assignment: BTreeMap<String, PyRef<'_, PySubspace>>) -> PyResult<Py<PyAny>> {
        let lf: LatticeFormula = payload(&self.0)?;
        let asg: BTreeMap<String, Subspace> = assignment.into_iter().map(|(k, v)| (k, v.0.clone())).collect();
        let first = asg.values().next().ok_or_else(|| PyValueError::new_err("empty assignment"))?;
        let l = SubspaceLattice::new(first.field(), first.ambient_dim());
        let full = lf.complete(&asg, &l).map_err(value_err)?;
        let (failing, nontrivial) = lf.check(&full, &l).map_err(value_err)?;
        let failing: Vec<String> = failing.iter().map(|&i| lf.conjunction.equations[i].to_string()).collect();
        to_py(py, &serde_json::json!({ "failing": failing, "nontrivial": nontrivial }))
    }

    /// Failing dependencies of a deps artifact on a database (as a dict).
    fn check_deps(&self, py: Python<'_>, database: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let df: DepsFormula = payload(&self.0)?;
        let db: Database = from_py(py, database)?;
        let (failing, nontrivial) = df.check(&db);
        let failing: Vec<String> = failing.iter().map(|&i| df.deps.deps[i].to_string()).collect();
        to_py(py, &serde_json::json!({ "failing": failing, "not_almost_trivial": nontrivial }))
    }

    fn __repr__(&self) -> String {
        format!("Artifact(stage={}, hash={}, steps={})", self.0.stage, &self.0.hash()[..12], self.0.provenance.len())
    }
}

/// Search for a nontrivial model. `structure` is lattice (Lt(GF(p)^n)),
/// ring (M_d(GF(p))), database (over GF(p)^n) or group (S_1..S_n_max).
#[pyfunction]
#[pyo3(signature = (artifact, structure, p = 2, n = 4, d = 2, n_max = 4, threads = 1, node_cap = None, size_cap = None))]
#[allow(clippy::too_many_arguments)]
fn search(
    py: Python<'_>,
    artifact: PyRef<'_, PyArtifact>,
    structure: &str,
    p: u32,
    n: usize,
    d: usize,
    n_max: usize,
    threads: usize,
    node_cap: Option<u64>,
    size_cap: Option<u128>,
) -> PyResult<Py<PyAny>> {
    let a = artifact.0.clone();
    let opts = options(threads, node_cap, size_cap);
    let runtime = |e: modcon::oracle::OracleError| PyRuntimeError::new_err(e.to_string());
    match structure {
        "lattice" => {
            let lf: LatticeFormula = payload(&a)?;
            let r = py.detach(|| search_subspace_lattice(&lf, field(p)?, n, &opts).map_err(runtime))?;
            to_py(py, &r)
        }
        "ring" => {
            let sys: RingSystem = payload(&a)?;
            let watch = sys.variables.clone();
            let r = py.detach(|| search_ring(&sys, d, field(p)?, &watch, &opts).map_err(runtime))?;
            to_py(py, &r)
        }
        "database" => {
            let df: DepsFormula = payload(&a)?;
            let r = py.detach(|| search_database(&df.deps, field(p)?, n, &df.attrs, &opts).map_err(runtime))?;
            to_py(py, &r)
        }
        "group" => {
            let pres: GroupPresentation = payload(&a)?;
            let r = py.detach(|| search_sn(&pres, n_max)).map_err(value_err)?;
            to_py(py, &r)
        }
        other => Err(PyValueError::new_err(format!("unknown structure `{other}`"))),
    }
}

/// Violated axioms of the canonical frame in Lt(GF(p)^{4d}).
#[pyfunction]
#[pyo3(signature = (p = 2, d = 1))]
fn check_frame(p: u32, d: usize) -> PyResult<Vec<String>> {
    let (l, f) = build_frame(field(p)?, d).map_err(value_err)?;
    Ok(frame_violations(&f, &l).iter().map(|v| v.to_string()).collect())
}

#[pyfunction]
fn frame_axiom_count() -> usize {
    frame_axioms(&FrameVars::default()).len()
}

#[pyfunction]
#[pyo3(signature = (d, p, cap = 1 << 20))]
fn idempotents(d: usize, p: u32, cap: u128) -> PyResult<Vec<PyMatrix>> {
    let all = idempotent_matrices(d, field(p)?, cap).map_err(value_err)?;
    Ok(all.into_iter().map(PyMatrix).collect())
}

/// `x³ = e` through every stage, and the refutation of `x = x²`.
#[pyfunction]
#[pyo3(signature = (threads = 1))]
fn z3_demo(py: Python<'_>, threads: usize) -> PyResult<Py<PyAny>> {
    let opts = options(threads, None, None);
    let r = py.detach(|| run_demo(&opts)).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &r)
}

#[pymodule]
#[pyo3(name = "modcon")]
fn py_modcon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_class::<PySubspace>()?;
    m.add_class::<PyArtifact>()?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(check_frame, m)?)?;
    m.add_function(wrap_pyfunction!(frame_axiom_count, m)?)?;
    m.add_function(wrap_pyfunction!(idempotents, m)?)?;
    m.add_function(wrap_pyfunction!(z3_demo, m)?)?;
    Ok(())
}
