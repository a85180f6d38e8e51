//! Python bindings: `fpop.Solver` and `fpop.check`.

use std::collections::BTreeMap;

use fpop_core::engine::{Schedule, Solver as CoreSolver, SolverStats};
use fpop_core::lang::compile;
use fpop_core::lattice::Value;
use fpop_core::planner::plan;
use pyo3::exceptions::{PyKeyError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyFrozenSet, PyInt, PyList, PySet, PyString, PyTuple};
use serde_json::Value as Json;

fn to_json(obj: &Bound<'_, PyAny>) -> PyResult<Json> {
    if obj.is_instance_of::<PyBool>() {
        return Ok(Json::Bool(obj.extract()?));
    }
    if obj.is_instance_of::<PyInt>() {
        return match obj.extract::<i64>() {
            Ok(i) => Ok(Json::from(i)),
            Err(_) => Ok(Json::from(obj.extract::<u64>()?)),
        };
    }
    if obj.is_instance_of::<PyFloat>() && obj.extract::<f64>()?.is_infinite() {
        return Ok(Json::String("inf".into()));
    }
    if obj.is_instance_of::<PyString>() {
        return Ok(Json::String(obj.extract()?));
    }
    if obj.is_instance_of::<PyList>() || obj.is_instance_of::<PyTuple>() || obj.is_instance_of::<PySet>() || obj.is_instance_of::<PyFrozenSet>() {
        let mut items = Vec::new();
        for x in obj.try_iter()? {
            items.push(to_json(&x?)?);
        }
        return Ok(Json::Array(items));
    }
    Err(PyTypeError::new_err(format!("cannot convert {} to a fact argument", obj.get_type().name()?)))
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Int(i) => i.into_pyobject(py)?.into_any(),
        Value::Nat(fpop_core::lattice::ExtNat::Fin(n)) => n.into_pyobject(py)?.into_any(),
        Value::Nat(fpop_core::lattice::ExtNat::Inf) => PyFloat::new(py, f64::INFINITY).into_any(),
        Value::Sym(s) => PyString::new(py, s.as_str()).into_any(),
        Value::Tuple(items) => PyTuple::new(py, items.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?)?.into_any(),
        Value::Set(s) => PyFrozenSet::new(py, s.items().iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?)?.into_any(),
        Value::Partition(p) => {
            let blocks = p
                .blocks()
                .iter()
                .map(|b| PyFrozenSet::new(py, b.iter().map(|s| s.as_str())))
                .collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, blocks)?.into_any()
        }
    })
}

fn stats_dict<'py>(py: Python<'py>, s: &SolverStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("popped", s.popped)?;
    d.set_item("discarded", s.discarded)?;
    d.set_item("applied", s.applied)?;
    d.set_item("firings", s.firings.clone())?;
    d.set_item("strict_updates", s.strict_updates.clone())?;
    d.set_item("wall_time_ms", s.wall_time_ms)?;
    Ok(d)
}

fn parse_schedule(schedule: &str, seed: Option<u64>) -> PyResult<Schedule> {
    match (schedule, seed) {
        ("random", Some(seed)) => Ok(Schedule::Random(seed)),
        ("random", None) => Err(PyValueError::new_err("the random schedule needs a seed")),
        (s, _) => s.parse().map_err(PyValueError::new_err),
    }
}

/// A program together with its facts database.
#[pyclass(name = "Solver", unsendable)]
struct PySolver {
    inner: CoreSolver,
}

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (source, consts = None))]
    fn new(source: &str, consts: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let tp = compile(source).map_err(|d| PyValueError::new_err(render(&d)))?;
        let plan = plan(tp).map_err(|d| PyValueError::new_err(render(&d)))?;
        let mut bound = BTreeMap::new();
        if let Some(consts) = consts {
            for (k, v) in consts.iter() {
                let name: String = k.extract()?;
                let c = plan
                    .program
                    .consts
                    .iter()
                    .find(|c| c.name == name)
                    .ok_or_else(|| PyKeyError::new_err(format!("no const `{name}`")))?;
                let value = Value::from_json(&c.ty, &to_json(&v)?).map_err(|e| PyValueError::new_err(e.to_string()))?;
                bound.insert(name, value);
            }
        }
        let inner = CoreSolver::new(plan, &bound).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PySolver { inner })
    }

    /// Inserts one fact; returns whether it added information.
    fn insert(&mut self, relation: &str, args: &Bound<'_, PyAny>) -> PyResult<bool> {
        let args = match to_json(args)? {
            Json::Array(items) => items,
            _ => return Err(PyTypeError::new_err("args must be a list or tuple")),
        };
        self.inner
            .insert_json(relation, &args)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[pyo3(signature = (workers = 1, schedule = "priority", seed = None))]
    fn solve<'py>(&mut self, py: Python<'py>, workers: usize, schedule: &str, seed: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
        if workers == 0 {
            return Err(PyValueError::new_err("workers must be at least 1"));
        }
        self.inner.set_schedule(parse_schedule(schedule, seed)?);
        let stats = self.inner.solve(workers);
        stats_dict(py, &stats)
    }

    fn solve_naive<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let stats = self.inner.solve_naive();
        stats_dict(py, &stats)
    }

    /// Facts of a relation as argument tuples, optionally filtered by a
    /// pattern where `None` matches anything.
    #[pyo3(signature = (relation, pattern = None))]
    fn query<'py>(&self, py: Python<'py>, relation: &str, pattern: Option<&Bound<'py, PyAny>>) -> PyResult<Vec<Bound<'py, PyTuple>>> {
        let facts = match pattern {
            None => self.inner.facts(relation),
            Some(p) => {
                let rel = self
                    .inner
                    .program()
                    .relation_id(relation)
                    .map(|r| &self.inner.program().relations[r])
                    .ok_or_else(|| PyKeyError::new_err(format!("unknown relation `{relation}`")))?;
                let items: Vec<Bound<'py, PyAny>> = p.try_iter()?.collect::<PyResult<_>>()?;
                let cols: Vec<usize> = if items.len() == rel.key_cols.len() {
                    rel.key_cols.clone()
                } else {
                    (0..items.len()).collect()
                };
                let mut pat = Vec::new();
                for (x, &c) in items.iter().zip(&cols) {
                    pat.push(if x.is_none() {
                        None
                    } else {
                        let ty = rel.args.get(c).map(|a| a.ty()).ok_or_else(|| PyValueError::new_err("pattern too long"))?;
                        Some(Value::from_json(&ty, &to_json(x)?).map_err(|e| PyValueError::new_err(e.to_string()))?)
                    });
                }
                self.inner.query(relation, &pat)
            }
        }
        .map_err(|e| PyKeyError::new_err(e.to_string()))?;
        facts
            .iter()
            .map(|f| PyTuple::new(py, f.args.iter().map(|a| to_py(py, a)).collect::<PyResult<Vec<_>>>()?))
            .collect()
    }

    /// Canonical text dump of every fact.
    fn dump(&self) -> String {
        self.inner.canonical_dump()
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        stats_dict(py, &self.inner.stats())
    }

    /// Number of strict updates a full naive pass would still make.
    fn audit(&self) -> u64 {
        self.inner.audit_fixpoint()
    }

    fn __len__(&self) -> usize {
        self.inner.fact_count()
    }
}

fn render(diags: &[fpop_core::lang::Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

/// Validates and plans a program; returns its diagnostics, empty when it
/// is accepted.
#[pyfunction]
fn check(source: &str) -> Vec<String> {
    match compile(source) {
        Err(d) => d.iter().map(|d| d.to_string()).collect(),
        Ok(tp) => match plan(tp) {
            Err(d) => d.iter().map(|d| d.to_string()).collect(),
            Ok(_) => Vec::new(),
        },
    }
}

#[pymodule]
fn fpop(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySolver>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    for (name, src) in fpop_core::corpus::PROGRAMS {
        m.add(name.to_uppercase().as_str(), *src)?;
    }
    Ok(())
}
