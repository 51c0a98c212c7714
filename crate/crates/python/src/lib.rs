//! Python bindings: `import multicolor_py`.

use std::collections::BTreeMap;

use multicolor::coloring::{self, BoundCertificate, EdgeColoring};
use multicolor::generate::Family;
use multicolor::pipeline::{self, PipelineConfig};
use multicolor::reduction::{self, ReduceConfig};
use multicolor::{format, invariants, EdgeId};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Loopless multigraph on vertices `0..n`; edge ids follow insertion order.
#[pyclass(name = "Multigraph", module = "multicolor_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMultigraph {
    inner: multicolor::Multigraph,
}

#[pymethods]
impl PyMultigraph {
    #[new]
    #[pyo3(signature = (n, edges = Vec::new()))]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let inner = multicolor::Multigraph::from_pairs(n, &edges).map_err(value_err)?;
        Ok(PyMultigraph { inner })
    }

    /// Parses the `p mgraph n m` text format (1-based vertices).
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = format::parse_multigraph(text).map_err(value_err)?;
        Ok(PyMultigraph { inner })
    }

    fn to_text(&self) -> String {
        format::emit_multigraph(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.edge_count()
    }

    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    /// `(id, u, v)` triples with `u < v`.
    fn edges(&self) -> Vec<(u32, usize, usize)> {
        self.inner.edges().iter().map(|e| (e.id.0, e.u, e.v)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.edge_count()
    }

    fn __repr__(&self) -> String {
        format!("Multigraph(n={}, m={})", self.inner.vertex_count(), self.inner.edge_count())
    }
}

#[pyclass(name = "Certificate", module = "multicolor_py", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCertificate {
    n: usize,
    phi: u64,
    colors_used: usize,
    bound_value: f64,
    bound_floor: u64,
    applicable: bool,
    satisfied: bool,
}

impl From<&BoundCertificate> for PyCertificate {
    fn from(c: &BoundCertificate) -> Self {
        PyCertificate {
            n: c.n,
            phi: c.phi,
            colors_used: c.colors_used,
            bound_value: c.bound_value,
            bound_floor: c.bound_floor,
            applicable: c.applicable,
            satisfied: c.satisfied,
        }
    }
}

#[pymethods]
impl PyCertificate {
    fn __repr__(&self) -> String {
        format!(
            "Certificate(phi={}, colors_used={}, bound_floor={}, satisfied={})",
            self.phi,
            self.colors_used,
            self.bound_floor,
            if self.satisfied { "True" } else { "False" }
        )
    }
}

#[pyclass(name = "ColorResult", module = "multicolor_py", frozen, get_all)]
pub struct PyColorResult {
    /// Edge id to color.
    coloring: BTreeMap<u32, u32>,
    colors_used: usize,
    certificate: PyCertificate,
    /// Decomposition trace as JSON lines, empty for trivial inputs.
    trace: String,
    sound: bool,
}

fn to_map(c: &EdgeColoring) -> BTreeMap<u32, u32> {
    c.iter().map(|(e, col)| (e.0, col)).collect()
}

fn config(terminal_order: usize, fallback: bool) -> ReduceConfig {
    ReduceConfig {
        terminal_order,
        fallback,
        ..ReduceConfig::default()
    }
}

/// `φ = max(Δ, ⌈Γ⌉)`.
#[pyfunction]
fn phi(g: &PyMultigraph) -> PyResult<u64> {
    invariants::phi(&g.inner).map_err(value_err)
}

/// `(Δ, Γ as (num, den) or None, φ)`.
#[pyfunction]
fn invariant_report(g: &PyMultigraph) -> PyResult<(u64, Option<(i64, i64)>, u64)> {
    let r = invariants::report(&g.inner).map_err(value_err)?;
    Ok((r.delta, r.gamma.map(|t| (*t.numer(), *t.denom())), r.phi))
}

#[pyfunction]
#[pyo3(signature = (g, terminal_order = 8, fallback = false))]
fn color(g: &PyMultigraph, terminal_order: usize, fallback: bool) -> PyResult<PyColorResult> {
    let cfg = PipelineConfig {
        reduce: config(terminal_order, fallback),
    };
    let out = pipeline::color(&g.inner, &cfg).map_err(|e| {
        if e.is_state_violation() {
            runtime_err(e)
        } else {
            value_err(e)
        }
    })?;
    Ok(PyColorResult {
        coloring: to_map(&out.coloring),
        colors_used: out.colors_used(),
        certificate: (&out.certificate).into(),
        trace: out.tree.as_ref().map(format::emit_trace).unwrap_or_default(),
        sound: out.is_sound(),
    })
}

/// Second stage alone; the root is taken as one matching below a graph of order `origin_n`.
#[pyfunction]
#[pyo3(signature = (g, origin_n, terminal_order = 8, fallback = false))]
fn reduce_stage2(g: &PyMultigraph, origin_n: usize, terminal_order: usize, fallback: bool) -> PyResult<BTreeMap<u32, u32>> {
    let tree = reduction::reduce_stage2(&g.inner, origin_n, &config(terminal_order, fallback)).map_err(|e| match e {
        reduction::ReductionError::StateViolation(_) => runtime_err(e),
        e => value_err(e),
    })?;
    let c = coloring::reconstruct(&tree).map_err(runtime_err)?;
    Ok(to_map(&c))
}

/// `(χ', coloring)` by branch and bound.
#[pyfunction]
#[pyo3(signature = (g, max_edges = coloring::DEFAULT_ORACLE_EDGES))]
fn exact_chromatic_index(g: &PyMultigraph, max_edges: usize) -> PyResult<(u32, BTreeMap<u32, u32>)> {
    let (x, c) = coloring::exact_chromatic_index_with(&g.inner, max_edges, coloring::DEFAULT_ORACLE_BUDGET)
        .map_err(value_err)?;
    Ok((x, to_map(&c)))
}

/// Checks properness and the bound; raises `ValueError` if improper.
#[pyfunction]
fn certify(g: &PyMultigraph, coloring: BTreeMap<u32, u32>) -> PyResult<PyCertificate> {
    let c = EdgeColoring::from_map(coloring.into_iter().map(|(e, col)| (EdgeId(e), col)).collect());
    let cert = coloring::certify(&g.inner, &c).map_err(value_err)?;
    Ok((&cert).into())
}

#[pyfunction]
fn bound_floor(n: usize, phi: u64) -> PyResult<u64> {
    if n < 3 {
        return Err(PyValueError::new_err("the bound needs at least 3 vertices"));
    }
    Ok(coloring::bound_floor(n, phi))
}

/// Instance from a family string such as `"random 10 4 0.5"`.
#[pyfunction]
#[pyo3(signature = (family, seed = 0))]
fn generate(family: &str, seed: u64) -> PyResult<PyMultigraph> {
    let f: Family = family.parse().map_err(value_err)?;
    let inner = f.generate(seed).map_err(value_err)?;
    Ok(PyMultigraph { inner })
}

#[pymodule]
fn multicolor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMultigraph>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyColorResult>()?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_report, m)?)?;
    m.add_function(wrap_pyfunction!(color, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_stage2, m)?)?;
    m.add_function(wrap_pyfunction!(exact_chromatic_index, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(bound_floor, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
