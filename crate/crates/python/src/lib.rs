//! Python bindings: `Graph`, `Index`, and the dense reference solvers.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use pyo3::exceptions::{PyIOError, PyIndexError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use bdindex::index::format;
use bdindex::{oracle, BDIndex, EdgeListFormat, Strategy};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_error(path: &str, e: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(format!("{path}: {e}"))
}

/// Connected undirected graph with positive edge weights.
#[pyclass(frozen, module = "pybdindex")]
struct Graph {
    inner: bdindex::Graph,
}

#[pymethods]
impl Graph {
    /// Graph on vertices `0..n` from `(u, w)` or `(u, w, weight)` tuples.
    #[new]
    #[pyo3(signature = (n, edges))]
    fn new(n: usize, edges: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let mut list = Vec::with_capacity(edges.len());
        for e in edges {
            let triple = match e.extract::<(usize, usize, f64)>() {
                Ok(t) => t,
                Err(_) => {
                    let (u, w) = e.extract::<(usize, usize)>()?;
                    (u, w, 1.0)
                }
            };
            list.push(triple);
        }
        let inner = bdindex::Graph::from_edges(n, &list).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Reads a plain (`u w [weight]`) or DIMACS (`dimacs`) edge list.
    #[staticmethod]
    #[pyo3(signature = (path, format = "plain"))]
    fn load(path: &str, format: &str) -> PyResult<Self> {
        let format: EdgeListFormat = format.parse().map_err(value_error)?;
        let file = File::open(path).map_err(|e| io_error(path, e))?;
        let inner = bdindex::load_edge_list(BufReader::new(file), format).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn label(&self, v: usize) -> PyResult<String> {
        if v >= self.inner.n() {
            return Err(PyIndexError::new_err(v));
        }
        Ok(self.inner.label(v).to_string())
    }

    fn id_of(&self, label: &str) -> PyResult<usize> {
        self.inner
            .id_of(label)
            .ok_or_else(|| PyKeyError::new_err(label.to_string()))
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().collect()
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Biharmonic-distance index built over a vertex hierarchy.
#[pyclass(frozen, module = "pybdindex")]
struct Index {
    inner: BDIndex,
}

fn check(idx: &BDIndex, v: usize) -> PyResult<()> {
    if v >= idx.n() {
        return Err(PyIndexError::new_err(format!(
            "vertex id {v} out of range for an index with {} vertices",
            idx.n()
        )));
    }
    Ok(())
}

#[pymethods]
impl Index {
    /// Builds the index with the `separator` or `min-degree` hierarchy.
    #[staticmethod]
    #[pyo3(signature = (graph, strategy = "separator"))]
    fn build(py: Python<'_>, graph: &Graph, strategy: &str) -> PyResult<Self> {
        let strategy: Strategy = strategy.parse().map_err(value_error)?;
        let g = &graph.inner;
        let inner = py
            .detach(|| {
                let tree = bdindex::build_hierarchy(g, strategy).map_err(|e| e.to_string())?;
                bdindex::build_index(g, tree).map_err(|e| e.to_string())
            })
            .map_err(PyValueError::new_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| io_error(path, e))?;
        let inner = format::deserialize(BufReader::new(file)).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Writes the index and returns the number of bytes.
    fn save(&self, path: &str) -> PyResult<u64> {
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        format::serialize(&self.inner, BufWriter::new(file)).map_err(|e| io_error(path, e))
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, pyo3::types::PyBytes> {
        pyo3::types::PyBytes::new(py, &format::to_bytes(&self.inner))
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let inner = format::from_bytes(data).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.stats().height
    }

    #[getter]
    fn entries(&self) -> usize {
        self.inner.total_entries()
    }

    #[getter]
    fn root(&self) -> usize {
        self.inner.root()
    }

    fn parents(&self) -> Vec<usize> {
        self.inner.tree().parents().to_vec()
    }

    /// `(m, f)` for vertex `v`, with `m` over the subtree of `v` in DFS order.
    fn node_label(&self, v: usize) -> PyResult<(Vec<f64>, f64)> {
        check(&self.inner, v)?;
        let l = self.inner.label(v);
        Ok((l.m.to_vec(), l.f))
    }

    fn id_of(&self, label: &str) -> PyResult<usize> {
        self.inner
            .id_of(label)
            .ok_or_else(|| PyKeyError::new_err(label.to_string()))
    }

    /// Distance between vertex ids `s` and `t`.
    fn query(&self, s: usize, t: usize) -> PyResult<f64> {
        check(&self.inner, s)?;
        check(&self.inner, t)?;
        bdindex::query_bd(&self.inner, s, t)
            .map(|r| r.bd)
            .map_err(value_error)
    }

    /// Distance between two external vertex labels.
    fn query_labels(&self, s: &str, t: &str) -> PyResult<f64> {
        let (s, t) = (self.id_of(s)?, self.id_of(t)?);
        self.query(s, t)
    }

    /// Distances for a list of `(s, t)` id pairs, in order.
    fn batch(&self, py: Python<'_>, pairs: Vec<(usize, usize)>) -> PyResult<Vec<f64>> {
        let idx = &self.inner;
        py.detach(|| bdindex::batch_query(idx, &pairs))
            .map(|rs| rs.into_iter().map(|r| r.bd).collect())
            .map_err(value_error)
    }

    /// `τ̃_s` indexed by vertex id.
    fn tau(&self, s: usize) -> PyResult<Vec<f64>> {
        check(&self.inner, s)?;
        let mut tau = bdindex::TauVector::new(self.inner.n());
        bdindex::accumulate_tau(&self.inner, s, &mut tau).map_err(value_error)?;
        Ok(tau.to_vertex_order(&self.inner))
    }

    /// `(u, w, bd)` for the `top_k` edges with the largest distance.
    #[pyo3(signature = (graph, top_k = None))]
    fn edge_centrality(&self, py: Python<'_>, graph: &Graph, top_k: Option<usize>) -> PyResult<Vec<(usize, usize, f64)>> {
        let (idx, g) = (&self.inner, &graph.inner);
        idx.check_graph(g).map_err(value_error)?;
        let scores = py
            .detach(|| bdindex::edge_centrality(idx, g, top_k.unwrap_or(usize::MAX)))
            .map_err(value_error)?;
        Ok(scores.into_iter().map(|e| (e.u, e.w, e.bd)).collect())
    }

    /// Raises `ValueError` unless the index was built from `graph`.
    fn check_graph(&self, graph: &Graph) -> PyResult<()> {
        self.inner.check_graph(&graph.inner).map_err(value_error)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "Index(n={}, height={}, entries={})",
            self.inner.n(),
            self.inner.stats().height,
            self.inner.total_entries()
        )
    }
}

/// Dense pseudoinverse reference value.
#[pyfunction]
fn pseudoinverse_bd(graph: &Graph, s: usize, t: usize) -> PyResult<f64> {
    oracle::pseudoinverse_bd(&graph.inner, s, t).map_err(value_error)
}

/// Dense reference value through the Laplacian grounded at `v`.
#[pyfunction]
fn grounded_bd(graph: &Graph, v: usize, s: usize, t: usize) -> PyResult<f64> {
    oracle::grounded_bd(&graph.inner, v, s, t).map_err(value_error)
}

/// Random-walk series estimate; returns `(value, steps)`.
#[pyfunction]
fn walk_bd(graph: &Graph, s: usize, t: usize) -> PyResult<(f64, usize)> {
    oracle::walk_bd(&graph.inner, s, t)
        .map(|e| (e.value, e.steps))
        .map_err(value_error)
}

#[pymodule]
fn pybdindex(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Index>()?;
    m.add_function(wrap_pyfunction!(pseudoinverse_bd, m)?)?;
    m.add_function(wrap_pyfunction!(grounded_bd, m)?)?;
    m.add_function(wrap_pyfunction!(walk_bd, m)?)?;
    Ok(())
}
