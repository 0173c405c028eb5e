//! Python bindings: instances, the three solvers, k-means and the circuit
//! error estimate. Results come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use qaco::error_model::{GateCount, LayerSpec};
use qaco::tsplib::EdgeWeightType;
use qaco::{AcoParams, HybridConfig, LeafSolver, MetricMode, NoiseKind, NoiseSpec, QacoParams, Refinement, Tour};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn metric(s: &str) -> PyResult<MetricMode> {
    match s {
        "canonical" => Ok(MetricMode::TsplibCanonical),
        "paper" => Ok(MetricMode::PlainEuclidean),
        _ => Err(err(format!("unknown metric `{s}` (expected canonical or paper)"))),
    }
}

fn noise(kind: &str, rate: f64) -> PyResult<NoiseSpec> {
    let kind: NoiseKind = kind.parse().map_err(err)?;
    NoiseSpec::new(kind, if kind == NoiseKind::None { 0.0 } else { rate }).map_err(err)
}

/// A TSP instance with 2-D coordinates.
#[pyclass(name = "Instance", module = "qaco_py", frozen)]
struct PyInstance {
    inner: qaco::Instance,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (name, coords, edge_weight_type = "EUC_2D"))]
    fn new(name: &str, coords: Vec<(f64, f64)>, edge_weight_type: &str) -> PyResult<Self> {
        let ewt = match edge_weight_type {
            "EUC_2D" => EdgeWeightType::Euc2d,
            "GEO" => EdgeWeightType::Geo,
            other => return Err(err(format!("unsupported edge weight type `{other}`"))),
        };
        Ok(Self { inner: qaco::Instance::new(name, ewt, coords).map_err(err)? })
    }

    /// Parse TSPLIB text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: qaco::parse_instance(text).map_err(err)? })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(err)?;
        Self::parse(&text)
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed = 42, bound = 1000.0))]
    fn random(n: usize, seed: u64, bound: f64) -> PyResult<Self> {
        Ok(Self { inner: qaco::gen_random_instance(n, seed, bound).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn edge_weight_type(&self) -> &'static str {
        self.inner.edge_weight_type().as_str()
    }

    #[getter]
    fn coords(&self) -> Vec<(f64, f64)> {
        self.inner.coords().to_vec()
    }

    #[pyo3(signature = (i, j, metric = "canonical"))]
    fn distance(&self, i: usize, j: usize, metric: &str) -> PyResult<f64> {
        self.inner.distance(i, j, self::metric(metric)?).map_err(err)
    }

    #[pyo3(signature = (tour, metric = "canonical"))]
    fn tour_length(&self, tour: Vec<usize>, metric: &str) -> PyResult<f64> {
        let tour = Tour::new(tour).map_err(err)?;
        self.inner.tour_length(&tour, self::metric(metric)?).map_err(err)
    }

    fn to_tsplib(&self) -> String {
        self.inner.to_tsplib()
    }

    fn __len__(&self) -> usize {
        self.inner.dimension()
    }

    fn __repr__(&self) -> String {
        format!("Instance(name={:?}, dimension={}, type={})", self.inner.name(), self.inner.dimension(), self.edge_weight_type())
    }
}

#[pyfunction]
fn validate_tour(order: Vec<usize>, n: usize) -> bool {
    qaco::validate_tour(&order, n)
}

/// Classical Ant Colony System over `indices` (default: every city).
#[pyfunction]
#[pyo3(signature = (inst, seed = 0, metric = "canonical", iterations = None, indices = None))]
fn aco_solve<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    seed: u64,
    metric: &str,
    iterations: Option<usize>,
    indices: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut params = AcoParams::default();
    if let Some(it) = iterations {
        params.iterations = it;
    }
    let idx = indices.unwrap_or_else(|| (0..inst.inner.dimension()).collect());
    let r = py
        .detach(|| qaco::aco_solve(&inst.inner, &idx, &params, self::metric(metric)?, seed).map_err(err))?;
    let d = PyDict::new(py);
    d.set_item("tour", r.cities)?;
    d.set_item("length", r.length)?;
    d.set_item("history", r.history)?;
    Ok(d)
}

/// Quantum ant colony on a leaf of 2 to 4 cities.
#[pyfunction]
#[pyo3(signature = (inst, indices, seed = 0, noise = "none", rate = 0.0, metric = "canonical"))]
fn qaco_solve<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    indices: Vec<usize>,
    seed: u64,
    noise: &str,
    rate: f64,
    metric: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = self::noise(noise, rate)?;
    let m = self::metric(metric)?;
    let r = py.detach(|| qaco::qaco_solve(&inst.inner, &indices, &QacoParams::default(), &spec, m, seed).map_err(err))?;
    let d = PyDict::new(py);
    d.set_item("tour", r.cities)?;
    d.set_item("length", r.length)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("mutations", r.mutations)?;
    d.set_item("repairs", r.repairs)?;
    Ok(d)
}

/// Cluster, solve leaves, stitch and refine.
#[pyfunction]
#[pyo3(signature = (inst, seed = 0, leaf_solver = "qaco", noise = "none", rate = 0.0, metric = "canonical", refinement = "two_opt"))]
#[allow(clippy::too_many_arguments)]
fn solve_hybrid<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    seed: u64,
    leaf_solver: &str,
    noise: &str,
    rate: f64,
    metric: &str,
    refinement: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let leaf_solver = match leaf_solver {
        "qaco" => LeafSolver::Qaco,
        "aco" => LeafSolver::ClassicalAco,
        "brute_force" => LeafSolver::BruteForce,
        other => return Err(err(format!("unknown leaf solver `{other}` (expected qaco, aco or brute_force)"))),
    };
    let refinement = match refinement {
        "none" => Refinement::None,
        "two_opt" => Refinement::TwoOpt,
        "aco_polish" => Refinement::AcoPolish,
        other => return Err(err(format!("unknown refinement `{other}` (expected none, two_opt or aco_polish)"))),
    };
    let cfg = HybridConfig {
        leaf_solver,
        noise: self::noise(noise, rate)?,
        metric: self::metric(metric)?,
        refinement,
        seed,
        ..HybridConfig::default()
    };
    let r = py.detach(|| qaco::solve_hybrid(&inst.inner, &cfg).map_err(err))?;
    let d = PyDict::new(py);
    d.set_item("tour", r.tour.into_order())?;
    d.set_item("length", r.length)?;
    d.set_item("leaf_lengths", r.stats.leaf_lengths)?;
    d.set_item("stitched_length", r.stats.stitched_length)?;
    d.set_item("refinement_gain", r.stats.refinement_gain)?;
    d.set_item("tree_depth", r.stats.tree_depth)?;
    d.set_item("wall_ms", r.stats.wall_ms)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (points, k, restarts = 10, max_iter = 100, seed = 0))]
fn kmeans<'py>(
    py: Python<'py>,
    points: Vec<(f64, f64)>,
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let a = qaco::kmeans(&points, k, restarts, max_iter, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("labels", a.labels)?;
    d.set_item("centroids", a.centroids)?;
    d.set_item("inertia", a.inertia)?;
    d.set_item("inertia_trace", a.inertia_trace)?;
    Ok(d)
}

/// `layers` is a list of dicts `{"gates": [(kind, count, error_rate), ...], "m": int}`
/// with `m` optional.
#[pyfunction]
fn estimate_circuit_error<'py>(py: Python<'py>, layers: &Bound<'py, PyList>) -> PyResult<Bound<'py, PyDict>> {
    let mut specs = Vec::with_capacity(layers.len());
    for layer in layers.iter() {
        let layer = layer.cast::<PyDict>().map_err(|_| err("each layer must be a dict"))?;
        let gates: Vec<(String, u64, f64)> = match layer.get_item("gates")? {
            Some(g) => g.extract()?,
            None => return Err(err("layer is missing `gates`")),
        };
        let m: Option<u64> = match layer.get_item("m")? {
            Some(v) if !v.is_none() => Some(v.extract()?),
            _ => None,
        };
        specs.push(LayerSpec {
            gates: gates.into_iter().map(|(kind, count, error_rate)| GateCount { kind, count, error_rate }).collect(),
            m,
        });
    }
    let r = qaco::estimate_circuit_error(&specs).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("s", r.s)?;
    d.set_item("layer_average_rates", r.layer_average_rates)?;
    d.set_item("depth", r.depth)?;
    Ok(d)
}

#[pymodule]
fn qaco_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(validate_tour, m)?)?;
    m.add_function(wrap_pyfunction!(aco_solve, m)?)?;
    m.add_function(wrap_pyfunction!(qaco_solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_hybrid, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_circuit_error, m)?)?;
    Ok(())
}
