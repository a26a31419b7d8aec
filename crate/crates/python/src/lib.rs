//! Python bindings: `import dimdist_py`.
//!
//! Reports come back as plain dicts (via JSON), spaces, systems and maps as
//! opaque handles.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use dimdist::dimension::{self, EstimatorOptions};
use dimdist::distortion::{self, BoundParams, BoundValue, ExperimentOptions, HolderData};
use dimdist::dyadic::{self, DyadicParams};
use dimdist::generators::{self, GeneratorSpec, MapKind};
use dimdist::holder::{self, Exponent};
use dimdist::metric::{estimate_doubling_constant, estimate_uniform_perfectness};
use dimdist::{BaseMetric, SubsetRef};

fn err(e: dimdist::Error) -> PyErr {
    match e {
        dimdist::Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A finite metric space. Every point belongs to the subset of interest.
#[pyclass(name = "MetricSpace", module = "dimdist_py")]
pub struct PyMetricSpace {
    inner: dimdist::FiniteMetricSpace,
}

impl PyMetricSpace {
    fn subset(&self) -> SubsetRef {
        SubsetRef::full(&self.inner)
    }
}

#[pymethods]
impl PyMetricSpace {
    /// Points as rows; `metric` is `"euclidean"` or `"chebyshev"`.
    #[staticmethod]
    #[pyo3(signature = (points, metric = "euclidean"))]
    fn from_points(points: Vec<Vec<f64>>, metric: &str) -> PyResult<Self> {
        let base = match metric {
            "euclidean" => BaseMetric::Euclidean,
            "chebyshev" => BaseMetric::Chebyshev,
            other => return Err(PyValueError::new_err(format!("unknown metric {other:?}"))),
        };
        let inner = dimdist::FiniteMetricSpace::from_points(&points, base).map_err(err)?;
        Ok(PyMetricSpace { inner })
    }

    /// A square, symmetric distance matrix.
    #[staticmethod]
    fn from_matrix(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("distance matrix must be square"));
        }
        let inner = dimdist::FiniteMetricSpace::from_matrix(n, matrix.into_iter().flatten().collect()).map_err(err)?;
        Ok(PyMetricSpace { inner })
    }

    /// `cantor(1/3,8)`, `sequence_set(2,2000)`, `grid(33,2)`, ...
    #[staticmethod]
    fn generate(spec: &str) -> PyResult<Self> {
        let spec: GeneratorSpec = spec.parse().map_err(err)?;
        Ok(PyMetricSpace { inner: generators::generate(&spec).map_err(err)?.space })
    }

    fn snowflake(&self, epsilon: f64) -> PyResult<Self> {
        Ok(PyMetricSpace { inner: self.inner.snowflake(epsilon).map_err(err)? })
    }

    fn distance(&self, x: usize, y: usize) -> PyResult<f64> {
        self.inner.distance(x, y).map_err(err)
    }

    fn diameter(&self) -> f64 {
        dimdist::metric::diameter(&self.inner, &self.subset())
    }

    fn resolution_floor(&self) -> f64 {
        self.inner.resolution_floor()
    }

    fn coords(&self, i: usize) -> PyResult<Option<Vec<f64>>> {
        self.inner.check_id(i).map_err(err)?;
        Ok(self.inner.coords(i).map(<[f64]>::to_vec))
    }

    /// Largest greedy cover count of `B(x, 2r)` by `r`-balls over `(x, r)` pairs.
    fn doubling_constant(&self, sample: Vec<(usize, f64)>) -> PyResult<usize> {
        estimate_doubling_constant(&self.inner, &sample).map_err(err)
    }

    /// Uniform-perfectness measurement over `radii`, as a dict.
    fn uniform_perfectness(&self, py: Python<'_>, radii: Vec<f64>) -> PyResult<Py<PyAny>> {
        let r = estimate_uniform_perfectness(&self.inner, &self.subset(), &radii).map_err(err)?;
        to_py(py, &r)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("MetricSpace({} points, {:?})", self.inner.len(), self.inner.metric())
    }
}

/// A nested system of dyadic cubes on a space.
#[pyclass(name = "DyadicSystem", module = "dimdist_py")]
pub struct PyDyadicSystem {
    inner: dyadic::DyadicSystem,
    space: dimdist::FiniteMetricSpace,
}

#[pymethods]
impl PyDyadicSystem {
    /// `mode` is `"relaxed"` (b = 1/2) or `"strict"` (b = 1/72).
    #[new]
    #[pyo3(signature = (space, mode = "relaxed", max_level = None))]
    fn new(space: &PyMetricSpace, mode: &str, max_level: Option<usize>) -> PyResult<Self> {
        let base = match mode {
            "relaxed" => DyadicParams::relaxed(0),
            "strict" => DyadicParams::strict(0),
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        let params = DyadicParams {
            max_level: max_level.unwrap_or_else(|| dyadic::default_max_level(&space.inner, base.ratio)),
            ..base
        };
        let inner = dyadic::build_system(&space.inner, &params).map_err(err)?;
        Ok(PyDyadicSystem { inner, space: space.inner.clone() })
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    #[getter]
    fn cube_count(&self) -> usize {
        self.inner.cubes.len()
    }

    /// Members of every cube at `level`.
    fn level_members(&self, level: usize) -> PyResult<Vec<Vec<usize>>> {
        if level > self.inner.depth() {
            return Err(PyValueError::new_err(format!("level {level} is beyond depth {}", self.inner.depth())));
        }
        Ok(self.inner.level(level).map(|c| self.inner.cube(c).members.clone()).collect())
    }

    /// Verification report as a dict.
    fn verify(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &dyadic::verify_system(&self.space, &self.inner))
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }
}

/// A sampled map between two finite metric spaces.
#[pyclass(name = "Map", module = "dimdist_py")]
pub struct PyMap {
    inner: holder::MapSample,
}

#[pymethods]
impl PyMap {
    /// `assignment[x]` is the target id of source point `x`.
    #[new]
    fn new(source: &PyMetricSpace, target: &PyMetricSpace, assignment: Vec<usize>) -> PyResult<Self> {
        let inner = holder::MapSample::new(source.inner.clone(), target.inner.clone(), assignment).map_err(err)?;
        Ok(PyMap { inner })
    }

    /// `identity`, `power(1/2)`, `linear(3)`, `snowflake_target(2/3)`.
    #[staticmethod]
    fn generate(kind: &str, source: &PyMetricSpace) -> PyResult<Self> {
        let kind: MapKind = kind.parse().map_err(err)?;
        Ok(PyMap { inner: generators::generate_map(kind, &source.inner).map_err(err)? })
    }

    #[getter]
    fn target(&self) -> PyMetricSpace {
        PyMetricSpace { inner: self.inner.target().clone() }
    }

    #[getter]
    fn assignment(&self) -> Vec<usize> {
        self.inner.assignment().to_vec()
    }
}

fn options(space: &dimdist::FiniteMetricSpace) -> EstimatorOptions {
    EstimatorOptions::for_space(space)
}

/// Least-squares box-counting dimension over `scales`, as a dict.
#[pyfunction]
fn box_dimension(py: Python<'_>, space: &PyMetricSpace, scales: Vec<f64>) -> PyResult<Py<PyAny>> {
    to_py(py, &dimension::box_dimension(&space.inner, &space.subset(), &scales).map_err(err)?)
}

/// θ-intermediate dimension estimate over `deltas`, as a dict.
#[pyfunction]
fn intermediate_dimension(py: Python<'_>, system: &PyDyadicSystem, theta: f64, deltas: Vec<f64>) -> PyResult<Py<PyAny>> {
    let subset = SubsetRef::full(&system.space);
    let est = dimension::intermediate_dimension(&system.inner, &subset, theta, &deltas, &options(&system.space))
        .map_err(err)?;
    to_py(py, &est)
}

#[pyfunction]
fn hausdorff_dimension(py: Python<'_>, system: &PyDyadicSystem, deltas: Vec<f64>) -> PyResult<Py<PyAny>> {
    let subset = SubsetRef::full(&system.space);
    let est = dimension::hausdorff_dimension(&system.inner, &subset, &deltas, &options(&system.space)).map_err(err)?;
    to_py(py, &est)
}

/// Minimal Hajłasz-type gradient; `p` may be `float("inf")`.
#[pyfunction]
#[pyo3(signature = (map, s, p, weights = None))]
fn hajlasz_gradient(py: Python<'_>, map: &PyMap, s: f64, p: f64, weights: Option<Vec<f64>>) -> PyResult<Py<PyAny>> {
    let p = Exponent::finite(p).map_err(err)?;
    to_py(py, &holder::hajlasz_gradient(&map.inner, s, p, weights.as_deref()).map_err(err)?)
}

/// Compactly-Hölder p-sums over a radius grid.
#[pyfunction]
#[pyo3(signature = (map, alpha, p, radii, epsilon = 0.1))]
fn ch_profile(py: Python<'_>, map: &PyMap, alpha: f64, p: f64, radii: Vec<f64>, epsilon: f64) -> PyResult<Py<PyAny>> {
    let subset = SubsetRef::full(map.inner.source());
    to_py(py, &holder::estimate_ch_profile(&map.inner, &subset, alpha, p, &radii, epsilon).map_err(err)?)
}

/// A kebab-case enum name such as `thm11` or `triebel-lizorkin`.
fn parse_name<T: serde::de::DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(text.into())).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Evaluates a bound; returns a float, or `(lower, upper)` for interval bounds.
#[pyfunction]
#[pyo3(signature = (variant, d, p = None, q = None, s = None, alpha = None, big_q = None, space = None))]
#[allow(clippy::too_many_arguments)]
fn evaluate_bound(
    py: Python<'_>,
    variant: &str,
    d: f64,
    p: Option<f64>,
    q: Option<f64>,
    s: Option<f64>,
    alpha: Option<f64>,
    big_q: Option<f64>,
    space: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let params = BoundParams {
        variant: parse_name(variant)?,
        d,
        p,
        q,
        s,
        alpha,
        big_q,
        space: space.map(parse_name).transpose()?,
    };
    Ok(match distortion::evaluate_bound(&params).map_err(err)? {
        BoundValue::Value(v) => v.into_pyobject(py)?.into_any().unbind(),
        BoundValue::Interval { lower, upper } => (lower, upper).into_pyobject(py)?.into_any().unbind(),
    })
}

/// Per-δ pushforward experiment; the report as a dict.
#[pyfunction]
#[pyo3(signature = (system, map, theta, p, alpha, deltas, tolerance = 0.05))]
fn distortion_experiment(
    py: Python<'_>,
    system: &PyDyadicSystem,
    map: &PyMap,
    theta: f64,
    p: f64,
    alpha: f64,
    deltas: Vec<f64>,
    tolerance: f64,
) -> PyResult<Py<PyAny>> {
    let subset = SubsetRef::full(&system.space);
    let opts = ExperimentOptions { estimator: options(&system.space), tolerance, ..Default::default() };
    let report = py
        .detach(|| {
            distortion::distortion_experiment(&system.inner, &map.inner, &subset, theta, HolderData { p, alpha }, &deltas, &opts)
        })
        .map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn dimdist_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetricSpace>()?;
    m.add_class::<PyDyadicSystem>()?;
    m.add_class::<PyMap>()?;
    m.add_function(wrap_pyfunction!(box_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(intermediate_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(hajlasz_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(ch_profile, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_bound, m)?)?;
    m.add_function(wrap_pyfunction!(distortion_experiment, m)?)?;
    Ok(())
}
