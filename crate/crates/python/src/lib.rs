use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};

use hsdl_core::displacement::{self, BoundKind, EstimatorConfig};
use hsdl_core::fields::{self, FieldSpec};
use hsdl_core::geometry::BodySpec;
use hsdl_core::harness::{self, RunOptions};
use hsdl_core::norms::NormSpec;
use hsdl_core::vi::{self, SolverConfig, VIProblem};
use hsdl_core::Error;

create_exception!(hsdl, NumericError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numeric { .. } => NumericError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        Error::Field(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Serialise through JSON so results arrive as plain dicts and lists.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Accept either a JSON string or a dict-like object.
fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if let Ok(s) = obj.cast::<PyString>() {
        s.to_string()
    } else {
        obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("invalid descriptor: {}", hsdl_core::json_location(&e))))
}

fn estimator(seed: u64, budget: f64) -> EstimatorConfig {
    EstimatorConfig {
        seed,
        budget,
        ..EstimatorConfig::default()
    }
}

#[pyclass(name = "ConvexBody", module = "hsdl", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyConvexBody {
    inner: hsdl_core::ConvexBody,
}

#[pymethods]
impl PyConvexBody {
    /// Build from a descriptor such as `{"kind": "ball", "center": [0, 0], "radius": 1}`.
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        let spec: BodySpec = from_py(spec)?;
        Ok(Self {
            inner: hsdl_core::ConvexBody::from_spec(&spec).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn ball(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: hsdl_core::ConvexBody::ball(center, radius).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn aabb(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: hsdl_core::ConvexBody::aabb(&lo, &hi).map_err(py_err)?,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_spec())
    }

    #[pyo3(signature = (x, tol = 1e-9))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> PyResult<bool> {
        self.inner.contains(&x, tol).map_err(py_err)
    }

    fn project(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.project(&x).map_err(py_err)
    }

    fn support(&self, u: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        self.inner.support(&u).map_err(py_err)
    }

    fn inradius(&self) -> PyResult<f64> {
        self.inner.inradius().map_err(py_err)
    }

    fn circumradius<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let c = self.inner.circumradius().map_err(py_err)?;
        to_py(py, &c)
    }

    fn __repr__(&self) -> String {
        let spec = serde_json::to_string(&self.inner.to_spec()).unwrap_or_default();
        format!("ConvexBody({spec})")
    }
}

#[pyclass(name = "Norm", module = "hsdl", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNorm {
    inner: hsdl_core::Norm,
}

#[pymethods]
impl PyNorm {
    /// Build from a descriptor such as `{"kind": "lp", "p": "inf"}`.
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        let spec: NormSpec = from_py(spec)?;
        Ok(Self {
            inner: hsdl_core::Norm::from_spec(&spec).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn euclidean() -> Self {
        Self {
            inner: hsdl_core::Norm::Euclidean,
        }
    }

    /// `p` may be `float("inf")`.
    #[staticmethod]
    fn lp(p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: hsdl_core::Norm::lp(p).map_err(py_err)?,
        })
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&x).map_err(py_err)
    }

    fn dual(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.dual_eval(&x).map_err(py_err)
    }

    fn equivalence_constants<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
        let c = self.inner.equivalence_constants(n).map_err(py_err)?;
        let d = to_py(py, &c)?;
        d.set_item("nu", c.nu())?;
        Ok(d)
    }
}

#[pyclass(name = "VectorField", module = "hsdl", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyVectorField {
    inner: hsdl_core::VectorField,
}

#[pymethods]
impl PyVectorField {
    /// Build from a descriptor such as `{"kind": "rotation2d", "alpha": 1.0}`.
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        let spec: FieldSpec = from_py(spec)?;
        Ok(Self {
            inner: hsdl_core::VectorField::from_spec(&spec).map_err(py_err)?,
        })
    }

    /// Wrap a Python callable `f(list[float]) -> list[float]`.
    #[staticmethod]
    #[pyo3(signature = (f, dim, label = "python".to_string(), nonvanishing = false, lipschitz = None))]
    fn from_callable(
        f: Py<PyAny>,
        dim: usize,
        label: String,
        nonvanishing: bool,
        lipschitz: Option<f64>,
    ) -> PyResult<Self> {
        let f = Arc::new(f);
        let call = move |x: &[f64]| -> hsdl_core::Result<Vec<f64>> {
            Python::attach(|py| {
                f.call1(py, (x.to_vec(),))
                    .and_then(|y| y.extract::<Vec<f64>>(py))
                    .map_err(|e| Error::Field(e.to_string()))
            })
        };
        let inner = hsdl_core::VectorField::custom(label, dim, nonvanishing, lipschitz, Arc::new(call)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn rotation2d(alpha: f64) -> PyResult<Self> {
        Ok(Self {
            inner: hsdl_core::VectorField::rotation2d(alpha).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn translation(xprime: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: hsdl_core::VectorField::translation(xprime).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn kakutani(n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: hsdl_core::VectorField::kakutani(n).map_err(py_err)?,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn claimed_nonvanishing(&self) -> bool {
        self.inner.claimed_nonvanishing
    }

    fn __call__(&self, py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
        py.detach(|| self.inner.eval(&x)).map_err(py_err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let spec = self.inner.to_spec().map_err(py_err)?;
        to_py(py, &spec)
    }
}

/// Estimate both sides of a displacement lower bound; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (field, body, kind = "thm31", norm = None, seed = 0, budget = 1.0))]
fn check_bound<'py>(
    py: Python<'py>,
    field: &PyVectorField,
    body: &PyConvexBody,
    kind: &str,
    norm: Option<&PyNorm>,
    seed: u64,
    budget: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = BoundKind::parse(kind).map_err(py_err)?;
    let norm = norm.map(|n| n.inner.clone()).unwrap_or(hsdl_core::Norm::Euclidean);
    let cfg = estimator(seed, budget);
    let report = py
        .detach(|| displacement::check_lower_bound(&field.inner, &body.inner, &norm, kind, &cfg))
        .map_err(py_err)?;
    to_py(py, &report)
}

/// `sup |f(x) − μx| ≥ μ + inf |f|` on the interval [−1, 1].
#[pyfunction]
#[pyo3(signature = (field, mu, seed = 0, budget = 1.0))]
fn check_eigen<'py>(
    py: Python<'py>,
    field: &PyVectorField,
    mu: f64,
    seed: u64,
    budget: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = estimator(seed, budget);
    let report = py
        .detach(|| displacement::check_eigen_bound(&field.inner, mu, &cfg))
        .map_err(py_err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (body, field, tol = 1e-8, seed = 0))]
fn solve_vi<'py>(
    py: Python<'py>,
    body: &PyConvexBody,
    field: &PyVectorField,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SolverConfig {
        tol,
        seed,
        ..SolverConfig::default()
    };
    let sol = py
        .detach(|| vi::solve(&VIProblem::new(&body.inner, &field.inner)?, &cfg))
        .map_err(py_err)?;
    to_py(py, &sol)
}

#[pyfunction]
#[pyo3(signature = (field, body, norm = None, seed = 0, budget = 1.0))]
fn sup_displacement<'py>(
    py: Python<'py>,
    field: &PyVectorField,
    body: &PyConvexBody,
    norm: Option<&PyNorm>,
    seed: u64,
    budget: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let norm = norm.map(|n| n.inner.clone()).unwrap_or(hsdl_core::Norm::Euclidean);
    let cfg = estimator(seed, budget);
    let est = py
        .detach(|| displacement::sup_displacement(&field.inner, &body.inner, &norm, &cfg))
        .map_err(py_err)?;
    to_py(py, &est)
}

#[pyfunction]
#[pyo3(signature = (count = 25, seed = 0))]
fn rotation_sweep<'py>(py: Python<'py>, count: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let cfg = estimator(seed, 1.0);
    let rows = py.detach(|| displacement::rotation_sweep(count, &cfg)).map_err(py_err)?;
    to_py(py, &rows)
}

#[pyfunction]
#[pyo3(signature = (phi, psi, radii, norm = None, seed = 0))]
fn growth_profile<'py>(
    py: Python<'py>,
    phi: &PyVectorField,
    psi: &PyVectorField,
    radii: Vec<f64>,
    norm: Option<&PyNorm>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let norm = norm.map(|n| n.inner.clone()).unwrap_or(hsdl_core::Norm::Euclidean);
    let cfg = estimator(seed, 1.0);
    let rows = py
        .detach(|| displacement::growth_profile(&phi.inner, &psi.inner, &norm, &radii, &cfg))
        .map_err(py_err)?;
    to_py(py, &rows)
}

#[pyfunction]
fn kakutani_fixed_point(n: usize) -> PyResult<Vec<f64>> {
    fields::kakutani_fixed_point(n).map_err(py_err)
}

/// Text of a shipped preset campaign (`q1` … `q6`).
#[pyfunction]
fn preset(id: &str) -> PyResult<String> {
    harness::preset(id).map_err(py_err)
}

/// Run a campaign given as JSON text or a dict; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (config, seed = None, budget = None))]
fn run_campaign<'py>(
    py: Python<'py>,
    config: &Bound<'py, PyAny>,
    seed: Option<u64>,
    budget: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let text: String = if let Ok(s) = config.cast::<PyString>() {
        s.to_string()
    } else if config.is_instance_of::<PyDict>() {
        py.import("json")?.call_method1("dumps", (config,))?.extract()?
    } else {
        return Err(PyValueError::new_err("config must be JSON text or a dict"));
    };
    let opts = RunOptions { seed, budget };
    let report = py.detach(|| harness::run_campaign_str(&text, &opts)).map_err(py_err)?;
    to_py(py, &report)
}

#[pymodule]
fn hsdl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", hsdl_core::VERSION)?;
    m.add("NumericError", m.py().get_type::<NumericError>())?;
    m.add_class::<PyConvexBody>()?;
    m.add_class::<PyNorm>()?;
    m.add_class::<PyVectorField>()?;
    m.add_function(wrap_pyfunction!(check_bound, m)?)?;
    m.add_function(wrap_pyfunction!(check_eigen, m)?)?;
    m.add_function(wrap_pyfunction!(solve_vi, m)?)?;
    m.add_function(wrap_pyfunction!(sup_displacement, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(growth_profile, m)?)?;
    m.add_function(wrap_pyfunction!(kakutani_fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    Ok(())
}
