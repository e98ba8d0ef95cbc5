//! Python bindings for the separation predictor and verification solver.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use vortex_birth::fields::{Mat2, ScalarExpr, Var};
use vortex_birth::model::{self, ScenarioConfig, Window};
use vortex_birth::predictor::{self, CanonicalForm, SearchOptions};
use vortex_birth::report::{self, SimulationPlan};
use vortex_birth::solver::SolverMode;
use vortex_birth::taylor;
use vortex_birth::topology::{self, Tolerances};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Symbolic scalar field in `x1`, `x2`.
#[pyclass(name = "Expr", frozen)]
struct PyExpr(ScalarExpr);

#[pymethods]
impl PyExpr {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(PyExpr).map_err(value_error)
    }

    fn eval(&self, x1: f64, x2: f64) -> PyResult<f64> {
        self.0.eval([x1, x2]).map_err(value_error)
    }

    fn partial(&self, var: &str) -> PyResult<Self> {
        let v = match var {
            "x1" => Var::X1,
            "x2" => Var::X2,
            _ => return Err(value_error(format!("unknown variable `{var}`"))),
        };
        Ok(PyExpr(self.0.partial(v)))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.0)
    }
}

/// Physical scenario parsed from a TOML config.
#[pyclass(name = "Scenario", frozen)]
struct PyScenario(model::Scenario);

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_toml_str(text).map(|c| PyScenario(c.scenario)).map_err(value_error)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        ScenarioConfig::from_path(path).map(|c| PyScenario(c.scenario)).map_err(value_error)
    }

    fn to_toml(&self) -> String {
        ScenarioConfig::to_toml_string(&self.0)
    }

    fn fingerprint(&self) -> String {
        ScenarioConfig::fingerprint(&self.0)
    }

    fn nondimensionalize(&self) -> PyDimensionlessScenario {
        PyDimensionlessScenario(model::nondimensionalize(&self.0))
    }
}

/// Scenario in scaled variables, carrying `K` and `invPr`.
#[pyclass(name = "DimensionlessScenario", frozen)]
struct PyDimensionlessScenario(model::DimensionlessScenario);

#[pymethods]
impl PyDimensionlessScenario {
    #[getter(K)]
    fn k(&self) -> f64 {
        self.0.k
    }

    #[getter]
    fn inv_pr(&self) -> f64 {
        self.0.inv_pr
    }

    fn residuals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &taylor::assumption_residuals(&self.0))
    }

    /// First-order velocity `(v1, v2)` at `(x1, x2, t)`.
    fn first_order_velocity(&self, x1: f64, x2: f64, t: f64) -> PyResult<(f64, f64)> {
        let v = taylor::first_order_field(&self.0).eval([x1, x2], t).map_err(value_error)?;
        Ok((v[0], v[1]))
    }

    fn __repr__(&self) -> String {
        format!("DimensionlessScenario(K={}, inv_pr={})", self.0.k, self.0.inv_pr)
    }
}

#[pyfunction]
#[pyo3(signature = (k, c1=1.0, c2=1.0, c3=1.0, c4=1.0, inv_pr=1.0, half_width=2.0))]
fn canonical_scenario(k: f64, c1: f64, c2: f64, c3: f64, c4: f64, inv_pr: f64, half_width: f64) -> PyResult<PyDimensionlessScenario> {
    CanonicalForm::new(k, c1, c2, c3, c4)
        .scenario(inv_pr, Window::square(half_width))
        .map(PyDimensionlessScenario)
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (scenario, t_max=None))]
fn locate_separation<'py>(py: Python<'py>, scenario: &PyDimensionlessScenario, t_max: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let t_max = t_max.unwrap_or_else(|| report::default_horizon(&scenario.0));
    let event = py
        .detach(|| predictor::locate_separation(&scenario.0, t_max, &SearchOptions::default()))
        .map_err(value_error)?;
    to_py(py, &event)
}

/// Full prediction report for a physical scenario.
#[pyfunction]
#[pyo3(signature = (scenario, t_max=None))]
fn predict<'py>(py: Python<'py>, scenario: &PyScenario, t_max: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let (rep, _) = py
        .detach(|| report::predict(&scenario.0, t_max, &SearchOptions::default()))
        .map_err(value_error)?;
    to_py(py, &rep)
}

#[pyfunction]
fn closed_form_theorem46<'py>(py: Python<'py>, k: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> PyResult<Bound<'py, PyAny>> {
    let cf = predictor::closed_form_theorem46(k, c1, c2, c3, c4).map_err(value_error)?;
    to_py(py, &cf)
}

#[pyfunction]
fn eigen_structure<'py>(py: Python<'py>, jacobian: [[f64; 2]; 2]) -> PyResult<Bound<'py, PyAny>> {
    let s = topology::eigen_structure(&Mat2(jacobian), &Tolerances::default()).map_err(value_error)?;
    to_py(py, &s)
}

/// Runs the solver and returns the snapshot index (times, divergence and
/// stagnation counts), without field arrays.
#[pyfunction]
#[pyo3(signature = (scenario, end_time, grid=64, mode="literal"))]
fn simulate<'py>(py: Python<'py>, scenario: &PyDimensionlessScenario, end_time: f64, grid: usize, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let mode = match mode {
        "literal" => SolverMode::Literal,
        "projected" => SolverMode::Projected,
        _ => return Err(value_error(format!("unknown mode `{mode}`"))),
    };
    let plan = SimulationPlan { mode, n: grid, end_time, target_snapshots: 50, seed_density: 16 };
    let record = py.detach(|| report::simulate(&scenario.0, &plan)).map_err(value_error)?;
    to_py(py, &record.index("", &[]))
}

#[pymodule]
fn vortexbirth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyDimensionlessScenario>()?;
    m.add_function(wrap_pyfunction!(canonical_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(locate_separation, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_theorem46, m)?)?;
    m.add_function(wrap_pyfunction!(eigen_structure, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
