//! Python module `grushin_lab`: spaces, grids, the discrete operator, the
//! eigensolver, nonlinearities, theorem constants and the experiment runner.
//! Structured results come back as plain dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use grushin_core::error::Error;
use grushin_core::linalg::{smallest_eigenpair, DEFAULT_EIG_TOL};
use grushin_core::nonlinearity::{check_blowup_hypothesis, check_global_hypothesis, DEFAULT_SAMPLES};
use grushin_core::operator::{assemble_grushin, grushin_energy, l2_norm_sq};
use grushin_core::runner::{self, RunOptions};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NonConvergence { .. } | Error::NotANumber(_) | Error::Io { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "GrushinSpace", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpace(grushin_core::GrushinSpace);

#[pymethods]
impl PySpace {
    #[new]
    fn new(m: usize, k: usize, gamma: f64) -> PyResult<Self> {
        grushin_core::GrushinSpace::new(m, k, gamma).map(Self).map_err(py_err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    fn homogeneous_dimension(&self) -> f64 {
        self.0.homogeneous_dimension()
    }

    fn dilate(&self, factor: f64, point: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.dilate(factor, &point).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("GrushinSpace(m={}, k={}, gamma={})", self.0.m(), self.0.k(), self.0.gamma())
    }
}

#[pyclass(name = "Grid", frozen)]
struct PyGrid(grushin_core::Grid);

#[pymethods]
impl PyGrid {
    /// `bounds` is a list of `(a, b)` pairs, `cells` the cell count per axis.
    #[new]
    fn new(bounds: Vec<(f64, f64)>, cells: Vec<usize>) -> PyResult<Self> {
        let domain = grushin_core::BoxDomain::new(bounds).map_err(py_err)?;
        grushin_core::Grid::new(&domain, &cells).map(Self).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn spacing(&self) -> Vec<f64> {
        self.0.spacing().to_vec()
    }

    #[getter]
    fn cell_volume(&self) -> f64 {
        self.0.cell_volume()
    }

    /// Interior node coordinates in storage order.
    fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.0.len()).map(|i| self.0.node(i)).collect()
    }

    fn integral(&self, values: Vec<f64>) -> PyResult<f64> {
        self.0.integral(&values).map_err(py_err)
    }

    fn l2_norm_sq(&self, values: Vec<f64>) -> PyResult<f64> {
        l2_norm_sq(&self.0, &values).map_err(py_err)
    }
}

/// The assembled discrete operator on a grid.
#[pyclass(name = "Operator", frozen)]
struct PyOperator {
    matrix: grushin_core::SparseMatrix,
    grid: grushin_core::Grid,
    space: grushin_core::GrushinSpace,
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(space: &PySpace, grid: &PyGrid) -> PyResult<Self> {
        let matrix = assemble_grushin(&grid.0, &space.0).map_err(py_err)?;
        Ok(Self {
            matrix,
            grid: grid.0.clone(),
            space: space.0,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    fn apply(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        self.matrix.apply(&u).map_err(py_err)
    }

    /// Discrete `int |grad_gamma u|^2`.
    fn energy(&self, u: Vec<f64>) -> PyResult<f64> {
        grushin_energy(&self.grid, &self.space, &u).map_err(py_err)
    }

    /// Returns `(lambda1, phi1)`.
    #[pyo3(signature = (tol = DEFAULT_EIG_TOL, max_iter = None))]
    fn smallest_eigenpair(&self, py: Python<'_>, tol: f64, max_iter: Option<usize>) -> PyResult<(f64, Vec<f64>)> {
        let max_iter = max_iter.unwrap_or(10 * self.grid.len());
        let r = py
            .detach(|| smallest_eigenpair(&self.matrix, self.grid.cell_volume(), tol, max_iter))
            .map_err(py_err)?;
        Ok((r.lambda1, r.phi1))
    }
}

#[pyclass(name = "Nonlinearity", frozen)]
struct PyNonlinearity(grushin_core::Nonlinearity);

#[pymethods]
impl PyNonlinearity {
    /// `c sign(u) |u|^p`
    #[staticmethod]
    fn power(p: f64, c: f64) -> PyResult<Self> {
        grushin_core::Nonlinearity::power(p, c).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn expression(text: &str) -> PyResult<Self> {
        grushin_core::Nonlinearity::expression(text).map(Self).map_err(py_err)
    }

    fn f(&self, u: f64) -> PyResult<f64> {
        self.0.eval_f(u).map_err(py_err)
    }

    /// Antiderivative of `f` from 0.
    #[pyo3(name = "F")]
    fn big_f(&self, u: f64) -> PyResult<f64> {
        self.0.eval_big_f(u).map_err(py_err)
    }

    #[pyo3(signature = (alpha, beta, theta, u_max, samples = DEFAULT_SAMPLES))]
    fn check_blowup_hypothesis<'py>(
        &self,
        py: Python<'py>,
        alpha: f64,
        beta: f64,
        theta: f64,
        u_max: f64,
        samples: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let r = check_blowup_hypothesis(&self.0, alpha, beta, theta, u_max, samples).map_err(py_err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (alpha, beta, theta, u_max, samples = DEFAULT_SAMPLES))]
    fn check_global_hypothesis<'py>(
        &self,
        py: Python<'py>,
        alpha: f64,
        beta: f64,
        theta: f64,
        u_max: f64,
        samples: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let r = check_global_hypothesis(&self.0, alpha, beta, theta, u_max, samples).map_err(py_err)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Nonlinearity({})", self.0.describe())
    }
}

/// Returns `(sigma, M, Tstar_bound)`.
#[pyfunction]
#[allow(non_snake_case)]
fn blowup_constants(alpha: f64, F0: f64, I0: f64) -> PyResult<(f64, f64, f64)> {
    let c = runner::compute_blowup_constants(alpha, F0, I0).map_err(py_err)?;
    Ok((c.sigma, c.m, c.tstar_bound))
}

/// Runs the pipeline on a JSON config given as text and returns the report.
#[pyfunction]
#[pyo3(signature = (config_json, out_dir = None, skip_simulation = false))]
fn run_experiment<'py>(
    py: Python<'py>,
    config_json: &str,
    out_dir: Option<std::path::PathBuf>,
    skip_simulation: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = runner::parse_config_str(config_json, None).map_err(py_err)?;
    let opts = RunOptions {
        skip_simulation,
        out_dir,
        ..RunOptions::default()
    };
    let report = py.detach(|| runner::run_experiment_with(&cfg, &opts).report);
    to_py(py, &report)
}

/// Runs the pipeline on a config file.
#[pyfunction]
#[pyo3(signature = (path, out_dir = None))]
fn verify<'py>(py: Python<'py>, path: std::path::PathBuf, out_dir: Option<std::path::PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = runner::parse_config(&path).map_err(py_err)?;
    let opts = RunOptions {
        out_dir,
        ..RunOptions::default()
    };
    let report = py.detach(|| runner::run_experiment_with(&cfg, &opts).report);
    to_py(py, &report)
}

#[pymodule]
fn grushin_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyNonlinearity>()?;
    m.add_function(wrap_pyfunction!(blowup_constants, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
