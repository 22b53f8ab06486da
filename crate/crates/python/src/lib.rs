//! Python module `dfvem_py`: meshes, discretizations, solves, complex checks
//! and convergence studies. Structured results are returned as plain Python
//! dicts and lists.

use std::path::PathBuf;

use dfvem::bench::{
    fit_slope as fit, run_convergence, run_on_mesh, CaseName, MeshFamily, RunConfig,
};
use dfvem::complex::{check_divfree, complex_report, inf_sup_estimate, DENSE_DOF_CAP};
use dfvem::forms::{Discretization, Stabilization};
use dfvem::mesh::{
    kuhn_tetrahedra, load_mesh, mesh_from_json_str, mesh_to_json_string, quality_check,
    structured_cubes, MeshFormat, PolyMesh,
};
use dfvem::VemError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py_err(e: VemError) -> PyErr {
    match e {
        VemError::SingularSystem(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Serializes `value` and hands it to Python's `json.loads`.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse<T: std::str::FromStr<Err = VemError>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py_err)
}

fn parse_stabilization(s: &str) -> PyResult<Stabilization> {
    match s {
        "d-recipe" => Ok(Stabilization::DRecipe),
        "identity" => Ok(Stabilization::Identity),
        _ => Err(PyValueError::new_err(format!(
            "unknown stabilization '{s}'"
        ))),
    }
}

/// A polyhedral mesh.
#[pyclass(name = "Mesh", module = "dfvem_py", frozen)]
pub struct PyMesh {
    inner: PolyMesh,
}

#[pymethods]
impl PyMesh {
    /// `n^3` unit cubes partitioning `[0,1]^3`.
    #[staticmethod]
    fn structured(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        Ok(Self {
            inner: structured_cubes(n),
        })
    }

    /// `6 n^3` tetrahedra partitioning `[0,1]^3`.
    #[staticmethod]
    fn tetra(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        Ok(Self {
            inner: kuhn_tetrahedra(n),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: mesh_from_json_str(text).map_err(to_py_err)?,
        })
    }

    /// Loads a JSON mesh, or a `.node`/`.ele` pair with `format="tetra"`.
    #[staticmethod]
    #[pyo3(signature = (path, format = "json"))]
    fn load(path: PathBuf, format: &str) -> PyResult<Self> {
        let format = match format {
            "json" => MeshFormat::JsonPoly,
            "tetra" => MeshFormat::TetraList,
            _ => {
                return Err(PyValueError::new_err(format!(
                    "unknown mesh format '{format}'"
                )))
            }
        };
        Ok(Self {
            inner: load_mesh(&path, format).map_err(to_py_err)?,
        })
    }

    fn to_json(&self) -> String {
        mesh_to_json_string(&self.inner)
    }

    #[getter]
    fn num_cells(&self) -> usize {
        self.inner.num_cells()
    }

    /// Vertex, edge, face and cell counts.
    #[getter]
    fn counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.counts())
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.mesh_size()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    #[pyo3(signature = (rho = 0.1))]
    fn quality<'py>(&self, py: Python<'py>, rho: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &quality_check(&self.inner, rho))
    }

    fn __repr__(&self) -> String {
        let c = self.inner.counts();
        format!(
            "Mesh(vertices={}, edges={}, faces={}, cells={})",
            c.vertices, c.edges, c.faces, c.cells
        )
    }
}

/// Velocity and pressure spaces of degree `k` on a mesh.
#[pyclass(name = "Discretization", module = "dfvem_py", frozen)]
pub struct PyDiscretization {
    inner: Discretization,
}

#[pymethods]
impl PyDiscretization {
    #[new]
    #[pyo3(signature = (mesh, k = 2))]
    fn new(mesh: &PyMesh, k: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Discretization::new(mesh.inner.clone(), k).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn ndof_velocity(&self) -> usize {
        self.inner.ndof_velocity()
    }

    #[getter]
    fn ndof_pressure(&self) -> usize {
        self.inner.ndof_pressure()
    }

    /// Largest `h_P |div u_h|` coefficient of a velocity DoF vector.
    fn divfree(&self, velocity: Vec<f64>) -> PyResult<f64> {
        if velocity.len() != self.inner.ndof_velocity() {
            return Err(PyValueError::new_err(format!(
                "expected {} velocity values, got {}",
                self.inner.ndof_velocity(),
                velocity.len()
            )));
        }
        Ok(check_divfree(&self.inner, &velocity))
    }

    fn inf_sup(&self) -> PyResult<f64> {
        inf_sup_estimate(&self.inner).map_err(to_py_err)
    }
}

/// Dimension identities and divergence rank for a mesh and degree.
#[pyfunction]
#[pyo3(signature = (mesh, k = 2, cap = DENSE_DOF_CAP))]
fn complex_check<'py>(
    py: Python<'py>,
    mesh: &PyMesh,
    k: usize,
    cap: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let report = complex_report(mesh.inner.clone(), k, cap).map_err(to_py_err)?;
    to_py(py, &report)
}

#[derive(Serialize)]
struct SolveResult {
    case: CaseName,
    k: usize,
    h: f64,
    ndof_u: usize,
    ndof_p: usize,
    e_h1_u: f64,
    e_l2_p: f64,
    converged: bool,
    newton_iters: usize,
    divfree: f64,
    velocity: Vec<f64>,
    pressure: Vec<f64>,
}

/// Solves a manufactured case (`ex1-stokes`, `ex1-stokes-neumann`, `ex2-ns`,
/// `ex3-p1`, `ex3-p2`) and returns errors and DoF vectors.
#[pyfunction]
#[pyo3(signature = (case, mesh, k = 2, nu = 1.0, stabilization = "d-recipe"))]
fn solve<'py>(
    py: Python<'py>,
    case: &str,
    mesh: &PyMesh,
    k: usize,
    nu: f64,
    stabilization: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = RunConfig::new(parse(case)?, k);
    cfg.nu = nu;
    cfg.stabilization = parse_stabilization(stabilization)?;
    cfg.timing = false;
    let (level, sol, disc) = run_on_mesh(&cfg, mesh.inner.clone(), 0).map_err(to_py_err)?;
    let out = SolveResult {
        case: cfg.case,
        k,
        h: level.h,
        ndof_u: level.ndof_u,
        ndof_p: level.ndof_p,
        e_h1_u: level.e_h1_u,
        e_l2_p: level.e_l2_p,
        converged: sol.converged,
        newton_iters: level.newton_iters,
        divfree: check_divfree(&disc, &sol.velocity),
        velocity: sol.velocity,
        pressure: sol.pressure,
    };
    to_py(py, &out)
}

/// Convergence study on meshes `n = sizes`; returns levels and slopes.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(name = "bench", signature = (case, sizes, family = "structured", k = 2, nu = 1.0, stabilization = "d-recipe", timing = false))]
fn run_bench<'py>(
    py: Python<'py>,
    case: &str,
    sizes: Vec<usize>,
    family: &str,
    k: usize,
    nu: f64,
    stabilization: &str,
    timing: bool,
) -> PyResult<Bound<'py, PyAny>> {
    if sizes.contains(&0) {
        return Err(PyValueError::new_err("mesh sizes must be positive"));
    }
    let mut cfg = RunConfig::new(parse(case)?, k);
    cfg.nu = nu;
    cfg.stabilization = parse_stabilization(stabilization)?;
    cfg.timing = timing;
    let family: MeshFamily = parse(family)?;
    let report = run_convergence(&cfg, family, &sizes).map_err(to_py_err)?;
    to_py(py, &report)
}

/// Least-squares slope of `log e` against `log h`, or `None`.
#[pyfunction]
fn fit_slope(h: Vec<f64>, e: Vec<f64>) -> Option<f64> {
    fit(&h, &e)
}

/// Adds the classes and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyDiscretization>()?;
    m.add_function(wrap_pyfunction!(complex_check, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(fit_slope, m)?)?;
    Ok(())
}

#[pymodule]
fn dfvem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
