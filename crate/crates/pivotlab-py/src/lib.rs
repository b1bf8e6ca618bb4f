//! Python bindings for the pivotlab core: grids, kernels, densities, the
//! event-table solver and the refinement study harness.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pivotlab::config::RunConfig;
use pivotlab::convergence_lab::{run_study, EocMode, StudyConfig};
use pivotlab::fixed_pivot::{build_event_table, moment, total_mass_ledger, EventTable};
use pivotlab::grid::{
    build_geometric, build_uniform, refine_locally_uniform, refine_oscillatory, refine_random,
    MeshFamily,
};
use pivotlab::initial_condition::DensitySpec;
use pivotlab::kernel::KernelSpec;
use pivotlab::state::StateVector;
use pivotlab::time_integrator::{integrate, IntegrationConfig};
use pivotlab::PivotError;

fn err(e: PivotError) -> PyErr {
    match e {
        PivotError::InvalidArgument(_) | PivotError::Config(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Grid", skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: pivotlab::Grid,
}

#[pymethods]
impl PyGrid {
    #[staticmethod]
    fn uniform(x_min: f64, x_max: f64, cells: usize) -> PyResult<Self> {
        Ok(Self { inner: build_uniform(x_min, x_max, cells).map_err(err)? })
    }

    #[staticmethod]
    fn geometric(x_min: f64, x_max: f64, cells: usize) -> PyResult<Self> {
        Ok(Self { inner: build_geometric(x_min, x_max, cells).map_err(err)? })
    }

    #[staticmethod]
    fn locally_uniform(x_min: f64, x_max: f64, base_cells: usize, levels: usize) -> PyResult<Self> {
        let base = build_geometric(x_min, x_max, base_cells).map_err(err)?;
        Ok(Self { inner: refine_locally_uniform(&base, levels) })
    }

    #[staticmethod]
    fn oscillatory(x_min: f64, x_max: f64, base_cells: usize, levels: usize) -> PyResult<Self> {
        let base = build_uniform(x_min, x_max, base_cells).map_err(err)?;
        Ok(Self { inner: refine_oscillatory(&base, levels) })
    }

    #[staticmethod]
    fn random(x_min: f64, x_max: f64, base_cells: usize, levels: usize, seed: u64) -> PyResult<Self> {
        let base = build_geometric(x_min, x_max, base_cells).map_err(err)?;
        Ok(Self { inner: refine_random(&base, levels, seed) })
    }

    #[getter]
    fn num_cells(&self) -> usize {
        self.inner.num_cells()
    }

    #[getter]
    fn family(&self) -> String {
        format!("{:?}", self.inner.family)
    }

    fn boundaries(&self) -> Vec<f64> {
        self.inner.boundaries().to_vec()
    }

    fn pivots(&self) -> Vec<f64> {
        self.inner.pivots()
    }

    fn ghost_pivot(&self) -> f64 {
        self.inner.ghost_pivot()
    }

    fn quasi_uniformity_ratio(&self) -> f64 {
        self.inner.quasi_uniformity_ratio()
    }

    fn __len__(&self) -> usize {
        self.inner.num_cells()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(family={:?}, cells={}, x_min={}, x_max={})",
            self.inner.family,
            self.inner.num_cells(),
            self.inner.x_min(),
            self.inner.x_max()
        )
    }
}

#[pyclass(name = "Kernel", skip_from_py_object)]
#[derive(Clone)]
struct PyKernel {
    inner: KernelSpec,
}

#[pymethods]
impl PyKernel {
    /// Parse "constant:k0", "sum:k0" or "product:k0".
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self { inner: KernelSpec::parse(spec).map_err(err)? })
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        self.inner.eval(x, y)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({:?}, k0={})", self.inner.kind, self.inner.k0)
    }
}

#[pyclass(name = "Density", skip_from_py_object)]
#[derive(Clone)]
struct PyDensity {
    inner: DensitySpec,
}

#[pymethods]
impl PyDensity {
    /// Parse "normal:mu,sigma2" or "exponential:alpha".
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self { inner: DensitySpec::parse(spec).map_err(err)? })
    }

    fn eval(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    /// Cell totals of the density projected onto a grid.
    fn project(&self, grid: &PyGrid) -> Vec<f64> {
        self.inner.project_to_cells(&grid.inner).n
    }
}

/// Fixed pivot solver bound to one grid and kernel.
#[pyclass(name = "Solver")]
struct PySolver {
    grid: pivotlab::Grid,
    table: EventTable,
}

#[pymethods]
impl PySolver {
    #[new]
    fn new(grid: &PyGrid, kernel: &PyKernel) -> Self {
        let table = build_event_table(&grid.inner, &kernel.inner);
        Self { grid: grid.inner.clone(), table }
    }

    /// Scheme right-hand side dN/dt for the given cell totals.
    fn rhs(&self, n: Vec<f64>) -> PyResult<Vec<f64>> {
        let state = StateVector::from_counts(n);
        Ok(self.table.rhs(&state).map_err(err)?.n)
    }

    /// RK4 integration from the given cell totals; returns a dict with the
    /// final counts, moments and ghost ledger.
    #[pyo3(signature = (n0, t_end, dt=1e-3))]
    fn integrate(
        &self,
        py: Python<'_>,
        n0: Vec<f64>,
        t_end: f64,
        dt: f64,
    ) -> PyResult<Py<pyo3::types::PyDict>> {
        let state0 = StateVector::from_counts(n0);
        let cfg = IntegrationConfig::new(t_end, dt).map_err(err)?;
        let (state, log) = integrate(&state0, &self.table, &self.grid, &cfg).map_err(err)?;
        let out = pyo3::types::PyDict::new(py);
        out.set_item("n", state.n.clone())?;
        out.set_item("m0", moment(&state, &self.grid, 0))?;
        out.set_item("m1", moment(&state, &self.grid, 1))?;
        out.set_item("ghost_count", state.ghost_count)?;
        out.set_item("ghost_mass", state.ghost_mass)?;
        out.set_item("mass_ledger", total_mass_ledger(&state, &self.grid))?;
        out.set_item(
            "monitor",
            log.rows
                .iter()
                .map(|r| (r.t, r.m0, r.m1, r.ghost_count, r.ghost_mass, r.min_n))
                .collect::<Vec<_>>(),
        )?;
        Ok(out.unbind())
    }
}

/// One study row: (grid points, error or None, EOC or None).
type StudyTableRow = (usize, Option<f64>, Option<f64>);

/// Refinement study. `family` is one of uniform/geometric/locally_uniform/
/// oscillatory/random; `mode` is "self" or "reference". Returns rows of
/// (grid points, error or None, EOC or None).
#[pyfunction]
#[pyo3(signature = (family, x_min, x_max, base_cells, levels, kernel, ic, mode="self", t_end=0.5, dt=1e-3, seeds=vec![1, 2, 3, 4, 5]))]
#[allow(clippy::too_many_arguments)]
fn eoc_study(
    family: &str,
    x_min: f64,
    x_max: f64,
    base_cells: usize,
    levels: usize,
    kernel: &PyKernel,
    ic: &PyDensity,
    mode: &str,
    t_end: f64,
    dt: f64,
    seeds: Vec<u64>,
) -> PyResult<Vec<StudyTableRow>> {
    let eoc_mode = match mode {
        "self" => EocMode::SelfConvergence,
        "reference" => EocMode::Reference,
        other => return Err(PyValueError::new_err(format!("unknown study mode '{other}'"))),
    };
    let cfg = StudyConfig {
        family: MeshFamily::parse(family).map_err(err)?,
        x_min,
        x_max,
        base_cells,
        levels,
        kernel: kernel.inner,
        density: ic.inner.clone(),
        t_end,
        dt,
        eoc_mode,
        seeds,
    };
    let report = run_study(&cfg).map_err(err)?;
    Ok(report.rows.iter().map(|r| (r.gp, r.error, r.eoc)).collect())
}

/// Load and validate a JSON run configuration; returns the canonical JSON.
#[pyfunction]
fn load_config(path: &str) -> PyResult<String> {
    let cfg = RunConfig::load(std::path::Path::new(path)).map_err(err)?;
    serde_json_string(&cfg)
}

fn serde_json_string<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn pivotlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyDensity>()?;
    m.add_class::<PySolver>()?;
    m.add_function(wrap_pyfunction!(eoc_study, m)?)?;
    m.add_function(wrap_pyfunction!(load_config, m)?)?;
    Ok(())
}
