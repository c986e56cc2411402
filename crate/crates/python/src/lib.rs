//! Python bindings: model parameters, energies, transforms, integration and
//! the phase-portrait pipeline.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spinreduce::dynamics::{self, IntegratorSpec, Method, Trajectory};
use spinreduce::model::{self as m, Coefficients, MLState, ReducedState, Vec3};
use spinreduce::portrait::{self, RenderOptions};
use spinreduce::transforms;

fn value_error(e: spinreduce::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_method(name: &str) -> PyResult<Method> {
    match name {
        "symplectic-midpoint" => Ok(Method::SymplecticMidpoint),
        "symplectic-midpoint-4" => Ok(Method::SymplecticMidpoint4),
        "stormer-verlet-generalized" => Ok(Method::StormerVerletGeneralized),
        "adaptive-rk" => Ok(Method::AdaptiveRk),
        other => Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    }
}

/// Energy coefficients plus the Casimir magnitudes and cyclic momentum.
#[pyclass(frozen, name = "ModelParams")]
pub struct PyModelParams {
    inner: m::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (exchange_l, exchange_m, anisotropy_l, anisotropy_m, dzyaloshinsky, quartic, g_norm, h_norm, p_v))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        exchange_l: f64,
        exchange_m: f64,
        anisotropy_l: f64,
        anisotropy_m: f64,
        dzyaloshinsky: f64,
        quartic: f64,
        g_norm: f64,
        h_norm: f64,
        p_v: f64,
    ) -> PyResult<Self> {
        let coeffs = Coefficients {
            exchange_l,
            exchange_m,
            anisotropy_l,
            anisotropy_m,
            dzyaloshinsky,
            quartic,
        };
        let inner = m::ModelParams::new(coeffs, g_norm, h_norm, p_v).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn g_norm(&self) -> f64 {
        self.inner.g_norm()
    }

    #[getter]
    fn h_norm(&self) -> f64 {
        self.inner.h_norm()
    }

    #[getter]
    fn p_v(&self) -> f64 {
        self.inner.p_v()
    }

    /// `(lo, hi)` of the admissible `p_u` interval.
    fn momentum_range(&self) -> (f64, f64) {
        let r = self.inner.admissible_momentum_range();
        (r.lo, r.hi)
    }

    /// Period of the reduced Hamiltonian in `u`.
    #[staticmethod]
    fn u_period() -> f64 {
        m::ModelParams::u_period()
    }

    fn __repr__(&self) -> String {
        let c = self.inner.coeffs();
        format!(
            "ModelParams(exchange_l={}, exchange_m={}, anisotropy_l={}, anisotropy_m={}, dzyaloshinsky={}, quartic={}, g_norm={}, h_norm={}, p_v={})",
            c.exchange_l,
            c.exchange_m,
            c.anisotropy_l,
            c.anisotropy_m,
            c.dzyaloshinsky,
            c.quartic,
            self.inner.g_norm(),
            self.inner.h_norm(),
            self.inner.p_v()
        )
    }
}

fn ml_state(mv: [f64; 3], l: [f64; 3]) -> MLState {
    MLState::new(Vec3::from(mv), Vec3::from(l))
}

fn arrays(st: &MLState) -> ([f64; 3], [f64; 3]) {
    (st.m.into(), st.l.into())
}

#[pyfunction]
fn energy_ml(params: &PyModelParams, m: [f64; 3], l: [f64; 3]) -> f64 {
    m::energy_ml(&params.inner, &ml_state(m, l))
}

#[pyfunction]
fn energy_reduced(params: &PyModelParams, u: f64, p_u: f64) -> PyResult<f64> {
    m::energy_reduced_at(&params.inner, u, p_u).map_err(value_error)
}

/// `(dH/du, dH/dp_u, dH/dp_v)`.
#[pyfunction]
fn grad_reduced(params: &PyModelParams, u: f64, p_u: f64) -> PyResult<(f64, f64, f64)> {
    let g = m::grad_reduced_at(&params.inner, u, p_u).map_err(value_error)?;
    Ok((g.du, g.dp_u, g.dp_v))
}

/// Reduced coordinates and integrals of an `(m, l)` state.
#[pyfunction]
fn ml_to_reduced<'py>(py: Python<'py>, m: [f64; 3], l: [f64; 3]) -> PyResult<Bound<'py, PyDict>> {
    let r = transforms::ml_to_reduced(&ml_state(m, l)).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("u", r.state.u)?;
    d.set_item("p_u", r.state.p_u)?;
    d.set_item("v", r.state.v.unwrap_or(0.0))?;
    d.set_item("g_norm", r.g_norm)?;
    d.set_item("h_norm", r.h_norm)?;
    d.set_item("p_v", r.p_v)?;
    Ok(d)
}

/// `(m, l)` of a reduced state at the integrals in `params`.
#[pyfunction]
#[pyo3(signature = (params, u, p_u, v = 0.0))]
fn lift_point(params: &PyModelParams, u: f64, p_u: f64, v: f64) -> PyResult<([f64; 3], [f64; 3])> {
    let st = transforms::lift_point(&ReducedState::with_v(u, p_u, v), &params.inner).map_err(value_error)?;
    Ok(arrays(&st))
}

fn spec(method: &str, dt: f64, t_end: f64, sample_stride: usize) -> PyResult<IntegratorSpec> {
    let s = IntegratorSpec {
        method: parse_method(method)?,
        dt,
        t_end,
        sample_stride,
        ..Default::default()
    };
    s.validate().map_err(value_error)?;
    Ok(s)
}

fn status_name(s: dynamics::Termination) -> &'static str {
    match s {
        dynamics::Termination::Completed => "completed",
        dynamics::Termination::BoundaryReached => "boundary-reached",
    }
}

fn trajectory_dict<'py, S>(
    py: Python<'py>,
    traj: &Trajectory<S>,
    columns: &[(&str, fn(&S) -> f64)],
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", traj.times.clone())?;
    for (name, get) in columns {
        d.set_item(*name, traj.states.iter().map(get).collect::<Vec<f64>>())?;
    }
    for name in &traj.invariant_names {
        d.set_item(*name, traj.invariant_column(name))?;
    }
    d.set_item("status", status_name(traj.status))?;
    Ok(d)
}

/// Integrate the reduced system; returns columns `t, u, p_u, v, H, p_v`
/// and the termination `status`.
#[pyfunction]
#[pyo3(signature = (params, u, p_u, v = 0.0, method = "symplectic-midpoint", dt = 1e-3, t_end = 100.0, sample_stride = 1))]
#[allow(clippy::too_many_arguments)]
fn integrate_reduced<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    u: f64,
    p_u: f64,
    v: f64,
    method: &str,
    dt: f64,
    t_end: f64,
    sample_stride: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(method, dt, t_end, sample_stride)?;
    let start = ReducedState::with_v(u, p_u, v);
    let traj = py
        .detach(|| dynamics::integrate_reduced(&params.inner, &start, &s))
        .map_err(value_error)?;
    trajectory_dict(
        py,
        &traj,
        &[("u", |s| s.u), ("p_u", |s| s.p_u), ("v", |s| s.v.unwrap_or(0.0))],
    )
}

/// Integrate the six-dimensional system; returns columns `t, m_x .. l_z`
/// (`m_z` is itself conserved) and the invariants `H, casimir_plus, casimir_minus`.
#[pyfunction]
#[pyo3(signature = (params, m, l, method = "adaptive-rk", dt = 1e-2, t_end = 100.0, sample_stride = 1))]
#[allow(clippy::too_many_arguments)]
fn integrate_full<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    m: [f64; 3],
    l: [f64; 3],
    method: &str,
    dt: f64,
    t_end: f64,
    sample_stride: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let s = spec(method, dt, t_end, sample_stride)?;
    let start = ml_state(m, l);
    let traj = py
        .detach(|| dynamics::integrate_full(&params.inner, &start, &s))
        .map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("t", traj.times.clone())?;
    let names = ["m_x", "m_y", "m_z", "l_x", "l_y", "l_z"];
    for (k, name) in names.iter().enumerate() {
        let col: Vec<f64> = traj.states.iter().map(|s| s.to_array()[k]).collect();
        d.set_item(*name, col)?;
    }
    for name in ["H", "casimir_plus", "casimir_minus"] {
        d.set_item(name, traj.invariant_column(name))?;
    }
    d.set_item("status", status_name(traj.status))?;
    Ok(d)
}

/// Fixed points as `(u, p_u, kind, energy, residual)` tuples.
#[pyfunction]
#[pyo3(signature = (params, grid_n = 64))]
fn find_fixed_points(py: Python<'_>, params: &PyModelParams, grid_n: usize) -> Vec<(f64, f64, &'static str, f64, f64)> {
    py.detach(|| portrait::find_fixed_points(&params.inner, grid_n))
        .iter()
        .map(|f| (f.u, f.p_u, f.kind.as_str(), f.energy, f.residual))
        .collect()
}

/// Level curves at `energy` as lists of `(u, p_u)` vertices.
#[pyfunction]
#[pyo3(signature = (params, energy, resolution = 200))]
fn level_set(py: Python<'_>, params: &PyModelParams, energy: f64, resolution: usize) -> Vec<Vec<(f64, f64)>> {
    py.detach(|| portrait::level_set(&params.inner, energy, resolution))
        .into_iter()
        .map(|l| l.points)
        .collect()
}

/// SVG phase portrait with fixed points and separatrices.
#[pyfunction]
#[pyo3(signature = (params, grid_n = 64, level_count = 24, resolution = 200, u_periods = 1))]
fn render_portrait(
    py: Python<'_>,
    params: &PyModelParams,
    grid_n: usize,
    level_count: usize,
    resolution: usize,
    u_periods: usize,
) -> String {
    py.detach(|| {
        let p = &params.inner;
        let fps = portrait::find_fixed_points(p, grid_n);
        let seps = portrait::trace_separatrices(p, &fps);
        let opts = RenderOptions {
            level_count,
            resolution,
            u_periods,
            ..Default::default()
        };
        portrait::render_portrait(p, &fps, &seps, &[], &opts)
    })
}

#[pymodule]
fn spinreduce_py(module: &Bound<'_, PyModule>) -> PyResult<()> {
    module.add_class::<PyModelParams>()?;
    module.add_function(wrap_pyfunction!(energy_ml, module)?)?;
    module.add_function(wrap_pyfunction!(energy_reduced, module)?)?;
    module.add_function(wrap_pyfunction!(grad_reduced, module)?)?;
    module.add_function(wrap_pyfunction!(ml_to_reduced, module)?)?;
    module.add_function(wrap_pyfunction!(lift_point, module)?)?;
    module.add_function(wrap_pyfunction!(integrate_reduced, module)?)?;
    module.add_function(wrap_pyfunction!(integrate_full, module)?)?;
    module.add_function(wrap_pyfunction!(find_fixed_points, module)?)?;
    module.add_function(wrap_pyfunction!(level_set, module)?)?;
    module.add_function(wrap_pyfunction!(render_portrait, module)?)?;
    Ok(())
}
