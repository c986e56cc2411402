//! Time integration of the reduced canonical system and of the full
//! two-vector system, with conserved-quantity logging.
//!
//! The reduced system is the primary path. Its integrators are implicit
//! and symplectic and advance the cyclic angle `v` by quadrature of
//! `∂H/∂p_v` alongside `(u, p_u)`. The full system is integrated with an
//! adaptive Dormand–Prince pair and serves as the independent oracle.

mod rk;
pub mod symplectic;
mod trajectory;

use serde::{Deserialize, Serialize};

pub use rk::DormandPrince;
pub use trajectory::{conservation_report, ConservationReport, InvariantDrift, Termination, Trajectory};

use crate::error::{Error, Result};
use crate::model::{
    check_interior, energy_ml, energy_reduced_at, grad_reduced_at, vector_field_full, MLState, ModelParams,
    ReducedState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Implicit midpoint, order 2.
    SymplecticMidpoint,
    /// Triple-jump composition of implicit midpoint, order 4.
    #[serde(rename = "symplectic-midpoint-4")]
    SymplecticMidpoint4,
    /// Generalized (implicit) Störmer–Verlet, order 2. Reduced system only.
    StormerVerletGeneralized,
    /// Dormand–Prince 8(5,3); `dt` becomes the output spacing.
    AdaptiveRk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    pub method: Method,
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub sample_stride: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            method: Method::SymplecticMidpoint,
            dt: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            t_end: 100.0,
            sample_stride: 1,
        }
    }
}

impl IntegratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidSpec(s));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.dt >= self.t_end {
            return bad(format!("dt ({}) must be smaller than t_end ({})", self.dt, self.t_end));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be at least 1".into());
        }
        Ok(())
    }

    /// Fixed-step grid `t_k = min(k·dt, t_end)`, `k = 0..=n`.
    fn step_count(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    fn time_at(&self, k: usize) -> f64 {
        (k as f64 * self.dt).min(self.t_end)
    }
}

fn is_boundary(e: &Error) -> bool {
    matches!(e, Error::Boundary { .. } | Error::Domain { .. })
}

/// `(u̇, ṗ_u, v̇)` of the reduced system, in slice form for the steppers.
fn reduced_rhs(p: &ModelParams) -> impl FnMut(&[f64], &mut [f64]) -> Result<()> + '_ {
    move |x, dx| {
        let g = grad_reduced_at(p, x[0], x[1])?;
        dx[0] = g.dp_u;
        dx[1] = -g.du;
        dx[2] = g.dp_v;
        Ok(())
    }
}

fn reduced_invariants(p: &ModelParams, x: &[f64]) -> Vec<f64> {
    vec![
        energy_reduced_at(p, x[0], x[1]).unwrap_or(f64::NAN),
        p.p_v(),
    ]
}

/// One step of a fixed-step method on `(u, p_u, v)`. A step that lands on
/// or past the chart boundary is a boundary error.
pub fn reduced_step(p: &ModelParams, method: Method, x: [f64; 3], h: f64, t: f64) -> Result<[f64; 3]> {
    let mut f = reduced_rhs(p);
    let y = match method {
        Method::SymplecticMidpoint => symplectic::implicit_midpoint(&mut f, &x, h, t)?,
        Method::SymplecticMidpoint4 => symplectic::midpoint_triple_jump(&mut f, &x, h, t)?,
        Method::StormerVerletGeneralized => {
            let mut g = |q: f64, pu: f64| {
                let gr = grad_reduced_at(p, q, pu)?;
                Ok((gr.du, gr.dp_u, gr.dp_v))
            };
            let (q, pu, v) = symplectic::stormer_verlet_generalized(&mut g, (x[0], x[1], x[2]), h, t)?;
            vec![q, pu, v]
        }
        Method::AdaptiveRk => {
            return Err(Error::InvalidSpec("adaptive-rk has no fixed step".into()));
        }
    };
    check_interior(p, y[1])?;
    Ok([y[0], y[1], y[2]])
}

struct Sampler {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl Sampler {
    fn push(&mut self, t: f64, x: &[f64]) {
        self.times.push(t);
        self.states.push(x.to_vec());
    }

    fn push_if_new(&mut self, t: f64, x: &[f64]) {
        if self.times.last() != Some(&t) {
            self.push(t, x);
        }
    }
}

type FixedStep<'a> = dyn FnMut(&[f64], f64, f64) -> Result<Vec<f64>> + 'a;
type Rhs<'a> = dyn FnMut(&[f64], &mut [f64]) -> Result<()> + 'a;

enum Stepper<'a> {
    Fixed(&'a mut FixedStep<'a>),
    Adaptive(&'a mut Rhs<'a>),
}

/// Fixed-step or adaptive integration of a first-order system, treating
/// chart-boundary errors as a normal halt.
fn run(stepper: Stepper<'_>, x0: &[f64], spec: &IntegratorSpec) -> Result<(Sampler, Termination)> {
    spec.validate()?;
    let mut s = Sampler {
        times: Vec::new(),
        states: Vec::new(),
    };
    s.push(0.0, x0);
    let mut x = x0.to_vec();
    match stepper {
        Stepper::Fixed(step) => {
            let n = spec.step_count();
            for k in 1..=n {
                let (t0, t1) = (spec.time_at(k - 1), spec.time_at(k));
                match step(&x, t1 - t0, t0) {
                    Ok(y) => x = y,
                    Err(e) if is_boundary(&e) => {
                        s.push_if_new(t0, &x);
                        return Ok((s, Termination::BoundaryReached));
                    }
                    Err(e) => return Err(e),
                }
                if k % spec.sample_stride == 0 || k == n {
                    s.push(t1, &x);
                }
            }
        }
        Stepper::Adaptive(f) => {
            let spacing = spec.dt * spec.sample_stride as f64;
            let n = (spec.t_end / spacing - 1e-9).ceil().max(1.0) as usize;
            let mut dp = DormandPrince::new(
                |_t: f64, y: &[f64], dy: &mut [f64]| f(y, dy),
                x.len(),
                spec.rel_tol,
                spec.abs_tol,
            );
            let mut t = 0.0;
            for k in 1..=n {
                let target = (k as f64 * spacing).min(spec.t_end);
                match dp.advance(&mut t, &mut x, target) {
                    Ok(()) => s.push(target, &x),
                    Err(e) if is_boundary(&e) => {
                        s.push_if_new(t, &x);
                        return Ok((s, Termination::BoundaryReached));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok((s, Termination::Completed))
}

/// Integrate the reduced system from `initial`; `v` starts at
/// `initial.v.unwrap_or(0.0)`. The invariant log holds `H` and `p_v`.
pub fn integrate_reduced(
    p: &ModelParams,
    initial: &ReducedState,
    spec: &IntegratorSpec,
) -> Result<Trajectory<ReducedState>> {
    let x0 = [initial.u, initial.p_u, initial.v.unwrap_or(0.0)];
    grad_reduced_at(p, x0[0], x0[1])?;
    let method = spec.method;
    let mut rhs = reduced_rhs(p);
    let mut step = |x: &[f64], h: f64, t: f64| {
        reduced_step(p, method, [x[0], x[1], x[2]], h, t).map(|y| y.to_vec())
    };
    let stepper = match method {
        Method::AdaptiveRk => Stepper::Adaptive(&mut rhs),
        _ => Stepper::Fixed(&mut step),
    };
    let (s, status) = run(stepper, &x0, spec)?;
    let invariants = s.states.iter().map(|x| reduced_invariants(p, x)).collect();
    Ok(Trajectory {
        times: s.times,
        states: s
            .states
            .iter()
            .map(|x| ReducedState::with_v(x[0], x[1], x[2]))
            .collect(),
        invariant_names: vec!["H", "p_v"],
        invariants,
        status,
    })
}

pub fn full_invariants(p: &ModelParams, st: &MLState) -> Vec<f64> {
    let (cp, cm) = st.casimirs();
    vec![energy_ml(p, st), st.m.z, cp, cm]
}

pub const FULL_INVARIANTS: [&str; 4] = ["H", "m_z", "casimir_plus", "casimir_minus"];

/// Integrate the full six-dimensional system. Supports `adaptive-rk` (the
/// oracle default) and the two midpoint variants; the latter preserve
/// `m_z` and both Casimirs up to round-off because they are quadratic.
pub fn integrate_full(p: &ModelParams, initial: &MLState, spec: &IntegratorSpec) -> Result<Trajectory<MLState>> {
    let mut rhs = |x: &[f64], dx: &mut [f64]| -> Result<()> {
        let (md, ld) = vector_field_full(p, &MLState::from_slice(x));
        dx.copy_from_slice(&[md.x, md.y, md.z, ld.x, ld.y, ld.z]);
        Ok(())
    };
    let x0 = initial.to_array();
    let (s, status) = match spec.method {
        Method::AdaptiveRk => run(Stepper::Adaptive(&mut rhs), &x0, spec)?,
        Method::SymplecticMidpoint => run(
            Stepper::Fixed(&mut |x: &[f64], h, t| symplectic::implicit_midpoint(&mut rhs, x, h, t)),
            &x0,
            spec,
        )?,
        Method::SymplecticMidpoint4 => run(
            Stepper::Fixed(&mut |x: &[f64], h, t| symplectic::midpoint_triple_jump(&mut rhs, x, h, t)),
            &x0,
            spec,
        )?,
        Method::StormerVerletGeneralized => {
            return Err(Error::InvalidSpec(
                "stormer-verlet-generalized needs canonical coordinates; use it for the reduced system".into(),
            ))
        }
    };
    let states: Vec<MLState> = s.states.iter().map(|x| MLState::from_slice(x)).collect();
    let invariants = states.iter().map(|st| full_invariants(p, st)).collect();
    Ok(Trajectory {
        times: s.times,
        states,
        invariant_names: FULL_INVARIANTS.to_vec(),
        invariants,
        status,
    })
}
