//! Invariant suite behind `spinreduce check`: bracket identities, gradient
//! and transform consistency, conservation and full/reduced equivalence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spinreduce::algebra::{gh_bracket_table, ml_bracket_table, sublattice_bracket_table, BracketTable};
use spinreduce::dynamics::{
    conservation_report, integrate_full, integrate_reduced, IntegratorSpec, Method, Termination,
};
use spinreduce::model::{
    energy_ml, energy_reduced_at, energy_sublattice, grad_ml, grad_reduced_at, Coefficients, MLState,
    ModelParams, ReducedState, SublatticeParams, Vec3,
};
use spinreduce::transforms::{lift_point, ml_to_reduced, periodic_difference, project_trajectory};

use crate::config::RunConfig;

pub const GRADIENT_TOL: f64 = 1e-6;
pub const ENERGY_CHAIN_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const H_DRIFT_TOL: f64 = 1e-8;
pub const CASIMIR_TOL: f64 = 1e-9;
pub const EQUIVALENCE_TOL: f64 = 1e-6;
pub const ROTATION_TOL: f64 = 1e-12;

const FD_STEP: f64 = 1e-6;
/// Output spacing of the adaptive oracle in the conservation check.
const ORACLE_SPACING: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst value observed; NaN when the check could not run.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn measured(name: &'static str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: measured < tolerance,
            measured,
            tolerance,
            detail: detail.into(),
        }
    }

    fn failed(name: &'static str, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: false,
            measured: f64::NAN,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        // NaN is not JSON; failed-to-run checks serialize `measured` as null.
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn run_checks(cfg: &RunConfig) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.check.seed);
    let n = cfg.check.samples;
    let mut checks = vec![
        bracket_check("brackets_ml", &ml_bracket_table()),
        bracket_check("brackets_gh", &gh_bracket_table()),
        bracket_check("brackets_sublattice", &sublattice_bracket_table()),
        gradient_ml_check(&cfg.params, n, &mut rng),
        gradient_reduced_check(cfg.params.coeffs(), n, &mut rng),
        energy_chain_check(cfg.params.coeffs(), n, &mut rng),
        round_trip_check(cfg.params.coeffs(), n, &mut rng),
    ];
    let start = start_state(cfg);
    checks.push(reduced_drift_check(cfg, &start));
    checks.extend(full_checks(cfg, &start));
    if let Some(sp) = &cfg.sublattice_params {
        checks.push(rotation_check(sp, n, &mut rng));
    }
    CheckReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// The configured initial state, or the middle of the chart at `u = 0`.
fn start_state(cfg: &RunConfig) -> ReducedState {
    cfg.initial_reduced().unwrap_or_else(|| {
        let r = cfg.params.admissible_momentum_range();
        ReducedState::with_v(0.0, 0.5 * (r.lo + r.hi), 0.0)
    })
}

fn bracket_check(name: &'static str, table: &BracketTable) -> CheckResult {
    let mut detail = Vec::new();
    if let Some((i, j)) = table.antisymmetry_violation() {
        detail.push(format!("antisymmetry fails at ({}, {})", table.names()[i], table.names()[j]));
    }
    if let Some((i, j, k)) = table.jacobi_violation() {
        let n = table.names();
        detail.push(format!("Jacobi fails at ({}, {}, {})", n[i], n[j], n[k]));
    }
    let violations = detail.len() as f64;
    let detail = if detail.is_empty() {
        format!("{} generators, exact", table.dimension())
    } else {
        detail.join("; ")
    };
    CheckResult::measured(name, violations, 0.5, detail)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_err(analytic: &[f64], fd: &[f64]) -> f64 {
    let diff: Vec<f64> = analytic.iter().zip(fd).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(analytic).max(f64::MIN_POSITIVE)
}

fn random_vec(r: &mut impl Rng, scale: f64) -> Vec3 {
    Vec3::new(
        r.random_range(-scale..scale),
        r.random_range(-scale..scale),
        r.random_range(-scale..scale),
    )
}

/// Both `g = (m+l)/2` and `h = (m−l)/2` keep a transverse norm above 0.05.
fn random_nonsingular_ml(r: &mut impl Rng) -> MLState {
    loop {
        let st = MLState::new(random_vec(r, 1.0), random_vec(r, 1.0));
        let g = (st.m + st.l) * 0.5;
        let h = (st.m - st.l) * 0.5;
        if g.x.hypot(g.y) > 0.05 && h.x.hypot(h.y) > 0.05 {
            return st;
        }
    }
}

fn gradient_ml_check(p: &ModelParams, n: usize, r: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let st = MLState::new(random_vec(r, 1.0), random_vec(r, 1.0));
        let x = st.to_array();
        let fd: Vec<f64> = (0..6)
            .map(|k| {
                let (mut a, mut b) = (x, x);
                a[k] += FD_STEP;
                b[k] -= FD_STEP;
                (energy_ml(p, &MLState::from_slice(&a)) - energy_ml(p, &MLState::from_slice(&b))) / (2.0 * FD_STEP)
            })
            .collect();
        let (dm, dl) = grad_ml(p, &st);
        worst = worst.max(rel_err(&[dm.x, dm.y, dm.z, dl.x, dl.y, dl.z], &fd));
    }
    CheckResult::measured("gradient_ml", worst, GRADIENT_TOL, format!("{n} random states"))
}

/// Integrals drawn so the chart has width, and a state at least 1% of that
/// width inside it.
fn random_interior(c: &Coefficients, r: &mut impl Rng) -> (ModelParams, f64, f64) {
    loop {
        let g: f64 = r.random_range(0.3..1.5);
        let h: f64 = r.random_range(0.3..1.5);
        let pv = r.random_range(-0.8..0.8) * std::f64::consts::SQRT_2 * g.min(h);
        let Ok(p) = ModelParams::new(*c, g, h, pv) else {
            continue;
        };
        let range = p.admissible_momentum_range();
        if range.width() < 1e-2 {
            continue;
        }
        let m = 0.01 * range.width();
        let q = r.random_range(range.lo + m..range.hi - m);
        let u = r.random_range(0.0..ModelParams::u_period());
        return (p, u, q);
    }
}

fn gradient_reduced_check(c: &Coefficients, n: usize, r: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (p, u, q) = random_interior(c, r);
        let Ok(g) = grad_reduced_at(&p, u, q) else {
            return CheckResult::failed("gradient_reduced", GRADIENT_TOL, format!("no gradient at ({u}, {q})"));
        };
        let h = |pp: &ModelParams, u, q| energy_reduced_at(pp, u, q).unwrap_or(f64::NAN);
        let at_pv = |pv: f64| {
            ModelParams::new(*c, p.g_norm(), p.h_norm(), pv)
                .map(|pp| h(&pp, u, q))
                .unwrap_or(f64::NAN)
        };
        let fd = [
            (h(&p, u + FD_STEP, q) - h(&p, u - FD_STEP, q)) / (2.0 * FD_STEP),
            (h(&p, u, q + FD_STEP) - h(&p, u, q - FD_STEP)) / (2.0 * FD_STEP),
            (at_pv(p.p_v() + FD_STEP) - at_pv(p.p_v() - FD_STEP)) / (2.0 * FD_STEP),
        ];
        let e = rel_err(&[g.du, g.dp_u, g.dp_v], &fd);
        worst = if e.is_nan() { f64::NAN } else { worst.max(e) };
        if worst.is_nan() {
            break;
        }
    }
    CheckResult::measured("gradient_reduced", worst, GRADIENT_TOL, format!("{n} random interior states"))
}

fn energy_chain_check(c: &Coefficients, n: usize, r: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let st = random_nonsingular_ml(r);
        let red = match ml_to_reduced(&st) {
            Ok(red) => red,
            Err(e) => return CheckResult::failed("energy_chain", ENERGY_CHAIN_TOL, e.to_string()),
        };
        let e = ModelParams::new(*c, red.g_norm, red.h_norm, red.p_v).and_then(|p| {
            let a = energy_ml(&p, &st);
            let b = energy_reduced_at(&p, red.state.u, red.state.p_u)?;
            Ok((a - b).abs() / a.abs().max(1.0))
        });
        match e {
            Ok(e) => worst = worst.max(e),
            Err(e) => return CheckResult::failed("energy_chain", ENERGY_CHAIN_TOL, e.to_string()),
        }
    }
    CheckResult::measured("energy_chain", worst, ENERGY_CHAIN_TOL, format!("{n} random non-singular states"))
}

fn round_trip_check(c: &Coefficients, n: usize, r: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let st = random_nonsingular_ml(r);
        let back = ml_to_reduced(&st).and_then(|red| {
            let p = ModelParams::new(*c, red.g_norm, red.h_norm, red.p_v)?;
            lift_point(&red.state, &p)
        });
        match back {
            Ok(b) => worst = worst.max((b.m - st.m).amax()).max((b.l - st.l).amax()),
            Err(e) => return CheckResult::failed("round_trip", ROUND_TRIP_TOL, e.to_string()),
        }
    }
    CheckResult::measured("round_trip", worst, ROUND_TRIP_TOL, format!("{n} random non-singular states"))
}

/// The configured method when it is symplectic, implicit midpoint otherwise.
fn symplectic_spec(spec: &IntegratorSpec) -> IntegratorSpec {
    let method = match spec.method {
        Method::AdaptiveRk => Method::SymplecticMidpoint,
        m => m,
    };
    IntegratorSpec { method, ..*spec }
}

fn reduced_drift_check(cfg: &RunConfig, start: &ReducedState) -> CheckResult {
    let spec = symplectic_spec(&cfg.integrator);
    let name = "reduced_h_drift";
    match integrate_reduced(&cfg.params, start, &spec) {
        Ok(traj) if traj.status == Termination::Completed => {
            let rep = conservation_report(&traj);
            let h = rep.get("H").expect("reduced runs log H");
            CheckResult::measured(
                name,
                h.max_rel_drift,
                H_DRIFT_TOL,
                format!(
                    "{} run from ({}, {}) over t = {}, dt = {}",
                    method_name(spec.method),
                    start.u,
                    start.p_u,
                    spec.t_end,
                    spec.dt
                ),
            )
        }
        Ok(traj) => CheckResult::failed(
            name,
            H_DRIFT_TOL,
            format!("run reached the chart boundary at t = {}", traj.times.last().unwrap_or(&0.0)),
        ),
        Err(e) => CheckResult::failed(name, H_DRIFT_TOL, e.to_string()),
    }
}

fn method_name(m: Method) -> String {
    serde_json::to_value(m)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Parameters of the full-system oracle; `broken_sign` flips the
/// Dzyaloshinsky coefficient so the equivalence check must fail.
fn oracle_params(cfg: &RunConfig) -> ModelParams {
    if cfg.check.broken_sign {
        let mut c = *cfg.params.coeffs();
        c.dzyaloshinsky = -c.dzyaloshinsky;
        cfg.params.with_coeffs(c)
    } else {
        cfg.params
    }
}

fn full_checks(cfg: &RunConfig, start: &ReducedState) -> Vec<CheckResult> {
    let names = ["full_invariants", "reduction_equivalence"];
    let initial = match lift_point(start, &cfg.params) {
        Ok(st) => st,
        Err(e) => {
            return vec![
                CheckResult::failed(names[0], CASIMIR_TOL, e.to_string()),
                CheckResult::failed(names[1], EQUIVALENCE_TOL, e.to_string()),
            ]
        }
    };
    let oracle = oracle_params(cfg);
    let t_end = cfg.integrator.t_end;
    let oracle_spec = |dt: f64| IntegratorSpec {
        method: Method::AdaptiveRk,
        dt: dt.min(0.5 * t_end),
        t_end,
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        sample_stride: 1,
    };

    let invariants = match integrate_full(&oracle, &initial, &oracle_spec(ORACLE_SPACING)) {
        Ok(traj) => {
            let rep = conservation_report(&traj);
            let worst = ["m_z", "casimir_plus", "casimir_minus"]
                .iter()
                .filter_map(|n| rep.get(n))
                .fold(0.0_f64, |w, d| w.max(d.max_abs_drift));
            CheckResult::measured(
                names[0],
                worst,
                CASIMIR_TOL,
                format!("adaptive full run over t = {t_end}; max |drift| of m_z and both Casimirs"),
            )
        }
        Err(e) => CheckResult::failed(names[0], CASIMIR_TOL, e.to_string()),
    };

    let red_spec = IntegratorSpec {
        method: Method::SymplecticMidpoint4,
        ..cfg.integrator
    };
    let equivalence = (|| {
        let red = integrate_reduced(&cfg.params, start, &red_spec)?;
        let full = integrate_full(&oracle, &initial, &oracle_spec(red_spec.dt * red_spec.sample_stride as f64))?;
        let proj = project_trajectory(&full)?;
        Ok::<_, spinreduce::Error>((red, full.times, proj))
    })();
    let equivalence = match equivalence {
        Ok((red, times, proj)) => {
            let period = ModelParams::u_period();
            let n = red.len().min(proj.len());
            let worst = red.states[..n].iter().zip(&proj[..n]).fold(0.0_f64, |w, (a, b)| {
                w.max(periodic_difference(a.u, b.u, period).abs()).max((a.p_u - b.p_u).abs())
            });
            let time_mismatch = red.times[..n].iter().zip(&times[..n]).any(|(a, b)| (a - b).abs() > 1e-9);
            if time_mismatch || red.len() != proj.len() {
                CheckResult::failed(names[1], EQUIVALENCE_TOL, "sample grids of the two runs differ")
            } else {
                CheckResult::measured(
                    names[1],
                    worst,
                    EQUIVALENCE_TOL,
                    format!(
                        "max |Δu|, |Δp_u| of the projected full run vs symplectic-midpoint-4 at dt = {}{}",
                        red_spec.dt,
                        if cfg.check.broken_sign { " (oracle sign broken)" } else { "" }
                    ),
                )
            }
        }
        Err(e) => CheckResult::failed(names[1], EQUIVALENCE_TOL, e.to_string()),
    };
    vec![invariants, equivalence]
}

fn rotate_z(v: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

fn rotation_check(p: &SublatticeParams, n: usize, r: &mut impl Rng) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let s: [Vec3; 4] = std::array::from_fn(|_| random_vec(r, 1.0));
        let angle = r.random_range(0.0..std::f64::consts::TAU);
        let rotated = s.map(|v| rotate_z(&v, angle));
        let (e0, e1) = (energy_sublattice(p, &s), energy_sublattice(p, &rotated));
        worst = worst.max((e0 - e1).abs() / e0.abs().max(1.0));
    }
    CheckResult::measured("sublattice_z_rotation", worst, ROTATION_TOL, format!("{n} random configurations"))
}
