//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;
#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use spinreduce::algebra::{gh_bracket_table, ml_bracket_table, sublattice_bracket_table};
use spinreduce::dynamics::{
    conservation_report, integrate_full, integrate_reduced, IntegratorSpec, Method, Termination,
};
use spinreduce::model::{
    energy_ml, energy_reduced_at, grad_ml, grad_reduced_at, MLState, ModelParams, Vec3,
};
use spinreduce::portrait::{find_fixed_points, periodic_distance, trace_separatrices, FixedPointKind};
use spinreduce::transforms::{lift_point, lift_trajectory, ml_to_reduced, periodic_difference, project_trajectory};
use spinreduce::Error;
use spinreduce_cli::config::{self, RunConfig};

const FD_STEP: f64 = 1e-6;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped(name: &str) -> RunConfig {
    config::load(&configs_dir().join(format!("{name}.toml"))).expect("shipped config loads")
}

fn within(elapsed: Duration, budget_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < budget_s, format!("{s:.2} s of {budget_s} s"))
}

fn rel_err(analytic: &[f64], fd: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    norm(&mut analytic.iter().zip(fd).map(|(a, b)| a - b)) / norm(&mut analytic.iter().copied())
}

fn algebra_soundness() -> Verdict {
    let t0 = Instant::now();
    let mut bad = Vec::new();
    for (name, table) in [
        ("ml", ml_bracket_table()),
        ("gh", gh_bracket_table()),
        ("sublattice", sublattice_bracket_table()),
    ] {
        if table.antisymmetry_violation().is_some() || table.jacobi_violation().is_some() {
            bad.push(name);
        }
    }
    let (fast, time) = within(t0.elapsed(), 1.0);
    verdict(bad.is_empty() && fast, format!("violations in {bad:?}; {time}"))
}

fn gradient_correctness() -> Verdict {
    let t0 = Instant::now();
    let mut r = common::rng(101);
    let mut worst_ml: f64 = 0.0;
    let mut worst_red: f64 = 0.0;
    for _ in 0..1000 {
        let p = ModelParams::new(common::random_coeffs(&mut r), 1.0, 1.0, 0.0).unwrap();
        let st = MLState::new(common::random_vec(&mut r, 1.0), common::random_vec(&mut r, 1.0));
        let x = st.to_array();
        let fd: Vec<f64> = (0..6)
            .map(|k| {
                let (mut a, mut b) = (x, x);
                a[k] += FD_STEP;
                b[k] -= FD_STEP;
                (energy_ml(&p, &MLState::from_slice(&a)) - energy_ml(&p, &MLState::from_slice(&b))) / (2.0 * FD_STEP)
            })
            .collect();
        let (dm, dl) = grad_ml(&p, &st);
        worst_ml = worst_ml.max(rel_err(&[dm.x, dm.y, dm.z, dl.x, dl.y, dl.z], &fd));

        let (p, s) = common::random_interior(&mut r);
        let (u, q) = (s.u, s.p_u);
        let h = |u, q| energy_reduced_at(&p, u, q).unwrap();
        let at_pv = |pv: f64| {
            let pp = ModelParams::new(*p.coeffs(), p.g_norm(), p.h_norm(), pv).unwrap();
            energy_reduced_at(&pp, u, q).unwrap()
        };
        let fd = [
            (h(u + FD_STEP, q) - h(u - FD_STEP, q)) / (2.0 * FD_STEP),
            (h(u, q + FD_STEP) - h(u, q - FD_STEP)) / (2.0 * FD_STEP),
            (at_pv(p.p_v() + FD_STEP) - at_pv(p.p_v() - FD_STEP)) / (2.0 * FD_STEP),
        ];
        let g = grad_reduced_at(&p, u, q).unwrap();
        worst_red = worst_red.max(rel_err(&[g.du, g.dp_u, g.dp_v], &fd));
    }
    let (fast, time) = within(t0.elapsed(), 5.0);
    verdict(
        worst_ml < 1e-6 && worst_red < 1e-6 && fast,
        format!("worst relative error ml {worst_ml:.2e}, reduced {worst_red:.2e}; {time}"),
    )
}

fn reduction_consistency() -> Verdict {
    let t0 = Instant::now();
    let mut r = common::rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let st = common::random_nonsingular_ml(&mut r);
        let red = ml_to_reduced(&st).unwrap();
        let p = ModelParams::new(common::random_coeffs(&mut r), red.g_norm, red.h_norm, red.p_v).unwrap();
        let a = energy_ml(&p, &st);
        let b = energy_reduced_at(&p, red.state.u, red.state.p_u).unwrap();
        worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
    }
    let (fast, time) = within(t0.elapsed(), 5.0);
    verdict(worst < 1e-10 && fast, format!("worst relative error {worst:.2e} over 10^4 states; {time}"))
}

fn reduction_equivalence() -> Verdict {
    let t0 = Instant::now();
    let period = ModelParams::u_period();
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["center_orbit", "near_separatrix", "s_shaped"] {
        let cfg = shipped(name);
        let start = cfg.initial_reduced().unwrap();
        let red_spec = IntegratorSpec {
            method: Method::SymplecticMidpoint4,
            dt: 1e-3,
            t_end: 100.0,
            sample_stride: 1,
            ..cfg.integrator
        };
        let full_spec = IntegratorSpec {
            method: Method::AdaptiveRk,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..red_spec
        };
        let red = integrate_reduced(&cfg.params, &start, &red_spec).unwrap();
        let full = integrate_full(&cfg.params, &lift_point(&start, &cfg.params).unwrap(), &full_spec).unwrap();
        let proj = project_trajectory(&full).unwrap();
        let worst = if proj.len() == red.len() {
            red.states.iter().zip(&proj).fold(0.0_f64, |w, (a, b)| {
                w.max(periodic_difference(a.u, b.u, period).abs()).max((a.p_u - b.p_u).abs())
            })
        } else {
            f64::INFINITY
        };
        ok &= worst < 1e-6;
        parts.push(format!("{name} {worst:.1e}"));
    }
    let (fast, time) = within(t0.elapsed(), 60.0);
    verdict(ok && fast, format!("max deviation {}; {time}", parts.join(", ")))
}

fn conservation() -> Verdict {
    let cfg = shipped("default");
    let start = cfg.initial_reduced().unwrap();
    let spec = IntegratorSpec {
        method: Method::SymplecticMidpoint,
        dt: 1e-3,
        t_end: 1000.0,
        sample_stride: 10,
        ..cfg.integrator
    };
    let traj = integrate_reduced(&cfg.params, &start, &spec).unwrap();
    let rep = conservation_report(&traj);
    let h = rep.get("H").unwrap();
    let rel = h.max_rel_drift;
    let d100 = h.max_abs_drift_until(&rep.times, 100.0);
    let d1000 = h.max_abs_drift_until(&rep.times, 1000.0);
    let reduced_ok = traj.status == Termination::Completed && rel < 1e-8 && d1000 <= 3.0 * d100;

    let full_spec = IntegratorSpec {
        method: Method::AdaptiveRk,
        dt: 1e-2,
        t_end: 100.0,
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        sample_stride: 1,
    };
    let full = integrate_full(&cfg.params, &lift_point(&start, &cfg.params).unwrap(), &full_spec).unwrap();
    let frep = conservation_report(&full);
    let casimir = ["m_z", "casimir_plus", "casimir_minus"]
        .iter()
        .map(|n| frep.get(n).unwrap().max_abs_drift)
        .fold(0.0_f64, f64::max);
    verdict(
        reduced_ok && casimir < 1e-9,
        format!(
            "H relative drift {rel:.2e}, drift(1000)/drift(100) = {:.2}; full max |drift| {casimir:.2e}",
            d1000 / d100.max(f64::MIN_POSITIVE)
        ),
    )
}

fn portrait_structure() -> Verdict {
    let t0 = Instant::now();
    let cfg = shipped("default");
    let p = &cfg.params;
    let fps = find_fixed_points(p, cfg.portrait.grid_n);
    let centers = fps.iter().filter(|f| f.kind == FixedPointKind::Center).count();
    let saddles = fps.iter().filter(|f| f.kind == FixedPointKind::Saddle).count();
    let residual = fps.iter().map(|f| f.residual).fold(0.0_f64, f64::max);

    let cells = oracle::index_scan(p, 512);
    let confirmed = cells.len() == fps.len()
        && cells.iter().all(|c| {
            let expected = if c.index > 0 { FixedPointKind::Center } else { FixedPointKind::Saddle };
            fps.iter()
                .any(|f| f.kind == expected && periodic_distance((f.u, f.p_u), (c.u, c.p_u)) <= c.radius * 1.01)
        });

    let seps = trace_separatrices(p, &fps);
    let energy_err = seps
        .iter()
        .flat_map(|s| s.branches.iter())
        .flat_map(|b| {
            let e = fps[b.from].energy;
            b.points.iter().map(move |&(u, q)| (energy_reduced_at(p, u, q).unwrap() - e).abs())
        })
        .fold(0.0_f64, f64::max);
    let (fast, time) = within(t0.elapsed(), 30.0);
    verdict(
        centers >= 1 && saddles >= 1 && residual < 1e-10 && confirmed && !seps.is_empty() && energy_err < 1e-6 && fast,
        format!(
            "{centers} centers, {saddles} saddles, max residual {residual:.1e}, oracle {} ({} cells), {} separatrices with max |ΔH| {energy_err:.1e}; {time}",
            if confirmed { "agrees" } else { "disagrees" },
            cells.len(),
            seps.len()
        ),
    )
}

/// Lifted trajectory of a shipped config at every integrator step.
fn lifted(name: &str) -> (RunConfig, Vec<f64>, Vec<MLState>) {
    let cfg = shipped(name);
    let spec = IntegratorSpec {
        sample_stride: 1,
        ..cfg.integrator
    };
    let traj = integrate_reduced(&cfg.params, &cfg.initial_reduced().unwrap(), &spec).unwrap();
    let l = lift_trajectory(&traj, &cfg.params).unwrap();
    (cfg, l.times, l.states)
}

fn center_orbit_torus() -> Verdict {
    let (_, times, states) = lifted("center_orbit");
    let mz0 = states[0].m.z;
    let mz_dev = states.iter().map(|s| (s.m.z - mz0).abs()).fold(0.0_f64, f64::max);
    let half = times[times.len() - 1] / 2.0;
    let band = |pick: &dyn Fn(f64) -> bool| {
        times
            .iter()
            .zip(&states)
            .filter(|(t, _)| pick(**t))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, s)| (lo.min(s.l.z), hi.max(s.l.z)))
    };
    let first = band(&|t| t <= half);
    let second = band(&|t| t > half);
    let dmin = (first.0 - second.0).abs();
    let dmax = (first.1 - second.1).abs();
    verdict(
        mz_dev < 1e-9 && dmin < 1e-6 && dmax < 1e-6 && first.1 - first.0 > 1e-3,
        format!(
            "m_z deviation {mz_dev:.1e}; l_z band [{:.6}, {:.6}] vs [{:.6}, {:.6}], Δmin {dmin:.1e}, Δmax {dmax:.1e}",
            first.0, first.1, second.0, second.1
        ),
    )
}

fn near_separatrix_bimodal() -> Verdict {
    let (cfg, times, states) = lifted("near_separatrix");
    let saddle_levels: Vec<f64> = find_fixed_points(&cfg.params, cfg.portrait.grid_n)
        .iter()
        .filter(|f| f.kind == FixedPointKind::Saddle)
        .map(|f| f.p_u)
        .collect();
    let (q_lo, q_hi) = saddle_levels
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &q| (a.min(q), b.max(q)));
    if saddle_levels.len() < 2 || q_hi - q_lo < 1e-6 {
        return verdict(false, format!("need two distinct saddle levels, got {saddle_levels:?}"));
    }
    // p_u = l_z/√2, so the two circles sit at l_z = √2·p_u of the saddles.
    let levels = [q_lo * std::f64::consts::SQRT_2, q_hi * std::f64::consts::SQRT_2];
    let half_width = 0.25 * (levels[1] - levels[0]);
    let label = |lz: f64| levels.iter().position(|l| (lz - l).abs() < half_width);

    let mut dwell = 0.0;
    let mut visits = Vec::new();
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        if let Some(side) = label(states[k].l.z) {
            dwell += dt;
            if visits.last() != Some(&side) {
                visits.push(side);
            }
        }
    }
    let fraction = dwell / (times[times.len() - 1] - times[0]);
    let transitions = visits.len().saturating_sub(1);
    verdict(
        fraction > 0.8 && transitions >= 1,
        format!(
            "levels l_z = {:.4}, {:.4} ± {half_width:.4}; {:.1}% of time near them, {transitions} transitions",
            levels[0],
            levels[1],
            100.0 * fraction
        ),
    )
}

fn transform_totality() -> Verdict {
    let mut r = common::rng(109);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let st = common::random_nonsingular_ml(&mut r);
        let red = ml_to_reduced(&st).unwrap();
        let p = ModelParams::new(common::default_coeffs(), red.g_norm, red.h_norm, red.p_v).unwrap();
        let back = lift_point(&red.state, &p).unwrap();
        worst = worst.max((back.m - st.m).amax()).max((back.l - st.l).amax());
    }
    // g = (m+l)/2 or h = (m−l)/2 along z: no longitude.
    let mut singular_ok = 0;
    let trials = 1000;
    for k in 0..trials {
        let a = common::random_vec(&mut r, 1.0);
        let z = Vec3::new(0.0, 0.0, r.random_range(-1.0..1.0));
        // m + l = 2z (g singular) or m − l = 2z (h singular).
        let st = if k % 2 == 0 {
            MLState::new(z + a, z - a)
        } else {
            MLState::new(z + a, a - z)
        };
        if matches!(ml_to_reduced(&st), Err(Error::SingularConfiguration { .. })) {
            singular_ok += 1;
        }
    }
    verdict(
        worst < 1e-10 && singular_ok == trials,
        format!("round-trip error {worst:.2e} over 10^4 states; {singular_ok}/{trials} singular states rejected"),
    )
}

fn run_binary(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_spinreduce"))
        .args(args)
        .env_remove("SPINREDUCE_THREADS")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut compared = 0;
    let mut differing = Vec::new();
    for name in ["default", "center_orbit", "near_separatrix", "s_shaped"] {
        let cfg = configs_dir().join(format!("{name}.toml"));
        let cfg = cfg.to_str().unwrap();
        for cmd in ["simulate", "portrait", "check"] {
            let runs: Vec<PathBuf> = (0..2).map(|k| tmp.path().join(format!("{name}-{cmd}-{k}"))).collect();
            for dir in &runs {
                if !run_binary(&[cmd, "--config", cfg, "--out", dir.to_str().unwrap()]) {
                    differing.push(format!("{name}/{cmd} failed to run"));
                }
            }
            let (a, b) = (tree(&runs[0]), tree(&runs[1]));
            if a.is_empty() || a != b {
                differing.push(format!("{name}/{cmd}"));
            }
            compared += a.len();
        }
    }
    verdict(
        differing.is_empty(),
        format!("{compared} files compared across two runs; differing: {differing:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("algebra soundness", algebra_soundness),
        ("gradient correctness", gradient_correctness),
        ("reduction consistency", reduction_consistency),
        ("reduction equivalence in dynamics", reduction_equivalence),
        ("conservation", conservation),
        ("phase portrait structure", portrait_structure),
        ("center orbit on a torus", center_orbit_torus),
        ("near-separatrix orbit is bimodal", near_separatrix_bimodal),
        ("transform totality", transform_totality),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!(
            "criterion {:>2} {:<36} {}  {}",
            k + 1,
            name,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
