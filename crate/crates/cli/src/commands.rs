//! Subcommand bodies. Each returns the artifacts to write plus messages for
//! the terminal; nothing touches the filesystem until all of them are built.

use std::path::Path;

use serde::Serialize;
use spinreduce::dynamics::{conservation_report, integrate_full, integrate_reduced, IntegratorSpec, Method, Termination};
use spinreduce::model::{MLState, ModelParams, ReducedState};
use spinreduce::portrait::{
    find_fixed_points, is_degenerate_hamiltonian, render_portrait, trace_separatrices, FixedPoint, RenderOptions,
    Separatrix,
};
use spinreduce::transforms::{lift_point, lift_trajectory, project_trajectory};

use crate::check::{run_checks, CheckReport};
use crate::config::{ConfigError, Format, Initial, RunConfig};
use crate::output::{self, Artifact};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    /// Unreadable or malformed input data other than the config.
    #[error("input error: {path}: {message}")]
    Input { path: String, message: String },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<spinreduce::Error> for CliError {
    fn from(e: spinreduce::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
    /// Printed to stdout.
    pub summary: String,
    /// Runs that completed but whose result is a failure (a failed check).
    pub failed: bool,
}

fn status_name(s: Termination) -> &'static str {
    match s {
        Termination::Completed => "completed",
        Termination::BoundaryReached => "boundary-reached",
    }
}

/// Integrator settings for a full run: the adaptive oracle unless a
/// midpoint variant was asked for.
fn full_spec(spec: &IntegratorSpec) -> IntegratorSpec {
    match spec.method {
        Method::SymplecticMidpoint | Method::SymplecticMidpoint4 | Method::AdaptiveRk => *spec,
        Method::StormerVerletGeneralized => IntegratorSpec {
            method: Method::AdaptiveRk,
            ..*spec
        },
    }
}

pub fn simulate(cfg: &RunConfig, full: bool) -> Result<Outcome, CliError> {
    let Some(initial) = cfg.initial else {
        return Err(ConfigError::new("initial", "simulate needs an initial state").into());
    };
    let outs = &cfg.outputs;
    let mut out = Outcome::default();
    let p = &cfg.params;

    let (status, report, lifted) = if full {
        let start = match initial {
            Initial::Ml(st) => st,
            Initial::Reduced(_) => {
                let r = cfg.initial_reduced().expect("initial is set");
                lift_point(&r, p)?
            }
        };
        let spec = full_spec(&cfg.integrator);
        if spec.method != cfg.integrator.method {
            out.warnings.push("stormer-verlet-generalized is reduced-only; the full run uses adaptive-rk".into());
        }
        let traj = integrate_full(p, &start, &spec)?;
        let mut projected = project_trajectory(&traj)?;
        if let Initial::Reduced(_) = initial {
            align_branch(&mut projected, &cfg.initial_reduced().expect("initial is set"));
        }
        if outs.wants(Format::Csv) {
            out.artifacts.push(Artifact::new("trajectory.csv", output::full_csv(&traj, &projected)));
        }
        let report = conservation_report(&traj);
        (traj.status, report, outs.lift.then_some((traj.times, traj.states)))
    } else {
        let start = cfg.initial_reduced().ok_or_else(|| {
            ConfigError::new("initial.ml", "state lies on a singular chart point; no reduced coordinates")
        })?;
        let traj = integrate_reduced(p, &start, &cfg.integrator)?;
        if outs.wants(Format::Csv) {
            out.artifacts.push(Artifact::new("trajectory.csv", output::reduced_csv(&traj)));
        }
        let report = conservation_report(&traj);
        let lifted = if outs.lift {
            let l = lift_trajectory(&traj, p)?;
            Some((l.times, l.states))
        } else {
            None
        };
        (traj.status, report, lifted)
    };

    out.artifacts.push(Artifact::new("conservation.json", output::conservation_json(&report, status)));
    if let Some((times, states)) = &lifted {
        push_lifted(&mut out, outs, times, states);
    }
    if status == Termination::BoundaryReached {
        out.warnings.push(format!(
            "trajectory reached the chart boundary at t = {}",
            report.times.last().copied().unwrap_or(0.0)
        ));
    }
    out.summary = format!(
        "{} run {}: {} samples to t = {}\n{}",
        if full { "full" } else { "reduced" },
        status_name(status),
        report.times.len(),
        report.times.last().copied().unwrap_or(0.0),
        report
            .invariants
            .iter()
            .map(|d| format!("  {:<14} max |drift| {:.3e} (relative {:.3e})\n", d.name, d.max_abs_drift, d.max_rel_drift))
            .collect::<String>()
    );
    Ok(out)
}

/// Shifts a projected trajectory by the lattice translation of `(u, v)`
/// that leaves `(m, l)` unchanged, so its first sample matches `start`.
/// The lattice is spanned by `√2π·(1, 1)` and `√2π·(1, −1)`.
fn align_branch(projected: &mut [ReducedState], start: &ReducedState) {
    let Some(first) = projected.first() else {
        return;
    };
    let cell = ModelParams::u_period();
    let du = first.u - start.u;
    let dv = first.v.unwrap_or(0.0) - start.v.unwrap_or(0.0);
    let a = ((du + dv) / (2.0 * cell)).round();
    let b = ((du - dv) / (2.0 * cell)).round();
    let (su, sv) = (cell * (a + b), cell * (a - b));
    for r in projected.iter_mut() {
        r.u -= su;
        r.v = r.v.map(|v| v - sv);
    }
}

fn push_lifted(out: &mut Outcome, outs: &crate::config::OutputsConfig, times: &[f64], states: &[MLState]) {
    if outs.wants(Format::Csv) {
        out.artifacts.push(Artifact::new("lifted.csv", output::lifted_csv(times, states)));
    }
    if outs.wants(Format::Svg) {
        out.artifacts.extend(output::l_projections(states));
    }
}

#[derive(Serialize)]
struct FixedPointRecord {
    u: f64,
    p_u: f64,
    kind: &'static str,
    energy: f64,
    residual: f64,
}

fn fixed_point_records(fps: &[FixedPoint]) -> impl Iterator<Item = FixedPointRecord> + '_ {
    fps.iter().map(|f| FixedPointRecord {
        u: f.u,
        p_u: f.p_u,
        kind: f.kind.as_str(),
        energy: f.energy,
        residual: f.residual,
    })
}

fn fixed_points_csv(fps: &[FixedPoint]) -> String {
    let mut s = String::from("u,p_u,kind,energy,residual\n");
    for f in fps {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            output::num(f.u),
            output::num(f.p_u),
            f.kind.as_str(),
            output::num(f.energy),
            output::num(f.residual)
        ));
    }
    s
}

fn fixed_point_table(cfg: &RunConfig, grid_n: usize, out: &mut Outcome) -> Vec<FixedPoint> {
    let p = &cfg.params;
    if is_degenerate_hamiltonian(p) {
        out.warnings
            .push("Hamiltonian is constant on the chart; no fixed points are reported".into());
    }
    let fps = find_fixed_points(p, grid_n);
    if cfg.outputs.wants(Format::JsonLines) {
        out.artifacts
            .push(Artifact::new("fixed_points.jsonl", output::json_lines(fixed_point_records(&fps))));
    }
    if cfg.outputs.wants(Format::Csv) {
        out.artifacts.push(Artifact::new("fixed_points.csv", fixed_points_csv(&fps)));
    }
    fps
}

fn count_summary(fps: &[FixedPoint]) -> String {
    let mut s = format!("{} fixed points\n", fps.len());
    for f in fps {
        s.push_str(&format!(
            "  {:<10} u = {:.6}  p_u = {:+.6}  H = {:.6}  residual {:.1e}\n",
            f.kind.as_str(),
            f.u,
            f.p_u,
            f.energy,
            f.residual
        ));
    }
    s
}

pub fn fixed_points(cfg: &RunConfig, grid_n: usize) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let fps = fixed_point_table(cfg, grid_n, &mut out);
    out.summary = count_summary(&fps);
    Ok(out)
}

#[derive(Serialize)]
struct SeparatrixRecord<'a> {
    energy: f64,
    topology: spinreduce::portrait::Topology,
    saddles: &'a [usize],
    branches: Vec<BranchRecord<'a>>,
}

#[derive(Serialize)]
struct BranchRecord<'a> {
    from: usize,
    manifold: spinreduce::portrait::Manifold,
    sign: i8,
    end: spinreduce::portrait::BranchEnd,
    max_energy_error: f64,
    points: &'a [(f64, f64)],
}

fn separatrix_records(seps: &[Separatrix]) -> impl Iterator<Item = SeparatrixRecord<'_>> {
    seps.iter().map(|s| SeparatrixRecord {
        energy: s.energy,
        topology: s.topology,
        saddles: &s.saddle_refs,
        branches: s
            .branches
            .iter()
            .map(|b| BranchRecord {
                from: b.from,
                manifold: b.manifold,
                sign: b.sign,
                end: b.end,
                max_energy_error: b.max_energy_error,
                points: &b.points,
            })
            .collect(),
    })
}

pub fn portrait(cfg: &RunConfig, grid_n: usize) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let p = &cfg.params;
    let fps = fixed_point_table(cfg, grid_n, &mut out);
    let seps = trace_separatrices(p, &fps);
    if cfg.outputs.wants(Format::JsonLines) {
        out.artifacts
            .push(Artifact::new("separatrices.jsonl", output::json_lines(separatrix_records(&seps))));
    }
    if cfg.outputs.wants(Format::Svg) {
        let orbits = match cfg.initial_reduced() {
            Some(start) => match integrate_reduced(p, &start, &cfg.integrator) {
                Ok(t) => vec![t],
                Err(e) => {
                    out.warnings.push(format!("sample orbit skipped: {e}"));
                    Vec::new()
                }
            },
            None => Vec::new(),
        };
        let opts = RenderOptions {
            level_count: cfg.portrait.level_count,
            resolution: cfg.portrait.resolution,
            u_periods: cfg.portrait.u_periods_to_render,
            ..Default::default()
        };
        out.artifacts
            .push(Artifact::new("portrait.svg", render_portrait(p, &fps, &seps, &orbits, &opts)));
    }
    out.summary = format!("{}{} separatrices\n", count_summary(&fps), seps.len());
    Ok(out)
}

/// Reduced trajectory table read back for lifting.
pub fn read_reduced_csv(path: &Path) -> Result<(Vec<f64>, Vec<ReducedState>), CliError> {
    let input_err = |message: String| CliError::Input {
        path: path.display().to_string(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| input_err(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| input_err(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| input_err(format!("missing column `{name}`")))
    };
    let [t, u, q, v] = [column("t")?, column("u")?, column("p_u")?, column("v")?];
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| input_err(e.to_string()))?;
        let field = |i: usize, name: &str| {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| input_err(format!("row {}: column `{name}` is not a number", k + 2)))
        };
        times.push(field(t, "t")?);
        states.push(ReducedState::with_v(field(u, "u")?, field(q, "p_u")?, field(v, "v")?));
    }
    if states.is_empty() {
        return Err(input_err("no rows".into()));
    }
    Ok((times, states))
}

pub fn lift(cfg: &RunConfig, trajectory: &Path) -> Result<Outcome, CliError> {
    let (times, reduced) = read_reduced_csv(trajectory)?;
    let p: &ModelParams = &cfg.params;
    let states = reduced
        .iter()
        .zip(&times)
        .map(|(r, t)| lift_point(r, p).map_err(|e| CliError::Runtime(format!("t = {t}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Outcome::default();
    let mut outs = cfg.outputs.clone();
    outs.lift = true;
    push_lifted(&mut out, &outs, &times, &states);
    out.summary = format!("lifted {} samples\n", states.len());
    Ok(out)
}

pub fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report: CheckReport = run_checks(cfg);
    let json = report.to_json();
    let mut summary = String::new();
    for c in &report.checks {
        summary.push_str(&format!(
            "{} {:<22} measured {:.3e}  tolerance {:.1e}  {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        ));
    }
    Ok(Outcome {
        artifacts: vec![Artifact::new("check.json", json)],
        warnings: Vec::new(),
        summary,
        failed: !report.passed,
    })
}
