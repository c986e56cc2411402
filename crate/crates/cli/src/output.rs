//! Serialization of run artifacts. Everything is rendered to memory first
//! and then written file by file through a temporary sibling and a rename.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use spinreduce::dynamics::{ConservationReport, Termination, Trajectory};
use spinreduce::model::{MLState, ReducedState};

/// A named file body awaiting an atomic write.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, body: String) -> Self {
        Self { name: name.into(), body }
    }
}

/// Writes each artifact into `dir` via a temporary file and a rename.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(a.body.as_bytes())?;
        tmp.as_file().sync_all()?;
        let target = dir.join(&a.name);
        tmp.persist(&target).map_err(|e| e.error)?;
        written.push(target);
    }
    Ok(written)
}

/// Seventeen significant digits: enough to round-trip any double.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let cells: Vec<String> = values.into_iter().map(num).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

fn drift_column(traj_invariants: &[Vec<f64>], k: usize) -> impl Iterator<Item = f64> + '_ {
    let initial = traj_invariants.first().map_or(0.0, |row| row[k]);
    traj_invariants.iter().map(move |row| row[k] - initial)
}

/// `t,u,p_u,v,H,H_drift`.
pub fn reduced_csv(traj: &Trajectory<ReducedState>) -> String {
    let mut out = String::from("t,u,p_u,v,H,H_drift\n");
    let h = traj.invariant_names.iter().position(|&n| n == "H").unwrap_or(0);
    let drift: Vec<f64> = drift_column(&traj.invariants, h).collect();
    for (k, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        csv_row(
            &mut out,
            [*t, s.u, s.p_u, s.v.unwrap_or(0.0), traj.invariants[k][h], drift[k]],
        );
    }
    out
}

/// Full run with its projection:
/// `t,u,p_u,v,m_x,m_y,m_z,l_x,l_y,l_z,H,H_drift,m_z_drift,casimir_plus_drift,casimir_minus_drift`.
pub fn full_csv(traj: &Trajectory<MLState>, projected: &[ReducedState]) -> String {
    let mut out = String::from("t,u,p_u,v,m_x,m_y,m_z,l_x,l_y,l_z,H");
    for name in &traj.invariant_names {
        let _ = write!(out, ",{name}_drift");
    }
    out.push('\n');
    let drifts: Vec<Vec<f64>> = (0..traj.invariant_names.len())
        .map(|k| drift_column(&traj.invariants, k).collect())
        .collect();
    let h = traj.invariant_names.iter().position(|&n| n == "H").unwrap_or(0);
    for (k, ((t, st), r)) in traj.times.iter().zip(&traj.states).zip(projected).enumerate() {
        let mut row = vec![*t, r.u, r.p_u, r.v.unwrap_or(0.0)];
        row.extend(st.to_array());
        row.push(traj.invariants[k][h]);
        row.extend(drifts.iter().map(|d| d[k]));
        csv_row(&mut out, row);
    }
    out
}

/// `t,m_x,m_y,m_z,l_x,l_y,l_z`.
pub fn lifted_csv(times: &[f64], states: &[MLState]) -> String {
    let mut out = String::from("t,m_x,m_y,m_z,l_x,l_y,l_z\n");
    for (t, st) in times.iter().zip(states) {
        csv_row(&mut out, std::iter::once(*t).chain(st.to_array()));
    }
    out
}

#[derive(Serialize)]
struct DriftSummary<'a> {
    name: &'a str,
    initial: f64,
    max_abs_drift: f64,
    max_rel_drift: f64,
}

#[derive(Serialize)]
struct ConservationSummary<'a> {
    status: Termination,
    samples: usize,
    t_last: f64,
    invariants: Vec<DriftSummary<'a>>,
}

pub fn conservation_json(report: &ConservationReport, status: Termination) -> String {
    let summary = ConservationSummary {
        status,
        samples: report.times.len(),
        t_last: report.times.last().copied().unwrap_or(0.0),
        invariants: report
            .invariants
            .iter()
            .map(|d| DriftSummary {
                name: d.name,
                initial: d.initial,
                max_abs_drift: d.max_abs_drift,
                max_rel_drift: d.max_rel_drift,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
    s.push('\n');
    s
}

/// One JSON record per line.
pub fn json_lines<T: Serialize>(records: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Orthographic views of a 3-D curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Xy,
    Xz,
    Oblique,
}

impl View {
    pub const ALL: [View; 3] = [View::Xy, View::Xz, View::Oblique];

    pub fn name(self) -> &'static str {
        match self {
            View::Xy => "xy",
            View::Xz => "xz",
            View::Oblique => "oblique",
        }
    }

    fn axes(self) -> (&'static str, &'static str) {
        match self {
            View::Xy => ("x", "y"),
            View::Xz => ("x", "z"),
            View::Oblique => ("", ""),
        }
    }

    fn project(self, p: [f64; 3]) -> (f64, f64) {
        match self {
            View::Xy => (p[0], p[1]),
            View::Xz => (p[0], p[2]),
            View::Oblique => {
                // Azimuth 35°, elevation 25°.
                let (sa, ca) = 35f64.to_radians().sin_cos();
                let (se, ce) = 25f64.to_radians().sin_cos();
                let x = ca * p[0] - sa * p[1];
                let depth = sa * p[0] + ca * p[1];
                (x, ce * p[2] - se * depth)
            }
        }
    }
}

/// Orthographic projection of a 3-D curve with a reference circle of
/// radius `scale` (the sphere outline in the oblique view).
pub fn curve_svg(title: &str, points: &[[f64; 3]], scale: f64, view: View) -> String {
    let size = 420.0;
    let pad = 30.0;
    let s = if scale > 0.0 { scale * 1.1 } else { 1.0 };
    let map = |(x, y): (f64, f64)| {
        (
            size / 2.0 + (size / 2.0 - pad) * x / s,
            size / 2.0 - (size / 2.0 - pad) * y / s,
        )
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    out.push_str(concat!(
        "<style>",
        ".curve{fill:none;stroke:#1f5fa8;stroke-width:1}",
        ".frame{fill:none;stroke:#999;stroke-dasharray:4 3}",
        ".axis{stroke:#000;stroke-width:0.6}",
        "text{font-family:sans-serif;font-size:13px}",
        "</style>\n"
    ));
    let (cx, cy) = map((0.0, 0.0));
    let r = (size / 2.0 - pad) * scale / s;
    let _ = writeln!(out, "<circle class=\"frame\" cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\"/>");
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{:.2}\" y1=\"{cy:.2}\" x2=\"{:.2}\" y2=\"{cy:.2}\"/>",
        pad,
        size - pad
    );
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\"/>",
        pad,
        size - pad
    );
    let (h, v) = view.axes();
    if !h.is_empty() {
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{h}</text>", size - pad + 4.0, cy + 4.0);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{v}</text>", cx + 4.0, pad - 8.0);
    }
    let _ = writeln!(out, "<text x=\"8\" y=\"18\">{title} ({})</text>", view.name());
    if points.len() >= 2 {
        let mut d = String::new();
        for (k, p) in points.iter().enumerate() {
            let (x, y) = map(view.project(*p));
            let _ = write!(d, "{}{x:.2},{y:.2} ", if k == 0 { 'M' } else { 'L' });
        }
        d.pop();
        let _ = writeln!(out, "<path class=\"curve\" d=\"{d}\"/>");
    }
    out.push_str("</svg>\n");
    out
}

/// Three projections of the `l` curve of a lifted trajectory.
pub fn l_projections(states: &[MLState]) -> Vec<Artifact> {
    let pts: Vec<[f64; 3]> = states.iter().map(|s| [s.l.x, s.l.y, s.l.z]).collect();
    let scale = states.iter().map(|s| s.l.norm()).fold(0.0, f64::max);
    View::ALL
        .iter()
        .map(|&v| Artifact::new(format!("lifted_l_{}.svg", v.name()), curve_svg("l(t)", &pts, scale, v)))
        .collect()
}
