use std::fmt::Write;

use super::fixed_points::{FixedPoint, FixedPointKind};
use super::level_set::{level_fan, Polyline};
use super::separatrix::Separatrix;
use crate::dynamics::Trajectory;
use crate::model::{ModelParams, ReducedState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Number of background level curves.
    pub level_count: usize,
    /// Grid resolution for the background level curves.
    pub resolution: usize,
    /// Periods of `u` shown side by side.
    pub u_periods: usize,
    pub width: f64,
    pub height: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            level_count: 24,
            resolution: 200,
            u_periods: 1,
            width: 800.0,
            height: 520.0,
        }
    }
}

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

struct Frame {
    u_max: f64,
    p_lo: f64,
    p_hi: f64,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn x(&self, u: f64) -> f64 {
        self.x0 + self.w * u / self.u_max
    }

    fn y(&self, p_u: f64) -> f64 {
        self.y0 + self.h * (self.p_hi - p_u) / (self.p_hi - self.p_lo)
    }
}

fn path_data(frame: &Frame, pts: &[(f64, f64)], shift: f64) -> String {
    let mut d = String::new();
    for (k, &(u, q)) in pts.iter().enumerate() {
        let cmd = if k == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{:.2},{:.2} ", frame.x(u + shift), frame.y(q));
    }
    d.pop();
    d
}

/// Copies of an unwrapped polyline needed to cover the visible window.
fn shifts(frame: &Frame, pts: &[(f64, f64)]) -> Vec<f64> {
    let period = ModelParams::u_period();
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(u, _)| (a.min(u), b.max(u)));
    if !lo.is_finite() {
        return Vec::new();
    }
    let k_min = ((0.0 - hi) / period).floor() as i64;
    let k_max = ((frame.u_max - lo) / period).ceil() as i64;
    (k_min..=k_max).map(|k| k as f64 * period).collect()
}

fn polyline_group(out: &mut String, frame: &Frame, class: &str, lines: &[&[(f64, f64)]]) {
    let _ = writeln!(out, "<g class=\"{class}\" clip-path=\"url(#plot)\">");
    for pts in lines {
        if pts.len() < 2 {
            continue;
        }
        for s in shifts(frame, pts) {
            let _ = writeln!(out, "<path d=\"{}\"/>", path_data(frame, pts, s));
        }
    }
    out.push_str("</g>\n");
}

/// Layered SVG phase portrait: level curves, separatrices, sample orbits,
/// then fixed-point markers (saddles as crosses, centers as dots). Markers
/// of the first period carry the classes `saddle` / `center`; repeats in
/// further periods carry `saddle-repeat` / `center-repeat`.
pub fn render_portrait(
    p: &ModelParams,
    fixed_points: &[FixedPoint],
    separatrices: &[Separatrix],
    sample_orbits: &[Trajectory<ReducedState>],
    opts: &RenderOptions,
) -> String {
    let range = p.admissible_momentum_range();
    let periods = opts.u_periods.max(1);
    let frame = Frame {
        u_max: ModelParams::u_period() * periods as f64,
        p_lo: range.lo,
        p_hi: if range.hi > range.lo { range.hi } else { range.lo + 1.0 },
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP,
        w: opts.width - MARGIN_LEFT - MARGIN_RIGHT,
        h: opts.height - MARGIN_TOP - MARGIN_BOTTOM,
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = opts.width,
        h = opts.height
    );
    out.push_str(concat!(
        "<style>",
        ".levels path{fill:none;stroke:#b0b0b0;stroke-width:0.7}",
        ".separatrices path{fill:none;stroke:#c0392b;stroke-width:1.6}",
        ".orbits path{fill:none;stroke:#1f5fa8;stroke-width:1.2}",
        ".saddle,.saddle-repeat{stroke:#000;stroke-width:1.5}",
        ".center,.center-repeat{fill:#000}",
        ".axes{fill:none;stroke:#000}",
        "text{font-family:sans-serif;font-size:13px}",
        "</style>\n"
    ));
    let _ = writeln!(
        out,
        "<defs><clipPath id=\"plot\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath></defs>",
        frame.x0, frame.y0, frame.w, frame.h
    );

    // Axes with ticks at multiples of π/√2 in u and five ticks in p_u.
    let _ = writeln!(
        out,
        "<rect class=\"axes\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/>",
        frame.x0, frame.y0, frame.w, frame.h
    );
    let half = ModelParams::u_period() / 2.0;
    out.push_str("<g class=\"ticks\">\n");
    for k in 0..=(2 * periods) {
        let x = frame.x(half * k as f64);
        let y = frame.y0 + frame.h;
        let _ = writeln!(out, "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#000\"/>", y + 5.0);
        let label = match k {
            0 => "0".to_string(),
            1 => "π/√2".to_string(),
            _ => format!("{k}π/√2"),
        };
        let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{label}</text>", y + 20.0);
    }
    for k in 0..=4 {
        let q = frame.p_lo + (frame.p_hi - frame.p_lo) * k as f64 / 4.0;
        let y = frame.y(q);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#000\"/>",
            frame.x0 - 5.0,
            frame.x0
        );
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{q:.3}</text>", frame.x0 - 8.0, y + 4.0);
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        "<text class=\"xlabel\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">u</text>",
        frame.x0 + frame.w / 2.0,
        opts.height - 8.0
    );
    let _ = writeln!(
        out,
        "<text class=\"ylabel\" transform=\"translate(16,{:.2}) rotate(-90)\" text-anchor=\"middle\">p_u = l_z/√2</text>",
        frame.y0 + frame.h / 2.0
    );

    let levels: Vec<Polyline> = if opts.level_count > 0 {
        level_fan(p, opts.level_count, opts.resolution)
    } else {
        Vec::new()
    };
    let level_pts: Vec<&[(f64, f64)]> = levels.iter().map(|l| l.points.as_slice()).collect();
    polyline_group(&mut out, &frame, "levels", &level_pts);

    let sep_pts: Vec<&[(f64, f64)]> = separatrices
        .iter()
        .flat_map(|s| s.branches.iter().map(|b| b.points.as_slice()))
        .collect();
    polyline_group(&mut out, &frame, "separatrices", &sep_pts);

    let orbit_pts: Vec<Vec<(f64, f64)>> = sample_orbits
        .iter()
        .map(|t| t.states.iter().map(|s| (s.u, s.p_u)).collect())
        .collect();
    let orbit_refs: Vec<&[(f64, f64)]> = orbit_pts.iter().map(|v| v.as_slice()).collect();
    polyline_group(&mut out, &frame, "orbits", &orbit_refs);

    out.push_str("<g class=\"fixed-points\">\n");
    let period = ModelParams::u_period();
    for fp in fixed_points {
        for k in 0..periods {
            let x = frame.x(fp.u + k as f64 * period);
            let y = frame.y(fp.p_u);
            let repeat = if k == 0 { "" } else { "-repeat" };
            match fp.kind {
                FixedPointKind::Saddle => {
                    let _ = writeln!(
                        out,
                        "<path class=\"saddle{repeat}\" d=\"M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}\"/>",
                        x - 5.0,
                        y - 5.0,
                        x + 5.0,
                        y + 5.0,
                        x - 5.0,
                        y + 5.0,
                        x + 5.0,
                        y - 5.0
                    );
                }
                FixedPointKind::Center => {
                    let _ = writeln!(out, "<circle class=\"center{repeat}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\"/>");
                }
                FixedPointKind::Degenerate => {
                    let _ = writeln!(
                        out,
                        "<rect class=\"degenerate{repeat}\" x=\"{:.2}\" y=\"{:.2}\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"#000\"/>",
                        x - 4.0,
                        y - 4.0
                    );
                }
            }
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}
