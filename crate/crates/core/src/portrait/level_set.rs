use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{energy_reduced_at, ModelParams};

/// Polyline in `(u, p_u)`. Along a curve `u` is unwrapped, so a curve that
/// crosses the seam of the fundamental domain continues past `√2π` (or
/// below 0) instead of jumping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    /// Closed on the cylinder: the last point meets the first, possibly
    /// after a whole number of periods in `u`.
    pub closed: bool,
}

impl Polyline {
    /// Net number of `u` periods swept from first to last point.
    pub fn winding(&self) -> i64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => ((b.0 - a.0) / ModelParams::u_period()).round() as i64,
            _ => 0,
        }
    }
}

/// Sampled `H` on a `resolution × (resolution + 1)` node grid: `resolution`
/// columns covering one period in `u` (periodic), `resolution + 1` rows
/// spanning the admissible `p_u` interval including its ends.
pub struct EnergyGrid {
    pub n_u: usize,
    pub n_p: usize,
    pub du: f64,
    pub p_lo: f64,
    pub dp: f64,
    values: Vec<f64>,
}

impl EnergyGrid {
    pub fn new(p: &ModelParams, resolution: usize) -> Self {
        let resolution = resolution.max(2);
        let range = p.admissible_momentum_range();
        let n_u = resolution;
        let n_p = resolution + 1;
        let du = ModelParams::u_period() / n_u as f64;
        let dp = range.width() / resolution as f64;
        let values = (0..n_p)
            .into_par_iter()
            .flat_map_iter(|j| {
                let p_u = if j == n_p - 1 { range.hi } else { range.lo + dp * j as f64 };
                (0..n_u).map(move |i| energy_reduced_at(p, du * i as f64, p_u).unwrap_or(f64::NAN))
            })
            .collect();
        Self {
            n_u,
            n_p,
            du,
            p_lo: range.lo,
            dp,
            values,
        }
    }

    /// Value at node `(i mod n_u, j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n_u + i % self.n_u]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Contour polylines at `energy`.
    pub fn contour(&self, energy: f64) -> Vec<Polyline> {
        contour_grid(self, energy)
    }
}

/// Grid edge identity. `H(i, j)` joins nodes `(i, j)`–`(i+1, j)`;
/// `V(i, j)` joins `(i, j)`–`(i, j+1)`. Column indices are taken mod `n_u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

struct Crossings<'a> {
    g: &'a EnergyGrid,
    level: f64,
}

impl Crossings<'_> {
    fn frac(&self, a: f64, b: f64) -> f64 {
        ((self.level - a) / (b - a)).clamp(0.0, 1.0)
    }

    /// Point on an edge in cell-local unwrapped coordinates: the column
    /// index `i` is not reduced, so callers can keep `u` continuous.
    fn point(&self, e: Edge, i_unwrapped: usize) -> (f64, f64) {
        let g = self.g;
        match e {
            Edge::H(i, j) => {
                let t = self.frac(g.at(i, j), g.at(i + 1, j));
                ((i_unwrapped as f64 + t) * g.du, g.p_lo + g.dp * j as f64)
            }
            Edge::V(i, j) => {
                let t = self.frac(g.at(i, j), g.at(i, j + 1));
                (i_unwrapped as f64 * g.du, g.p_lo + g.dp * (j as f64 + t))
            }
        }
    }
}

/// Segments of one cell `(i, j)` as pairs of crossed edges.
fn cell_segments(g: &EnergyGrid, level: f64, i: usize, j: usize, out: &mut Vec<(Edge, Edge)>) {
    let n = g.n_u;
    let ip = (i + 1) % n;
    let v = [g.at(i, j), g.at(ip, j), g.at(ip, j + 1), g.at(i, j + 1)];
    if v.iter().any(|x| !x.is_finite()) {
        return;
    }
    let above = |x: f64| x > level;
    let code = v
        .iter()
        .enumerate()
        .fold(0u8, |c, (k, &x)| c | ((above(x) as u8) << k));
    // Edges: bottom, right, top, left.
    let bottom = Edge::H(i, j);
    let right = Edge::V(ip, j);
    let top = Edge::H(i, j + 1);
    let left = Edge::V(i, j);
    let mut seg = |a, b| out.push((a, b));
    match code {
        0 | 15 => {}
        1 | 14 => seg(left, bottom),
        2 | 13 => seg(bottom, right),
        3 | 12 => seg(left, right),
        4 | 11 => seg(right, top),
        6 | 9 => seg(bottom, top),
        7 | 8 => seg(left, top),
        5 | 10 => {
            let center_above = above(0.25 * v.iter().sum::<f64>());
            // Corners 0 and 2 share a side of the level in case 5.
            let diag_02_above = code == 5;
            if center_above == diag_02_above {
                seg(left, top);
                seg(bottom, right);
            } else {
                seg(left, bottom);
                seg(right, top);
            }
        }
        _ => unreachable!(),
    }
}

fn contour_grid(g: &EnergyGrid, level: f64) -> Vec<Polyline> {
    if !level.is_finite() {
        return Vec::new();
    }
    let mut segments = Vec::new();
    for j in 0..g.n_p - 1 {
        for i in 0..g.n_u {
            cell_segments(g, level, i, j, &mut segments);
        }
    }
    let mut adjacency: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        adjacency.entry(a).or_default().push(k);
        adjacency.entry(b).or_default().push(k);
    }
    let cr = Crossings { g, level };
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();

    // Open curves first (start at an edge of degree 1), then closed loops.
    let mut starts: Vec<(Edge, usize)> = Vec::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        for e in [a, b] {
            if adjacency[&e].len() == 1 {
                starts.push((e, k));
            }
        }
    }
    starts.sort();
    let loop_starts: Vec<(Edge, usize)> = segments.iter().enumerate().map(|(k, &(a, _))| (a, k)).collect();

    for (closed, list) in [(false, starts), (true, loop_starts)] {
        for (start_edge, first) in list {
            if used[first] {
                continue;
            }
            lines.push(walk(&cr, &segments, &adjacency, &mut used, start_edge, first, closed));
        }
    }
    lines
}

fn edge_column(e: Edge) -> usize {
    match e {
        Edge::H(i, _) | Edge::V(i, _) => i,
    }
}

/// Follows segments from `start` through `first`, unwrapping the column
/// index as the walk crosses the seam.
fn walk(
    cr: &Crossings<'_>,
    segments: &[(Edge, Edge)],
    adjacency: &HashMap<Edge, Vec<usize>>,
    used: &mut [bool],
    start: Edge,
    first: usize,
    closed: bool,
) -> Polyline {
    let n = cr.g.n_u as i64;
    // Unwrapped column of the current edge.
    let mut col = edge_column(start) as i64;
    let mut points = vec![point_unwrapped(cr, start, col)];
    let mut current = start;
    let mut seg = first;
    loop {
        used[seg] = true;
        let (a, b) = segments[seg];
        let next = if a == current { b } else { a };
        let (c0, c1) = (edge_column(current) as i64, edge_column(next) as i64);
        let mut step = c1 - c0;
        if step > 1 {
            step -= n;
        } else if step < -1 {
            step += n;
        }
        col += step;
        current = next;
        if closed && current == start {
            points.push(point_unwrapped(cr, current, col));
            break;
        }
        points.push(point_unwrapped(cr, current, col));
        match adjacency[&current].iter().find(|&&k| !used[k]) {
            Some(&k) => seg = k,
            None => break,
        }
    }
    Polyline { points, closed }
}

fn point_unwrapped(cr: &Crossings<'_>, e: Edge, col: i64) -> (f64, f64) {
    let (u, p_u) = cr.point(e, 0);
    (u + col as f64 * cr.g.du, p_u)
}

/// Contour polylines of `H(u, p_u) = energy` over the fundamental domain
/// on a `resolution`-cell grid.
pub fn level_set(p: &ModelParams, energy: f64, resolution: usize) -> Vec<Polyline> {
    EnergyGrid::new(p, resolution).contour(energy)
}

/// `count` evenly spaced energies strictly inside the range of `H`.
pub fn level_fan(p: &ModelParams, count: usize, resolution: usize) -> Vec<Polyline> {
    let grid = EnergyGrid::new(p, resolution);
    let (lo, hi) = grid.min_max();
    if count == 0 || !(hi > lo) {
        return Vec::new();
    }
    (1..=count)
        .flat_map(|k| grid.contour(lo + (hi - lo) * k as f64 / (count + 1) as f64))
        .collect()
}
