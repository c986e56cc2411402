//! Brute-force fixed-point oracle: the winding number of ∇H around every
//! cell of a dense grid. A cell with index +1 holds an extremum (center),
//! one with index −1 holds a saddle. Independent of Newton and of any
//! Hessian.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use spinreduce::model::{grad_reduced_at, ModelParams};

#[derive(Debug, Clone, Copy)]
pub struct IndexedCell {
    /// Cell center.
    pub u: f64,
    pub p_u: f64,
    /// `+1` extremum, `−1` saddle.
    pub index: i32,
    /// Half-diagonal of the cell.
    pub radius: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Scans an `n × n` node grid over one period in `u` (periodic) and the
/// interior of the admissible `p_u` interval. Nodes are offset from the
/// symmetric positions so that fixed points do not sit on grid lines.
pub fn index_scan(p: &ModelParams, n: usize) -> Vec<IndexedCell> {
    let range = p.admissible_momentum_range();
    let period = ModelParams::u_period();
    let du = period / n as f64;
    let dp = range.width() / n as f64;
    let u_at = |i: usize| (i as f64 + 0.37) * du;
    let p_at = |j: usize| range.lo + (j as f64 + 0.5) * dp;
    let angle: Vec<f64> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| {
            let g = grad_reduced_at(p, u_at(i), p_at(j)).unwrap();
            g.dp_u.atan2(g.du)
        })
        .collect();
    let at = |i: usize, j: usize| angle[j * n + i % n];
    let mut cells = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n {
            let ring = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let turn: f64 = (0..4).map(|k| wrap_angle(ring[(k + 1) % 4] - ring[k])).sum();
            let index = (turn / TAU).round() as i32;
            if index != 0 {
                cells.push(IndexedCell {
                    u: (u_at(i) + 0.5 * du).rem_euclid(period),
                    p_u: p_at(j) + 0.5 * dp,
                    index,
                    radius: 0.5 * du.hypot(dp),
                });
            }
        }
    }
    cells
}
