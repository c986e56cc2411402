use rayon::prelude::*;
use serde::Serialize;

use crate::model::{energy_reduced_at, grad_reduced_at, hessian_reduced, wrap_period, ModelParams};

/// Finite-difference step for Hessians of the analytic gradient.
pub const HESSIAN_STEP: f64 = 1e-6;
/// Newton stops once the gradient norm is below this.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 60;
/// Converged points closer than this (with `u` compared modulo its period)
/// are the same fixed point.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Seeds keep this fraction of the interval width away from its ends.
pub const SEED_MARGIN: f64 = 1e-6;
/// Reported residuals must be below this.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointKind {
    Center,
    Saddle,
    Degenerate,
}

impl FixedPointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Center => "center",
            Self::Saddle => "saddle",
            Self::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    /// In `[0, √2π)`.
    pub u: f64,
    pub p_u: f64,
    pub kind: FixedPointKind,
    pub energy: f64,
    /// `[[H_uu, H_up], [H_up, H_pp]]`.
    pub hessian: [[f64; 2]; 2],
    /// Gradient norm at the point.
    pub residual: f64,
}

/// Classification by the sign of `det Hess`, with a dead band
/// `δ = 1e-8 · max |H_ij|` reported as degenerate.
pub fn classify(hessian: &[[f64; 2]; 2]) -> FixedPointKind {
    let det = hessian[0][0] * hessian[1][1] - hessian[0][1] * hessian[1][0];
    let scale = hessian
        .iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let delta = 1e-8 * scale;
    if det > delta {
        FixedPointKind::Center
    } else if det < -delta {
        FixedPointKind::Saddle
    } else {
        FixedPointKind::Degenerate
    }
}

/// Distance in `(u, p_u)` with `u` taken modulo `√2π`.
pub fn periodic_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let period = ModelParams::u_period();
    let du = wrap_period(a.0 - b.0, period);
    let du = du.min(period - du);
    du.hypot(a.1 - b.1)
}

fn gradient_norm(p: &ModelParams, u: f64, p_u: f64) -> Option<f64> {
    let g = grad_reduced_at(p, u, p_u).ok()?;
    Some(g.du.hypot(g.dp_u))
}

/// Newton on `∇H = 0` from `(u, p_u)`. `None` if the iteration leaves the
/// chart, stalls on a singular Hessian or fails to converge.
pub fn newton(p: &ModelParams, mut u: f64, mut p_u: f64) -> Option<(f64, f64)> {
    for _ in 0..NEWTON_MAX_ITER {
        let g = grad_reduced_at(p, u, p_u).ok()?;
        if g.du.hypot(g.dp_u) < NEWTON_TOL {
            return Some((u, p_u));
        }
        let h = hessian_reduced(p, u, p_u, HESSIAN_STEP).ok()?;
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let du = (h[1][1] * g.du - h[0][1] * g.dp_u) / det;
        let dp = (h[0][0] * g.dp_u - h[1][0] * g.du) / det;
        u -= du;
        p_u -= dp;
        if !(u.is_finite() && p_u.is_finite()) {
            return None;
        }
    }
    let r = gradient_norm(p, u, p_u)?;
    (r < RESIDUAL_TOL).then_some((u, p_u))
}

/// True when `∇H` vanishes identically on a coarse probe grid, e.g. when
/// every coefficient is zero.
pub fn is_degenerate_hamiltonian(p: &ModelParams) -> bool {
    let range = p.admissible_momentum_range();
    let period = ModelParams::u_period();
    let n = 17;
    (0..n).all(|i| {
        (1..n).all(|j| {
            let u = period * i as f64 / n as f64;
            let p_u = range.lo + range.width() * j as f64 / n as f64;
            gradient_norm(p, u, p_u).is_some_and(|r| r < NEWTON_TOL)
        })
    })
}

fn finish(p: &ModelParams, u: f64, p_u: f64) -> Option<FixedPoint> {
    let u = wrap_period(u, ModelParams::u_period());
    let residual = gradient_norm(p, u, p_u)?;
    if residual >= RESIDUAL_TOL {
        return None;
    }
    let hessian = hessian_reduced(p, u, p_u, HESSIAN_STEP).ok()?;
    Some(FixedPoint {
        u,
        p_u,
        kind: classify(&hessian),
        energy: energy_reduced_at(p, u, p_u).ok()?,
        hessian,
        residual,
    })
}

/// Re-seed from a coarsely rounded copy so that points reached from
/// different seed grids polish to bit-identical values.
fn polish(p: &ModelParams, u: f64, p_u: f64) -> (f64, f64) {
    let round = |x: f64| (x * 1e8).round() / 1e8;
    let (u, p_u) = newton(p, round(u), round(p_u)).unwrap_or((u, p_u));
    // Adding +0 turns a negative zero positive.
    (u + 0.0, p_u + 0.0)
}

/// Critical points of the reduced Hamiltonian in the fundamental domain,
/// from Newton iterations seeded on a `grid_n × grid_n` grid, deduplicated
/// and sorted by `(u, p_u)`. A Hamiltonian with identically vanishing
/// gradient yields an empty list.
pub fn find_fixed_points(p: &ModelParams, grid_n: usize) -> Vec<FixedPoint> {
    let range = p.admissible_momentum_range();
    if grid_n == 0 || range.is_degenerate() || is_degenerate_hamiltonian(p) {
        return Vec::new();
    }
    let period = ModelParams::u_period();
    let margin = SEED_MARGIN * range.width();
    let (lo, hi) = (range.lo + margin, range.hi - margin);
    let seeds: Vec<(f64, f64)> = (0..grid_n)
        .flat_map(|i| {
            (0..grid_n).map(move |j| {
                let u = period * i as f64 / grid_n as f64;
                let p_u = if grid_n == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * j as f64 / (grid_n - 1) as f64
                };
                (u, p_u)
            })
        })
        .collect();
    let converged: Vec<Option<(f64, f64)>> = seeds
        .par_iter()
        .map(|&(u, p_u)| newton(p, u, p_u).map(|(u, q)| (wrap_period(u, period), q)))
        .collect();

    let mut unique: Vec<(f64, f64)> = Vec::new();
    for pt in converged.into_iter().flatten() {
        if !unique.iter().any(|&q| periodic_distance(q, pt) < DEDUP_RADIUS) {
            unique.push(pt);
        }
    }
    let mut points: Vec<FixedPoint> = unique
        .into_par_iter()
        .filter_map(|(u, q)| {
            let (u, q) = polish(p, u, q);
            finish(p, u, q)
        })
        .collect();
    points.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.p_u.total_cmp(&b.p_u)));
    points.dedup_by(|a, b| periodic_distance((a.u, a.p_u), (b.u, b.p_u)) < DEDUP_RADIUS);
    points
}
