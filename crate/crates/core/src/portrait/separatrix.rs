use rayon::prelude::*;
use serde::Serialize;

use super::fixed_points::{periodic_distance, FixedPoint, FixedPointKind};
use super::level_set::EnergyGrid;
use crate::dynamics::symplectic::midpoint_triple_jump;
use crate::error::{Error, Result};
use crate::model::{grad_reduced_at, wrap_period, ModelParams};

/// Offset of the branch seeds from the saddle along each eigenvector.
pub const SEED_OFFSET: f64 = 1e-6;
/// A branch ends once it comes this close to a saddle.
pub const MATCH_RADIUS: f64 = 1e-4;
/// Step of the branch integrator.
pub const TRACE_STEP: f64 = 2e-3;
/// Resolution of the level set used to cross-check branches.
pub const CROSS_CHECK_RESOLUTION: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Both ends at the same saddle.
    SaddleLoop,
    /// Ends at two distinct saddles.
    SaddleConnection,
    /// At least one branch left the chart or ran out of arc length before
    /// reaching a saddle.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchEnd {
    /// Reached the matching radius of the saddle with this index.
    Saddle(usize),
    /// Reached the edge of the admissible momentum interval.
    Boundary,
    /// Arc-length budget exhausted.
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Manifold {
    /// Traced forward in time.
    Unstable,
    /// Traced backward in time.
    Stable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    /// Index into the saddle list passed to [`trace_separatrices`].
    pub from: usize,
    pub manifold: Manifold,
    /// `+1` or `−1` along the eigenvector.
    pub sign: i8,
    pub end: BranchEnd,
    /// Vertices with `u` unwrapped along the branch.
    pub points: Vec<(f64, f64)>,
    pub max_energy_error: f64,
    /// Largest distance from a branch vertex to the level set of the
    /// saddle energy (computed on a coarse grid).
    pub level_set_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separatrix {
    pub energy: f64,
    /// One or two indices into the saddle list.
    pub saddle_refs: Vec<usize>,
    pub branches: Vec<Branch>,
    pub topology: Topology,
}

/// Eigenvectors `(unstable, stable)` of the linearized field at a saddle.
/// The field is `(H_p, −H_u)`, so its Jacobian is
/// `[[H_up, H_pp], [−H_uu, −H_up]]` with eigenvalues `±√(−det Hess)`.
pub fn saddle_directions(hessian: &[[f64; 2]; 2]) -> Option<((f64, f64), (f64, f64))> {
    let (huu, hup, hpp) = (hessian[0][0], hessian[0][1], hessian[1][1]);
    let disc = hup * hup - huu * hpp;
    if disc <= 0.0 {
        return None;
    }
    let lambda = disc.sqrt();
    // (J − μ) v = 0 with J = [[hup, hpp], [−huu, −hup]].
    let eigvec = |mu: f64| {
        let (a, b) = (hup - mu, hpp);
        let v = if a.abs() + b.abs() > 0.0 { (-b, a) } else { (-huu, -hup - mu) };
        let n = v.0.hypot(v.1);
        (v.0 / n, v.1 / n)
    };
    Some((eigvec(lambda), eigvec(-lambda)))
}

fn reduced_rhs(p: &ModelParams) -> impl FnMut(&[f64], &mut [f64]) -> Result<()> + '_ {
    move |x, dx| {
        let g = grad_reduced_at(p, x[0], x[1])?;
        dx[0] = g.dp_u;
        dx[1] = -g.du;
        Ok(())
    }
}

/// Arc-length budget per branch: several circuits of the domain.
fn arc_budget(p: &ModelParams) -> f64 {
    20.0 * (ModelParams::u_period() + p.admissible_momentum_range().width())
}

fn trace_branch(
    p: &ModelParams,
    saddles: &[FixedPoint],
    from: usize,
    manifold: Manifold,
    sign: i8,
    direction: (f64, f64),
) -> Branch {
    let s = &saddles[from];
    let h = match manifold {
        Manifold::Unstable => TRACE_STEP,
        Manifold::Stable => -TRACE_STEP,
    };
    let sg = sign as f64;
    let mut x = vec![s.u + sg * SEED_OFFSET * direction.0, s.p_u + sg * SEED_OFFSET * direction.1];
    let mut points = vec![(s.u, s.p_u), (x[0], x[1])];
    let mut rhs = reduced_rhs(p);
    let mut arc = 0.0;
    let budget = arc_budget(p);
    let mut left_home = false;
    let mut t = 0.0;
    let end = loop {
        let y = match midpoint_triple_jump(&mut rhs, &x, h, t) {
            Ok(y) => y,
            Err(Error::Boundary { .. } | Error::Domain { .. }) => break BranchEnd::Boundary,
            Err(_) => break BranchEnd::Incomplete,
        };
        t += h;
        arc += (y[0] - x[0]).hypot(y[1] - x[1]);
        x = y;
        points.push((x[0], x[1]));
        let here = (x[0], x[1]);
        if !left_home && periodic_distance(here, (s.u, s.p_u)) > 2.0 * MATCH_RADIUS {
            left_home = true;
        }
        if left_home {
            let hit = saddles
                .iter()
                .position(|q| {
                    q.kind == FixedPointKind::Saddle
                        && periodic_distance(here, (q.u, q.p_u)) < MATCH_RADIUS
                });
            if let Some(k) = hit {
                // Close the polyline on the saddle, unwrapped like the branch.
                let period = ModelParams::u_period();
                let shift = ((x[0] - saddles[k].u) / period).round() * period;
                points.push((saddles[k].u + shift, saddles[k].p_u));
                break BranchEnd::Saddle(k);
            }
        }
        if arc > budget {
            break BranchEnd::Incomplete;
        }
    };
    let max_energy_error = points
        .iter()
        .filter_map(|&(u, q)| crate::model::energy_reduced_at(p, u, q).ok())
        .fold(0.0_f64, |m, e| m.max((e - s.energy).abs()));
    Branch {
        from,
        manifold,
        sign,
        end,
        points,
        max_energy_error,
        level_set_distance: f64::NAN,
    }
}

fn level_set_distance(branch: &Branch, level: &[(f64, f64)]) -> f64 {
    if level.is_empty() {
        return f64::INFINITY;
    }
    let period = ModelParams::u_period();
    let stride = (branch.points.len() / 200).max(1);
    branch
        .points
        .iter()
        .step_by(stride)
        .map(|&(u, q)| {
            let pt = (wrap_period(u, period), q);
            level
                .iter()
                .map(|&v| periodic_distance(pt, v))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Traces the four branches leaving each saddle (two along the unstable
/// direction forward in time, two along the stable direction backward),
/// each until it reaches a saddle, the chart boundary, or its arc-length
/// budget. Branches are grouped by the unordered pair of saddles they join.
pub fn trace_separatrices(p: &ModelParams, saddles: &[FixedPoint]) -> Vec<Separatrix> {
    let jobs: Vec<(usize, Manifold, i8, (f64, f64))> = saddles
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind == FixedPointKind::Saddle)
        .filter_map(|(k, s)| saddle_directions(&s.hessian).map(|d| (k, d)))
        .flat_map(|(k, (unstable, stable))| {
            [
                (k, Manifold::Unstable, 1, unstable),
                (k, Manifold::Unstable, -1, unstable),
                (k, Manifold::Stable, 1, stable),
                (k, Manifold::Stable, -1, stable),
            ]
        })
        .collect();
    let mut branches: Vec<Branch> = jobs
        .par_iter()
        .map(|&(k, m, sign, d)| trace_branch(p, saddles, k, m, sign, d))
        .collect();

    let grid = EnergyGrid::new(p, CROSS_CHECK_RESOLUTION);
    let period = ModelParams::u_period();
    for b in &mut branches {
        let level: Vec<(f64, f64)> = grid
            .contour(saddles[b.from].energy)
            .into_iter()
            .flat_map(|l| l.points)
            .map(|(u, q)| (wrap_period(u, period), q))
            .collect();
        b.level_set_distance = level_set_distance(b, &level);
    }

    let mut groups: Vec<((usize, Option<usize>), Vec<Branch>)> = Vec::new();
    for b in branches {
        let key = match b.end {
            BranchEnd::Saddle(k) => (b.from.min(k), Some(b.from.max(k))),
            _ => (b.from, None),
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, list)) => list.push(b),
            None => groups.push((key, vec![b])),
        }
    }
    groups.sort_by_key(|(k, _)| *k);
    groups
        .into_iter()
        .map(|((a, other), branches)| {
            let (saddle_refs, topology) = match other {
                Some(b) if b == a => (vec![a], Topology::SaddleLoop),
                Some(b) => (vec![a, b], Topology::SaddleConnection),
                None => (vec![a], Topology::Open),
            };
            Separatrix {
                energy: saddles[a].energy,
                saddle_refs,
                branches,
                topology,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_of_a_pure_saddle() {
        // H = (p² − u²)/2: unstable along (1, 1), stable along (1, −1).
        let (un, st) = saddle_directions(&[[-1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((un.0.abs() - un.1.abs()).abs() < 1e-12 && un.0 * un.1 > 0.0);
        assert!((st.0.abs() - st.1.abs()).abs() < 1e-12 && st.0 * st.1 < 0.0);
    }

    #[test]
    fn center_has_no_directions() {
        assert!(saddle_directions(&[[1.0, 0.0], [0.0, 1.0]]).is_none());
    }
}
