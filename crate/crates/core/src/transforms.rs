//! Coordinate chain `(m, l) ↔ (g, h) ↔ cylindrical ↔ canonical (u, p_u, v, p_v)`
//! and the lift of reduced states back to `(m, l)`.
//!
//! `g = (m + l)/2` and `h = (m − l)/2` are independent angular momenta. In
//! cylindrical form each is described by its modulus, its z-component and
//! its longitude; the canonical variables are
//!
//! ```text
//! u = (φ_g − φ_h)/√2,  p_u = (g_z − h_z)/√2,
//! v = (φ_g + φ_h)/√2,  p_v = (g_z + h_z)/√2.
//! ```
//!
//! `u` and `v` are not independently periodic: `(u, v) → (u + √2π, v + √2π)`
//! is the identity on `(φ_g, φ_h)`, while shifting `u` alone rotates both
//! vectors by π about z. [`ml_to_reduced`] therefore leaves `u` in
//! `(−√2π, √2π)` so that [`lift_point`] is an exact inverse.

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::{wrap_period, MLState, ModelParams, ReducedState, Vec3, RADICAND_TOL};

/// Transverse norms below this are treated as a chart singularity.
pub const SINGULAR_TRANSVERSE: f64 = 1e-12;

/// Cylindrical description of `(g, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylState {
    pub g_norm: f64,
    pub h_norm: f64,
    pub g_z: f64,
    pub h_z: f64,
    /// Longitude of `g` in `[0, 2π)`.
    pub phi_g: f64,
    /// Longitude of `h` in `[0, 2π)`.
    pub phi_h: f64,
}

/// Canonical image of a full state: the reduced state (with `v`) plus the
/// values of the integrals it was reduced at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub state: ReducedState,
    pub g_norm: f64,
    pub h_norm: f64,
    pub p_v: f64,
}

pub fn ml_to_gh(st: &MLState) -> (Vec3, Vec3) {
    ((st.m + st.l) * 0.5, (st.m - st.l) * 0.5)
}

pub fn gh_to_ml(g: &Vec3, h: &Vec3) -> MLState {
    MLState::new(g + h, g - h)
}

fn longitude(v: &Vec3, which: &'static str) -> Result<f64> {
    let rho = v.x.hypot(v.y);
    if rho < SINGULAR_TRANSVERSE {
        return Err(Error::SingularConfiguration { which, norm: rho });
    }
    Ok(wrap_period(v.y.atan2(v.x), TAU))
}

pub fn gh_to_cyl(g: &Vec3, h: &Vec3) -> Result<CylState> {
    Ok(CylState {
        g_norm: g.norm(),
        h_norm: h.norm(),
        g_z: g.z,
        h_z: h.z,
        phi_g: longitude(g, "g")?,
        phi_h: longitude(h, "h")?,
    })
}

fn transverse_radius(norm: f64, z: f64) -> Result<f64> {
    let r2 = norm * norm - z * z;
    if r2 < -RADICAND_TOL * norm.max(1.0).powi(2) {
        return Err(Error::Domain {
            p_u: f64::NAN,
            lo: -norm,
            hi: norm,
        });
    }
    Ok(r2.max(0.0).sqrt())
}

pub fn cyl_to_gh(cs: &CylState) -> Result<(Vec3, Vec3)> {
    let rg = transverse_radius(cs.g_norm, cs.g_z)?;
    let rh = transverse_radius(cs.h_norm, cs.h_z)?;
    Ok((
        Vec3::new(rg * cs.phi_g.cos(), rg * cs.phi_g.sin(), cs.g_z),
        Vec3::new(rh * cs.phi_h.cos(), rh * cs.phi_h.sin(), cs.h_z),
    ))
}

pub fn cyl_to_canonical(cs: &CylState) -> Reduction {
    Reduction {
        state: ReducedState::with_v(
            (cs.phi_g - cs.phi_h) / SQRT_2,
            (cs.g_z - cs.h_z) / SQRT_2,
            (cs.phi_g + cs.phi_h) / SQRT_2,
        ),
        g_norm: cs.g_norm,
        h_norm: cs.h_norm,
        p_v: (cs.g_z + cs.h_z) / SQRT_2,
    }
}

/// Inverse of [`cyl_to_canonical`]; angles come back in `[0, 2π)`.
pub fn canonical_to_cyl(r: &Reduction) -> Result<CylState> {
    let v = r.state.v.ok_or(Error::MissingCyclicAngle)?;
    let (u, p_u) = (r.state.u, r.state.p_u);
    Ok(CylState {
        g_norm: r.g_norm,
        h_norm: r.h_norm,
        g_z: (p_u + r.p_v) / SQRT_2,
        h_z: (r.p_v - p_u) / SQRT_2,
        phi_g: wrap_period((v + u) / SQRT_2, TAU),
        phi_h: wrap_period((v - u) / SQRT_2, TAU),
    })
}

/// Full chain `(m, l) → (u, p_u, v)` plus the integrals `|g|`, `|h|`, `p_v`.
/// Along the chain `p_u = l_z/√2` and `p_v = m_z/√2`.
pub fn ml_to_reduced(st: &MLState) -> Result<Reduction> {
    let (g, h) = ml_to_gh(st);
    Ok(cyl_to_canonical(&gh_to_cyl(&g, &h)?))
}

/// Reconstruct `(m, l)` from a reduced state carrying `v` and the integrals in `p`.
pub fn lift_point(rs: &ReducedState, p: &ModelParams) -> Result<MLState> {
    let range = p.admissible_momentum_range();
    let tol = RADICAND_TOL;
    if rs.p_u < range.lo - tol || rs.p_u > range.hi + tol {
        return Err(Error::Domain {
            p_u: rs.p_u,
            lo: range.lo,
            hi: range.hi,
        });
    }
    let v = rs.v.ok_or(Error::MissingCyclicAngle)?;
    let g_z = (rs.p_u + p.p_v()) / SQRT_2;
    let h_z = (p.p_v() - rs.p_u) / SQRT_2;
    let phi_g = (v + rs.u) / SQRT_2;
    let phi_h = (v - rs.u) / SQRT_2;
    let rg = transverse_radius(p.g_norm(), g_z)?;
    let rh = transverse_radius(p.h_norm(), h_z)?;
    let g = Vec3::new(rg * phi_g.cos(), rg * phi_g.sin(), g_z);
    let h = Vec3::new(rh * phi_h.cos(), rh * phi_h.sin(), h_z);
    Ok(gh_to_ml(&g, &h))
}

/// Pointwise lift of a reduced trajectory. The output carries the invariant
/// log `m_z`, `(m+l)²`, `(m−l)²` of the lifted states.
pub fn lift_trajectory(
    traj: &Trajectory<ReducedState>,
    p: &ModelParams,
) -> Result<Trajectory<MLState>> {
    let states = traj
        .states
        .iter()
        .map(|rs| lift_point(rs, p))
        .collect::<Result<Vec<_>>>()?;
    let invariants = states
        .iter()
        .map(|st| {
            let (cp, cm) = st.casimirs();
            vec![st.m.z, cp, cm]
        })
        .collect();
    Ok(Trajectory {
        times: traj.times.clone(),
        states,
        invariant_names: vec!["m_z", "casimir_plus", "casimir_minus"],
        invariants,
        status: traj.status,
    })
}

/// Remove jumps larger than half a period from a sampled angle.
pub fn unwrap_angles(values: &[f64], period: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut offset = 0.0;
    for (k, &x) in values.iter().enumerate() {
        if k > 0 {
            let prev = values[k - 1];
            let jump = x - prev;
            offset -= period * (jump / period).round();
        }
        out.push(x + offset);
    }
    out
}

/// Wrapped difference `a − b` in `(−period/2, period/2]`.
pub fn periodic_difference(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    if d > 0.5 * period {
        d - period
    } else {
        d
    }
}

/// Project a full trajectory onto `(u, p_u, v)` with `u` and `v` unwrapped
/// in time.
pub fn project_trajectory(traj: &Trajectory<MLState>) -> Result<Vec<ReducedState>> {
    let red = traj
        .states
        .iter()
        .map(ml_to_reduced)
        .collect::<Result<Vec<_>>>()?;
    // φ_g, φ_h are each 2π-periodic; unwrap them, then recombine.
    let phis: (Vec<f64>, Vec<f64>) = red
        .iter()
        .map(|r| {
            let v = r.state.v.unwrap_or(0.0);
            ((v + r.state.u) / SQRT_2, (v - r.state.u) / SQRT_2)
        })
        .unzip();
    let pg = unwrap_angles(&phis.0, TAU);
    let ph = unwrap_angles(&phis.1, TAU);
    Ok(red
        .iter()
        .zip(pg.iter().zip(&ph))
        .map(|(r, (&a, &b))| ReducedState::with_v((a - b) / SQRT_2, r.state.p_u, (a + b) / SQRT_2))
        .collect())
}
