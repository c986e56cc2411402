//! Physical parameters and energy functions.
//!
//! Three energies live here:
//!
//! * the second-order four-sublattice energy ([`energy_sublattice`]),
//! * the two-vector Hamiltonian in `(m, l)` ([`energy_ml`]),
//! * the reduced one-degree-of-freedom Hamiltonian in `(u, p_u)` at fixed
//!   Casimirs `|g|`, `|h|` and fixed cyclic momentum `p_v` ([`energy_reduced`]).
//!
//! The two-vector Hamiltonian is
//!
//! ```text
//! H = A/2 l² + B/2 m² + α/2 l_z² + b/2 m_z² + β (l_x m_y − l_y m_x) + C/4 l⁴
//! ```
//!
//! with `A = exchange_l`, `B = exchange_m`, `α = anisotropy_l`,
//! `b = anisotropy_m`, `β = dzyaloshinsky`, `C = quartic`.

use std::f64::consts::SQRT_2;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::algebra::{ml_bracket_table, BracketTable};
use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Radicands in `[-RADICAND_TOL, 0]` are clamped to zero.
pub const RADICAND_TOL: f64 = 1e-12;

/// Energy coefficients of the two-vector Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    /// `A`, exchange stiffness of `l²`.
    pub exchange_l: f64,
    /// `B`, exchange stiffness of `m²`.
    pub exchange_m: f64,
    /// `α`, uniaxial anisotropy on `l_z²`.
    pub anisotropy_l: f64,
    /// `b`, uniaxial anisotropy on `m_z²`.
    pub anisotropy_m: f64,
    /// `β`, Dzyaloshinsky–Moriya coupling `(l × m)_z`.
    pub dzyaloshinsky: f64,
    /// `C`, quartic term `l⁴`.
    pub quartic: f64,
}

impl Coefficients {
    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }

    fn as_array(&self) -> [(&'static str, f64); 6] {
        [
            ("exchange_l", self.exchange_l),
            ("exchange_m", self.exchange_m),
            ("anisotropy_l", self.anisotropy_l),
            ("anisotropy_m", self.anisotropy_m),
            ("dzyaloshinsky", self.dzyaloshinsky),
            ("quartic", self.quartic),
        ]
    }
}

/// Closed interval of admissible `p_u` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumInterval {
    pub lo: f64,
    pub hi: f64,
}

impl MomentumInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo - RADICAND_TOL
    }

    /// Zero-width interval: the reduced phase space collapses to a circle.
    pub fn is_degenerate(&self) -> bool {
        !self.is_empty() && self.width() <= RADICAND_TOL
    }

    pub fn contains(&self, p_u: f64) -> bool {
        p_u >= self.lo && p_u <= self.hi
    }
}

/// Coefficients plus the values of the Casimirs `|g|`, `|h|` and of `p_v`.
///
/// Construction guarantees a non-empty admissible `p_u` interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    coeffs: Coefficients,
    g_norm: f64,
    h_norm: f64,
    p_v: f64,
}

impl ModelParams {
    pub fn new(coeffs: Coefficients, g_norm: f64, h_norm: f64, p_v: f64) -> Result<Self> {
        for (name, v) in coeffs.as_array() {
            if !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        for (name, v) in [("g_norm", g_norm), ("h_norm", h_norm)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be a finite non-negative number, got {v}"),
                });
            }
        }
        if !p_v.is_finite() {
            return Err(Error::InvalidParam {
                name: "p_v",
                reason: format!("must be finite, got {p_v}"),
            });
        }
        let p = Self {
            coeffs,
            g_norm,
            h_norm,
            p_v,
        };
        let range = p.admissible_momentum_range();
        if range.is_empty() {
            return Err(Error::InadmissibleParams {
                lo: range.lo,
                hi: range.hi,
            });
        }
        Ok(p)
    }

    pub fn coeffs(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn g_norm(&self) -> f64 {
        self.g_norm
    }

    pub fn h_norm(&self) -> f64 {
        self.h_norm
    }

    pub fn p_v(&self) -> f64 {
        self.p_v
    }

    /// Same Casimirs and `p_v`, different coefficients.
    pub fn with_coeffs(&self, coeffs: Coefficients) -> Self {
        Self { coeffs, ..*self }
    }

    /// `[max(−√2g − p_v, −√2h + p_v), min(√2g − p_v, √2h + p_v)]`.
    pub fn admissible_momentum_range(&self) -> MomentumInterval {
        let (sg, sh) = (SQRT_2 * self.g_norm, SQRT_2 * self.h_norm);
        MomentumInterval {
            lo: (-sg - self.p_v).max(-sh + self.p_v),
            hi: (sg - self.p_v).min(sh + self.p_v),
        }
    }

    /// Period of the reduced Hamiltonian in `u`.
    pub fn u_period() -> f64 {
        SQRT_2 * std::f64::consts::PI
    }
}

/// Free function form of [`ModelParams::admissible_momentum_range`].
pub fn admissible_momentum_range(p: &ModelParams) -> MomentumInterval {
    p.admissible_momentum_range()
}

/// Coefficients of the second-order energy of four sublattices.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SublatticeParams {
    /// Exchange on `l_1², l_2², l_3²`.
    pub exchange_l: [f64; 3],
    pub exchange_m: f64,
    /// Anisotropy on `l_1z², l_2z², l_3z²`.
    pub anisotropy_l: [f64; 3],
    pub anisotropy_m: f64,
    /// Coupling of `(l_1 × m)_z`.
    pub dzyaloshinsky_lm: f64,
    /// Coupling of `(l_2 × l_3)_z`.
    pub dzyaloshinsky_ll: f64,
}

/// Ferromagnetic vector `m` and antiferromagnetic vector `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLState {
    pub m: Vec3,
    pub l: Vec3,
}

impl MLState {
    pub fn new(m: Vec3, l: Vec3) -> Self {
        Self { m, l }
    }

    /// `(m_x, m_y, m_z, l_x, l_y, l_z)`, the ordering used by the bracket table.
    pub fn to_array(&self) -> [f64; 6] {
        [self.m.x, self.m.y, self.m.z, self.l.x, self.l.y, self.l.z]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            m: Vec3::new(x[0], x[1], x[2]),
            l: Vec3::new(x[3], x[4], x[5]),
        }
    }

    /// Casimirs `((m+l)², (m−l)²)`.
    pub fn casimirs(&self) -> (f64, f64) {
        ((self.m + self.l).norm_squared(), (self.m - self.l).norm_squared())
    }
}

/// Canonical pair `(u, p_u)` with the cyclic angle `v` carried for lifting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub u: f64,
    pub p_u: f64,
    pub v: Option<f64>,
}

impl ReducedState {
    pub fn new(u: f64, p_u: f64) -> Self {
        Self { u, p_u, v: None }
    }

    pub fn with_v(u: f64, p_u: f64, v: f64) -> Self {
        Self { u, p_u, v: Some(v) }
    }

    /// `u` reduced to `[0, √2π)`.
    pub fn canonical_u(&self) -> f64 {
        wrap_period(self.u, ModelParams::u_period())
    }
}

pub(crate) fn wrap_period(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Second-order energy of four sublattice spins.
pub fn energy_sublattice(p: &SublatticeParams, s: &[Vec3; 4]) -> f64 {
    let m = s[0] + s[1] + s[2] + s[3];
    let l1 = s[0] - s[1] - s[2] + s[3];
    let l2 = s[0] - s[1] + s[2] - s[3];
    let l3 = s[0] + s[1] - s[2] - s[3];
    let ls = [l1, l2, l3];
    let mut e = p.exchange_m * m.norm_squared() + p.anisotropy_m * m.z * m.z;
    for k in 0..3 {
        e += p.exchange_l[k] * ls[k].norm_squared() + p.anisotropy_l[k] * ls[k].z * ls[k].z;
    }
    e + p.dzyaloshinsky_lm * (l1.x * m.y - l1.y * m.x) + p.dzyaloshinsky_ll * (l2.x * l3.y - l2.y * l3.x)
}

pub fn energy_ml(p: &ModelParams, st: &MLState) -> f64 {
    let c = &p.coeffs;
    let (m, l) = (&st.m, &st.l);
    let l2 = l.norm_squared();
    0.5 * c.exchange_l * l2
        + 0.5 * c.exchange_m * m.norm_squared()
        + 0.5 * c.anisotropy_l * l.z * l.z
        + 0.5 * c.anisotropy_m * m.z * m.z
        + c.dzyaloshinsky * (l.x * m.y - l.y * m.x)
        + 0.25 * c.quartic * l2 * l2
}

/// `(∂H/∂m, ∂H/∂l)`.
pub fn grad_ml(p: &ModelParams, st: &MLState) -> (Vec3, Vec3) {
    let c = &p.coeffs;
    let (m, l) = (&st.m, &st.l);
    let z = Vec3::z();
    let dm = c.exchange_m * m + c.anisotropy_m * m.z * z + c.dzyaloshinsky * z.cross(l);
    let dl = c.exchange_l * l
        + c.anisotropy_l * l.z * z
        + c.dzyaloshinsky * m.cross(&z)
        + c.quartic * l.norm_squared() * l;
    (dm, dl)
}

/// Right-hand side of the two-vector dynamics in closed form:
/// `ṁ = H_m × m + H_l × l`, `l̇ = H_m × l + H_l × m`.
pub fn vector_field_full(p: &ModelParams, st: &MLState) -> (Vec3, Vec3) {
    let (dm, dl) = grad_ml(p, st);
    (
        dm.cross(&st.m) + dl.cross(&st.l),
        dm.cross(&st.l) + dl.cross(&st.m),
    )
}

/// Same field computed by contracting the `(m, l)` bracket table with `∇H`.
pub fn vector_field_full_bracket(p: &ModelParams, st: &MLState, table: &BracketTable) -> (Vec3, Vec3) {
    let (dm, dl) = grad_ml(p, st);
    let grad = [dm.x, dm.y, dm.z, dl.x, dl.y, dl.z];
    let x = table
        .contract(&st.to_array(), &grad)
        .expect("ml table is six-dimensional");
    let out = MLState::from_slice(&x);
    (out.m, out.l)
}

/// Convenience wrapper building the table on each call.
pub fn vector_field_full_via_algebra(p: &ModelParams, st: &MLState) -> (Vec3, Vec3) {
    vector_field_full_bracket(p, st, &ml_bracket_table())
}

/// Square-root factors `R_g = √(2g² − (p_u+p_v)²)`, `R_h = √(2h² − (p_u−p_v)²)`.
#[derive(Debug, Clone, Copy)]
struct Radicals {
    rg: f64,
    rh: f64,
}

fn clamp_radicand(r: f64) -> Option<f64> {
    if r >= 0.0 {
        Some(r)
    } else if r >= -RADICAND_TOL {
        Some(0.0)
    } else {
        None
    }
}

fn radicals(p: &ModelParams, p_u: f64) -> Result<Radicals> {
    let rg2 = 2.0 * p.g_norm * p.g_norm - (p_u + p.p_v).powi(2);
    let rh2 = 2.0 * p.h_norm * p.h_norm - (p_u - p.p_v).powi(2);
    match (clamp_radicand(rg2), clamp_radicand(rh2)) {
        (Some(a), Some(b)) => Ok(Radicals {
            rg: a.sqrt(),
            rh: b.sqrt(),
        }),
        _ => {
            let r = p.admissible_momentum_range();
            Err(Error::Domain {
                p_u,
                lo: r.lo,
                hi: r.hi,
            })
        }
    }
}

/// Reduced Hamiltonian in `(u, p_u)` at the Casimirs and `p_v` held by `p`.
pub fn energy_reduced(p: &ModelParams, st: &ReducedState) -> Result<f64> {
    energy_reduced_at(p, st.u, st.p_u)
}

pub fn energy_reduced_at(p: &ModelParams, u: f64, p_u: f64) -> Result<f64> {
    let Radicals { rg, rh } = radicals(p, p_u)?;
    let c = &p.coeffs;
    let (g, h, pv) = (p.g_norm, p.h_norm, p.p_v);
    let r = rg * rh;
    let (s, co) = (SQRT_2 * u).sin_cos();
    let k = g * g + h * h;
    let x = -co * r + k + p_u * p_u - pv * pv;
    let y = co * r + k - p_u * p_u + pv * pv;
    Ok(0.5 * c.exchange_l * x
        + 0.5 * c.exchange_m * y
        + c.anisotropy_l * p_u * p_u
        + c.anisotropy_m * pv * pv
        - c.dzyaloshinsky * s * r
        + 0.25 * c.quartic * x * x)
}

/// Partial derivatives of the reduced Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedGradient {
    pub du: f64,
    pub dp_u: f64,
    /// `∂H/∂p_v`, the angular velocity of the cyclic angle `v`.
    pub dp_v: f64,
}

/// Closed-form gradient of the reduced Hamiltonian. Undefined on the
/// boundary of the admissible interval, where one of the transverse radii
/// vanishes.
pub fn grad_reduced(p: &ModelParams, st: &ReducedState) -> Result<ReducedGradient> {
    grad_reduced_at(p, st.u, st.p_u)
}

/// Ok when `p_u` lies strictly inside the chart, where the gradient exists.
pub fn check_interior(p: &ModelParams, p_u: f64) -> Result<()> {
    let Radicals { rg, rh } = radicals(p, p_u)?;
    if rg * rg <= RADICAND_TOL || rh * rh <= RADICAND_TOL {
        return Err(Error::Boundary { p_u });
    }
    Ok(())
}

pub fn grad_reduced_at(p: &ModelParams, u: f64, p_u: f64) -> Result<ReducedGradient> {
    check_interior(p, p_u)?;
    let Radicals { rg, rh } = radicals(p, p_u)?;
    let c = &p.coeffs;
    let (g, h, pv) = (p.g_norm, p.h_norm, p.p_v);
    let r = rg * rh;
    let (s, co) = (SQRT_2 * u).sin_cos();
    let k = g * g + h * h;
    let x = -co * r + k + p_u * p_u - pv * pv;

    let a = p_u + pv;
    let b = p_u - pv;
    let r_pu = -a * rh / rg - b * rg / rh;
    let r_pv = -a * rh / rg + b * rg / rh;

    let x_u = SQRT_2 * s * r;
    let x_pu = -co * r_pu + 2.0 * p_u;
    let x_pv = -co * r_pv - 2.0 * pv;
    // y = 2k − x, so y' = −x' for each variable.
    let half_diff = 0.5 * (c.exchange_l - c.exchange_m);
    let quart = 0.5 * c.quartic * x;

    let du = half_diff * x_u - c.dzyaloshinsky * SQRT_2 * co * r + quart * x_u;
    let dp_u = half_diff * x_pu + 2.0 * c.anisotropy_l * p_u - c.dzyaloshinsky * s * r_pu
        + quart * x_pu;
    let dp_v = half_diff * x_pv + 2.0 * c.anisotropy_m * pv - c.dzyaloshinsky * s * r_pv
        + quart * x_pv;
    Ok(ReducedGradient { du, dp_u, dp_v })
}

/// Canonical velocities of the reduced system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedField {
    pub u_dot: f64,
    pub p_u_dot: f64,
    /// `v̇ = ∂H/∂p_v`, present when the input state carries `v`.
    pub v_dot: Option<f64>,
}

/// `u̇ = ∂H/∂p_u`, `ṗ_u = −∂H/∂u`, and `v̇ = ∂H/∂p_v` when `v` is carried.
pub fn vector_field_reduced(p: &ModelParams, st: &ReducedState) -> Result<ReducedField> {
    let gr = grad_reduced(p, st)?;
    Ok(ReducedField {
        u_dot: gr.dp_u,
        p_u_dot: -gr.du,
        v_dot: st.v.map(|_| gr.dp_v),
    })
}

/// Hessian `[[H_uu, H_up], [H_up, H_pp]]` by central differences of the
/// analytic gradient, symmetrized.
pub fn hessian_reduced(p: &ModelParams, u: f64, p_u: f64, step: f64) -> Result<[[f64; 2]; 2]> {
    let gu_plus = grad_reduced_at(p, u + step, p_u)?;
    let gu_minus = grad_reduced_at(p, u - step, p_u)?;
    let gp_plus = grad_reduced_at(p, u, p_u + step)?;
    let gp_minus = grad_reduced_at(p, u, p_u - step)?;
    let huu = (gu_plus.du - gu_minus.du) / (2.0 * step);
    let hpp = (gp_plus.dp_u - gp_minus.dp_u) / (2.0 * step);
    let hup = 0.5
        * ((gu_plus.dp_u - gu_minus.dp_u) / (2.0 * step)
            + (gp_plus.du - gp_minus.du) / (2.0 * step));
    Ok([[huu, hup], [hup, hpp]])
}
