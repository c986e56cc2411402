//! Implicit one-step maps for the non-separable reduced Hamiltonian.
//!
//! The reduced Hamiltonian mixes `u` and `p_u` in every term, so explicit
//! splitting methods do not apply. All maps here solve their implicit stages
//! by fixed-point iteration.

use crate::error::{Error, Result};

pub const FIXED_POINT_TOL: f64 = 1e-13;
pub const FIXED_POINT_MAX_ITER: usize = 50;

/// Triple-jump weights: three midpoint substeps of `γ₁h, γ₂h, γ₁h` give a
/// symmetric, symplectic method of order four.
pub const TRIPLE_JUMP: [f64; 3] = {
    // 2^(1/3)
    const CBRT2: f64 = 1.259_921_049_894_873_2;
    const G1: f64 = 1.0 / (2.0 - CBRT2);
    [G1, 1.0 - 2.0 * G1, G1]
};

fn converged(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= FIXED_POINT_TOL * y.abs().max(1.0))
}

/// One implicit-midpoint step `y = x + h f((x + y)/2)`.
///
/// `t` is only used for error reporting.
pub fn implicit_midpoint<F>(f: &mut F, x: &[f64], h: f64, t: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = x.len();
    let mut rate = vec![0.0; n];
    f(x, &mut rate)?;
    let mut y: Vec<f64> = x.iter().zip(&rate).map(|(xi, fi)| xi + h * fi).collect();
    let mut mid = vec![0.0; n];
    for _ in 0..FIXED_POINT_MAX_ITER {
        for i in 0..n {
            mid[i] = 0.5 * (x[i] + y[i]);
        }
        f(&mid, &mut rate)?;
        let y_next: Vec<f64> = x.iter().zip(&rate).map(|(xi, fi)| xi + h * fi).collect();
        let done = converged(&y_next, &y);
        y = y_next;
        if done {
            return Ok(y);
        }
    }
    Err(Error::StepFailure {
        t,
        iterations: FIXED_POINT_MAX_ITER,
    })
}

/// Order-4 composition of implicit-midpoint substeps.
pub fn midpoint_triple_jump<F>(f: &mut F, x: &[f64], h: f64, t: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut y = x.to_vec();
    let mut s = t;
    for w in TRIPLE_JUMP {
        y = implicit_midpoint(f, &y, w * h, s)?;
        s += w * h;
    }
    Ok(y)
}

/// Partial derivatives `(H_q, H_p, H_c)` where `c` is an extra quantity
/// advanced by quadrature (the cyclic angle's rate).
pub trait CanonicalGradient {
    fn gradient(&mut self, q: f64, p: f64) -> Result<(f64, f64, f64)>;
}

impl<F> CanonicalGradient for F
where
    F: FnMut(f64, f64) -> Result<(f64, f64, f64)>,
{
    fn gradient(&mut self, q: f64, p: f64) -> Result<(f64, f64, f64)> {
        self(q, p)
    }
}

fn fixed_point_scalar<G>(mut g: G, start: f64, t: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut x = start;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let next = g(x)?;
        if (next - x).abs() <= FIXED_POINT_TOL * next.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::StepFailure {
        t,
        iterations: FIXED_POINT_MAX_ITER,
    })
}

/// Generalized Störmer–Verlet step for a non-separable `H(q, p)`:
///
/// ```text
/// p½   = p − h/2 H_q(q, p½)
/// q'   = q + h/2 (H_p(q, p½) + H_p(q', p½))
/// p'   = p½ − h/2 H_q(q', p½)
/// ```
///
/// The cyclic angle is advanced with the trapezoidal average of its rate at
/// `(q, p½)` and `(q', p½)`.
pub fn stormer_verlet_generalized<G: CanonicalGradient>(
    grad: &mut G,
    (q, p, c): (f64, f64, f64),
    h: f64,
    t: f64,
) -> Result<(f64, f64, f64)> {
    let half = 0.5 * h;
    let p_half = fixed_point_scalar(|ph| Ok(p - half * grad.gradient(q, ph)?.0), p, t)?;
    let (_, hp0, hc0) = grad.gradient(q, p_half)?;
    let q_new = fixed_point_scalar(
        |qn| Ok(q + half * (hp0 + grad.gradient(qn, p_half)?.1)),
        q + h * hp0,
        t,
    )?;
    let (hq1, _, hc1) = grad.gradient(q_new, p_half)?;
    Ok((q_new, p_half - half * hq1, c + half * (hc0 + hc1)))
}
