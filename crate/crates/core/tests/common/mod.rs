#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinreduce::model::{Coefficients, MLState, ModelParams, ReducedState, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients of the shipped default configuration.
pub fn default_coeffs() -> Coefficients {
    Coefficients {
        exchange_l: 1.0,
        exchange_m: 1.8,
        anisotropy_l: 0.6,
        anisotropy_m: 0.1,
        dzyaloshinsky: 0.3,
        quartic: 0.3,
    }
}

pub fn default_params() -> ModelParams {
    ModelParams::new(default_coeffs(), 1.0, 1.0, 0.2).unwrap()
}

pub fn random_coeffs(r: &mut impl Rng) -> Coefficients {
    Coefficients {
        exchange_l: r.random_range(-2.0..2.0),
        exchange_m: r.random_range(-2.0..2.0),
        anisotropy_l: r.random_range(-2.0..2.0),
        anisotropy_m: r.random_range(-2.0..2.0),
        dzyaloshinsky: r.random_range(-2.0..2.0),
        quartic: r.random_range(-2.0..2.0),
    }
}

pub fn random_vec(r: &mut impl Rng, scale: f64) -> Vec3 {
    Vec3::new(
        r.random_range(-scale..scale),
        r.random_range(-scale..scale),
        r.random_range(-scale..scale),
    )
}

/// State whose `g = (m+l)/2` and `h = (m−l)/2` both have transverse norm
/// above `0.05`.
pub fn random_nonsingular_ml(r: &mut impl Rng) -> MLState {
    loop {
        let st = MLState::new(random_vec(r, 1.0), random_vec(r, 1.0));
        let g = (st.m + st.l) * 0.5;
        let h = (st.m - st.l) * 0.5;
        if g.x.hypot(g.y) > 0.05 && h.x.hypot(h.y) > 0.05 {
            return st;
        }
    }
}

/// Random parameters plus a reduced state strictly inside the admissible
/// interval (at least 1% of its width from either end).
pub fn random_interior(r: &mut impl Rng) -> (ModelParams, ReducedState) {
    loop {
        let g: f64 = r.random_range(0.3..1.5);
        let h: f64 = r.random_range(0.3..1.5);
        let pv = r.random_range(-0.8..0.8) * std::f64::consts::SQRT_2 * g.min(h);
        let Ok(p) = ModelParams::new(random_coeffs(r), g, h, pv) else {
            continue;
        };
        let range = p.admissible_momentum_range();
        if range.width() < 1e-2 {
            continue;
        }
        let m = 0.01 * range.width();
        let p_u = r.random_range(range.lo + m..range.hi - m);
        let u = r.random_range(0.0..ModelParams::u_period());
        let v = r.random_range(-5.0..5.0);
        return (p, ReducedState::with_v(u, p_u, v));
    }
}
