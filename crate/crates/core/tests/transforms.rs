mod common;

use std::f64::consts::{SQRT_2, TAU};

use proptest::prelude::*;
use rand::Rng;
use spinreduce::model::{
    energy_ml, energy_reduced_at, vector_field_full, vector_field_reduced, MLState, ModelParams,
    ReducedState, Vec3,
};
use spinreduce::transforms::{
    canonical_to_cyl, cyl_to_canonical, gh_to_cyl, lift_point, ml_to_reduced, periodic_difference,
    CylState,
};
use spinreduce::Error;

fn params_of(st: &MLState) -> ModelParams {
    let red = ml_to_reduced(st).unwrap();
    ModelParams::new(common::default_coeffs(), red.g_norm, red.h_norm, red.p_v).unwrap()
}

#[test]
fn ml_reduced_ml_round_trip() {
    let mut r = common::rng(20);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let st = common::random_nonsingular_ml(&mut r);
        let back = lift_point(&ml_to_reduced(&st).unwrap().state, &params_of(&st)).unwrap();
        worst = worst.max((back.m - st.m).amax()).max((back.l - st.l).amax());
    }
    assert!(worst < 1e-10, "worst round-trip error {worst:e}");
}

#[test]
fn energy_is_preserved_along_the_chain() {
    let mut r = common::rng(21);
    for _ in 0..10_000 {
        let st = common::random_nonsingular_ml(&mut r);
        let red = ml_to_reduced(&st).unwrap();
        let p = ModelParams::new(common::random_coeffs(&mut r), red.g_norm, red.h_norm, red.p_v).unwrap();
        let a = energy_ml(&p, &st);
        let b = energy_reduced_at(&p, red.state.u, red.state.p_u).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn momenta_are_linear_in_z_components() {
    let mut r = common::rng(22);
    for _ in 0..1000 {
        let st = common::random_nonsingular_ml(&mut r);
        let red = ml_to_reduced(&st).unwrap();
        assert!((red.state.p_u - st.l.z / SQRT_2).abs() < 1e-15);
        assert!((red.p_v - st.m.z / SQRT_2).abs() < 1e-15);
        assert!(((st.m + st.l).norm() - 2.0 * red.g_norm).abs() < 1e-12);
        assert!(((st.m - st.l).norm() - 2.0 * red.h_norm).abs() < 1e-12);
    }
}

#[test]
fn singular_states_are_rejected() {
    let mut r = common::rng(23);
    for _ in 0..1000 {
        // g = (m+l)/2 purely axial.
        let h = common::random_vec(&mut r, 1.0);
        let gz: f64 = r.random_range(-1.0..1.0);
        let g = Vec3::new(0.0, 0.0, gz);
        let st = MLState::new(g + h, g - h);
        assert!(matches!(
            ml_to_reduced(&st),
            Err(Error::SingularConfiguration { .. })
        ));
        let st = MLState::new(h + g, h - g);
        assert!(matches!(
            ml_to_reduced(&st),
            Err(Error::SingularConfiguration { .. })
        ));
    }
}

#[test]
fn reduced_field_is_the_pushforward_of_the_full_field() {
    let mut r = common::rng(24);
    let eps = 1e-6;
    let period = ModelParams::u_period();
    for _ in 0..1000 {
        let st = common::random_nonsingular_ml(&mut r);
        let red = ml_to_reduced(&st).unwrap();
        let p = ModelParams::new(common::random_coeffs(&mut r), red.g_norm, red.h_norm, red.p_v).unwrap();
        let (md, ld) = vector_field_full(&p, &st);
        // Directional derivative of the chain along the full field.
        let shifted = |s: f64| {
            let moved = MLState::new(st.m + md * s, st.l + ld * s);
            ml_to_reduced(&moved).unwrap().state
        };
        let (a, b) = (shifted(eps), shifted(-eps));
        let u_dot = periodic_difference(a.u, b.u, period) / (2.0 * eps);
        let pu_dot = (a.p_u - b.p_u) / (2.0 * eps);
        let v_dot = periodic_difference(a.v.unwrap(), b.v.unwrap(), period) / (2.0 * eps);
        let f = vector_field_reduced(&p, &red.state).unwrap();
        let scale = 1.0 + f.u_dot.abs() + f.p_u_dot.abs() + f.v_dot.unwrap().abs();
        assert!((u_dot - f.u_dot).abs() < 1e-8 * scale, "u̇ {u_dot} vs {}", f.u_dot);
        assert!((pu_dot - f.p_u_dot).abs() < 1e-8 * scale, "ṗ_u {pu_dot} vs {}", f.p_u_dot);
        assert!((v_dot - f.v_dot.unwrap()).abs() < 1e-8 * scale, "v̇ {v_dot} vs {}", f.v_dot.unwrap());
    }
}

#[test]
fn canonical_map_is_symplectic() {
    // Pairs (φ_g, g_z), (φ_h, h_z) → (u, p_u), (v, p_v): check Jᵀ Ω J = Ω
    // with a finite-difference Jacobian.
    let mut r = common::rng(25);
    let eps = 1e-6;
    for _ in 0..200 {
        let cs = CylState {
            g_norm: 1.3,
            h_norm: 0.9,
            g_z: r.random_range(-1.0..1.0),
            h_z: r.random_range(-0.8..0.8),
            phi_g: r.random_range(0.5..2.5),
            phi_h: r.random_range(0.5..2.5),
        };
        let coords = |c: &CylState| [c.phi_g, c.g_z, c.phi_h, c.h_z];
        let image = |x: [f64; 4]| {
            let red = cyl_to_canonical(&CylState {
                phi_g: x[0],
                g_z: x[1],
                phi_h: x[2],
                h_z: x[3],
                ..cs
            });
            [red.state.u, red.state.p_u, red.state.v.unwrap(), red.p_v]
        };
        let x0 = coords(&cs);
        let mut jac = [[0.0; 4]; 4];
        for k in 0..4 {
            let (mut a, mut b) = (x0, x0);
            a[k] += eps;
            b[k] -= eps;
            let (fa, fb) = (image(a), image(b));
            for i in 0..4 {
                jac[i][k] = (fa[i] - fb[i]) / (2.0 * eps);
            }
        }
        let omega = [
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        s += jac[a][i] * omega[a][b] * jac[b][j];
                    }
                }
                assert!((s - omega[i][j]).abs() < 1e-8, "({i},{j}): {s}");
            }
        }
    }
}

#[test]
fn lift_identities() {
    let mut r = common::rng(26);
    for _ in 0..1000 {
        let (p, s) = common::random_interior(&mut r);
        let st = lift_point(&s, &p).unwrap();
        assert!((st.m.z - SQRT_2 * p.p_v()).abs() < 1e-14);
        let back = ml_to_reduced(&st).unwrap();
        assert!(periodic_difference(back.state.u, s.u, ModelParams::u_period()).abs() < 1e-10);
        assert!((back.state.p_u - s.p_u).abs() < 1e-12);
    }
}

#[test]
fn lift_without_v_is_an_error() {
    let p = common::default_params();
    assert!(matches!(
        lift_point(&ReducedState::new(0.0, 0.0), &p),
        Err(Error::MissingCyclicAngle)
    ));
}

proptest! {
    #[test]
    fn cyl_canonical_round_trip(
        gz in -0.9f64..0.9,
        hz in -0.9f64..0.9,
        phi_g in 0.0f64..TAU,
        phi_h in 0.0f64..TAU,
    ) {
        let cs = CylState { g_norm: 1.0, h_norm: 1.0, g_z: gz, h_z: hz, phi_g, phi_h };
        let back = canonical_to_cyl(&cyl_to_canonical(&cs)).unwrap();
        prop_assert!((back.g_z - gz).abs() < 1e-12);
        prop_assert!((back.h_z - hz).abs() < 1e-12);
        prop_assert!(periodic_difference(back.phi_g, phi_g, TAU).abs() < 1e-12);
        prop_assert!(periodic_difference(back.phi_h, phi_h, TAU).abs() < 1e-12);
    }

    #[test]
    fn cylindrical_angles_are_canonical(x in prop::array::uniform6(-1.0f64..1.0)) {
        let g = Vec3::new(x[0], x[1], x[2]);
        let h = Vec3::new(x[3], x[4], x[5]);
        if let Ok(cs) = gh_to_cyl(&g, &h) {
            prop_assert!((0.0..TAU).contains(&cs.phi_g));
            prop_assert!((0.0..TAU).contains(&cs.phi_h));
            prop_assert!(cs.g_z.abs() <= cs.g_norm && cs.h_z.abs() <= cs.h_norm);
        }
    }
}
