mod common;

use proptest::prelude::*;
use spinreduce::algebra::{
    bracket_vector_field, gh_bracket_table, ml_bracket_table, sublattice_bracket_table, BracketTable,
};
use spinreduce::model::{grad_ml, vector_field_full, MLState};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradients of `m·l` and `m² + l²` in `(m, l)` coordinates.
fn ml_casimir_gradients(x: &[f64]) -> [Vec<f64>; 2] {
    let (m, l) = (&x[0..3], &x[3..6]);
    [
        l.iter().chain(m).copied().collect(),
        x.iter().map(|v| 2.0 * v).collect(),
    ]
}

/// Gradients of `g²` and `h²`.
fn gh_casimir_gradients(x: &[f64]) -> [Vec<f64>; 2] {
    let mut g = vec![0.0; 6];
    let mut h = vec![0.0; 6];
    for k in 0..3 {
        g[k] = 2.0 * x[k];
        h[k + 3] = 2.0 * x[k + 3];
    }
    [g, h]
}

fn check_casimirs(table: &BracketTable, casimirs: fn(&[f64]) -> [Vec<f64>; 2], seed: u64) {
    use rand::Rng;
    let mut r = common::rng(seed);
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..6).map(|_| r.random_range(-2.0..2.0)).collect();
        let grad: Vec<f64> = (0..6).map(|_| r.random_range(-2.0..2.0)).collect();
        let xdot = table.contract(&x, &grad).unwrap();
        for c in casimirs(&x) {
            assert!(dot(&xdot, &c).abs() < 1e-10);
        }
    }
}

#[test]
fn ml_casimirs_are_conserved_by_any_flow() {
    check_casimirs(&ml_bracket_table(), ml_casimir_gradients, 1);
}

#[test]
fn gh_casimirs_are_conserved_by_any_flow() {
    check_casimirs(&gh_bracket_table(), gh_casimir_gradients, 2);
}

#[test]
fn shipped_tables_pass_exhaustive_checks() {
    for t in [ml_bracket_table(), gh_bracket_table(), sublattice_bracket_table()] {
        assert_eq!(t.antisymmetry_violation(), None);
        assert_eq!(t.jacobi_violation(), None);
    }
    assert_eq!(sublattice_bracket_table().dimension(), 12);
}

#[test]
fn spin_blocks_commute() {
    let t = sublattice_bracket_table();
    assert!(t.bracket_by_name("s1_x", "s2_y").unwrap().is_zero());
    assert_eq!(t.bracket_by_name("s3_x", "s3_y").unwrap().display_with(t.names()).to_string(), "+s3_z");
}

#[test]
fn closed_form_field_matches_bracket_contraction() {
    let mut r = common::rng(3);
    let table = ml_bracket_table();
    for _ in 0..1000 {
        let p = spinreduce::ModelParams::new(common::random_coeffs(&mut r), 1.0, 1.0, 0.0).unwrap();
        let st = MLState::new(common::random_vec(&mut r, 1.5), common::random_vec(&mut r, 1.5));
        let via_table = bracket_vector_field(
            &table,
            |x| {
                let (dm, dl) = grad_ml(&p, &MLState::from_slice(x));
                vec![dm.x, dm.y, dm.z, dl.x, dl.y, dl.z]
            },
            &st.to_array(),
        )
        .unwrap();
        let (md, ld) = vector_field_full(&p, &st);
        let closed = [md.x, md.y, md.z, ld.x, ld.y, ld.z];
        for (a, b) in via_table.iter().zip(closed) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

proptest! {
    #[test]
    fn poisson_matrix_is_antisymmetric(x in prop::collection::vec(-3.0f64..3.0, 6)) {
        for table in [ml_bracket_table(), gh_bracket_table()] {
            let j = table.poisson_matrix(&x).unwrap();
            for a in 0..6 {
                for b in 0..6 {
                    prop_assert_eq!(j[a][b], -j[b][a]);
                }
            }
        }
    }

    #[test]
    fn contraction_is_linear_in_the_gradient(
        x in prop::collection::vec(-3.0f64..3.0, 6),
        g1 in prop::collection::vec(-3.0f64..3.0, 6),
        g2 in prop::collection::vec(-3.0f64..3.0, 6),
        s in -2.0f64..2.0,
    ) {
        let t = ml_bracket_table();
        let combined: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + s * b).collect();
        let lhs = t.contract(&x, &combined).unwrap();
        let a = t.contract(&x, &g1).unwrap();
        let b = t.contract(&x, &g2).unwrap();
        for k in 0..6 {
            prop_assert!((lhs[k] - (a[k] + s * b[k])).abs() < 1e-10);
        }
    }
}
