mod common;
mod oracle;

use spinreduce::dynamics::{integrate_reduced, IntegratorSpec, Method};
use spinreduce::model::{energy_reduced_at, grad_reduced_at, Coefficients, ModelParams, ReducedState};
use spinreduce::portrait::{
    classify, find_fixed_points, is_degenerate_hamiltonian, level_set, newton, periodic_distance,
    render_portrait, trace_separatrices, BranchEnd, FixedPoint, FixedPointKind, Polyline, RenderOptions,
    Topology, MATCH_RADIUS,
};

fn default_points() -> Vec<FixedPoint> {
    find_fixed_points(&common::default_params(), 64)
}

fn count(points: &[FixedPoint], kind: FixedPointKind) -> usize {
    points.iter().filter(|f| f.kind == kind).count()
}

#[test]
fn default_portrait_has_centers_and_saddles() {
    let fps = default_points();
    assert!(count(&fps, FixedPointKind::Center) >= 1);
    assert!(count(&fps, FixedPointKind::Saddle) >= 1);
    assert_eq!(count(&fps, FixedPointKind::Degenerate), 0);
    let period = ModelParams::u_period();
    for f in &fps {
        assert!(f.residual < 1e-10, "{f:?}");
        assert!((0.0..period).contains(&f.u));
    }
}

#[test]
fn index_oracle_confirms_count_and_kind() {
    let p = common::default_params();
    let fps = default_points();
    let cells = oracle::index_scan(&p, 512);
    assert_eq!(cells.len(), fps.len(), "oracle cells {cells:?}");
    for c in &cells {
        let f = fps
            .iter()
            .min_by(|a, b| {
                periodic_distance((a.u, a.p_u), (c.u, c.p_u)).total_cmp(&periodic_distance((b.u, b.p_u), (c.u, c.p_u)))
            })
            .unwrap();
        assert!(periodic_distance((f.u, f.p_u), (c.u, c.p_u)) <= c.radius * 1.01, "{c:?} vs {f:?}");
        let expected = if c.index > 0 { FixedPointKind::Center } else { FixedPointKind::Saddle };
        assert_eq!(f.kind, expected, "{c:?}");
    }
}

#[test]
fn doubling_grid_n_gives_an_identical_table() {
    let p = common::default_params();
    let (a, b) = (find_fixed_points(&p, 64), find_fixed_points(&p, 128));
    assert_eq!(a, b);
    // Bitwise, so a signed zero counts as a difference.
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

/// Hessian of `H` from energy values on a 5×5 stencil of spacing `s`.
fn stencil_hessian(p: &ModelParams, u: f64, q: f64, s: f64) -> [[f64; 2]; 2] {
    let h = |a: i32, b: i32| energy_reduced_at(p, u + a as f64 * s, q + b as f64 * s).unwrap();
    let d1 = [1.0, -8.0, 0.0, 8.0, -1.0];
    let d2 = [-1.0, 16.0, -30.0, 16.0, -1.0];
    let mut huu = 0.0;
    let mut hpp = 0.0;
    let mut hup = 0.0;
    for a in 0..5 {
        huu += d2[a] * h(a as i32 - 2, 0);
        hpp += d2[a] * h(0, a as i32 - 2);
        for b in 0..5 {
            hup += d1[a] * d1[b] * h(a as i32 - 2, b as i32 - 2);
        }
    }
    let s2 = s * s;
    [[huu / (12.0 * s2), hup / (144.0 * s2)], [hup / (144.0 * s2), hpp / (12.0 * s2)]]
}

#[test]
fn classification_matches_an_independent_hessian() {
    let p = common::default_params();
    for f in default_points() {
        let h = stencil_hessian(&p, f.u, f.p_u, 1e-3);
        assert_eq!(classify(&h), f.kind, "{f:?}");
    }
}

#[test]
fn random_parameters_give_consistent_points() {
    let mut r = common::rng(40);
    let mut checked = 0;
    while checked < 12 {
        let Ok(p) = ModelParams::new(common::random_coeffs(&mut r), 1.0, 1.0, 0.2) else {
            continue;
        };
        let range = p.admissible_momentum_range();
        for f in find_fixed_points(&p, 32) {
            assert!(f.residual < 1e-10);
            assert!(range.contains(f.p_u));
            let margin = 1e-3 * range.width();
            if f.kind != FixedPointKind::Degenerate && f.p_u - range.lo > margin && range.hi - f.p_u > margin {
                let h = stencil_hessian(&p, f.u, f.p_u, 1e-5 * range.width().min(1.0));
                assert_eq!(classify(&h), f.kind, "{f:?}");
            }
        }
        checked += 1;
    }
}

#[test]
fn fixed_points_repeat_with_the_period() {
    let p = common::default_params();
    let period = ModelParams::u_period();
    for f in default_points() {
        let g = grad_reduced_at(&p, f.u + period, f.p_u).unwrap();
        assert!(g.du.hypot(g.dp_u) < 1e-10);
        let (u, q) = newton(&p, f.u + period + 1e-4, f.p_u - 1e-4).unwrap();
        assert!((u - f.u - period).abs() < 1e-8 && (q - f.p_u).abs() < 1e-8, "{f:?} → ({u}, {q})");
    }
}

#[test]
fn vanishing_coefficients_give_no_points() {
    let p = ModelParams::new(Coefficients::default(), 1.0, 1.0, 0.2).unwrap();
    assert!(is_degenerate_hamiltonian(&p));
    assert!(find_fixed_points(&p, 16).is_empty());
    assert!(!is_degenerate_hamiltonian(&common::default_params()));
}

#[test]
fn critical_values_change_the_loop_count() {
    let p = common::default_params();
    for f in default_points() {
        let below = level_set(&p, f.energy - 1e-4, 1024).len();
        let above = level_set(&p, f.energy + 1e-4, 1024).len();
        assert_ne!(below, above, "{f:?}");
    }
}

fn winding_number(poly: &[(f64, f64)], pt: (f64, f64)) -> i32 {
    let mut wn = 0;
    for w in poly.windows(2) {
        let (a, b) = (w[0], w[1]);
        let cross = (b.0 - a.0) * (pt.1 - a.1) - (pt.0 - a.0) * (b.1 - a.1);
        if a.1 <= pt.1 && b.1 > pt.1 && cross > 0.0 {
            wn += 1;
        } else if a.1 > pt.1 && b.1 <= pt.1 && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn encloses(line: &Polyline, pt: (f64, f64)) -> bool {
    let period = ModelParams::u_period();
    line.closed
        && line.winding() == 0
        && (-1..=1).any(|k| winding_number(&line.points, (pt.0 + k as f64 * period, pt.1)) != 0)
}

#[test]
fn perturbed_center_level_is_a_small_loop_around_it() {
    let p = common::default_params();
    for f in default_points().into_iter().filter(|f| f.kind == FixedPointKind::Center) {
        // Minimum or maximum by the sign of the trace.
        let e = if f.hessian[0][0] > 0.0 { f.energy + 1e-3 } else { f.energy - 1e-3 };
        let lines = level_set(&p, e, 512);
        let around: Vec<&Polyline> = lines.iter().filter(|l| encloses(l, (f.u, f.p_u))).collect();
        assert_eq!(around.len(), 1, "{f:?}");
        let reach = around[0]
            .points
            .iter()
            .map(|&v| periodic_distance(v, (f.u, f.p_u)))
            .fold(0.0, f64::max);
        assert!(reach < 0.2, "{f:?}: {reach}");
    }
}

#[test]
fn level_set_error_shrinks_with_resolution() {
    let p = common::default_params();
    let worst = |res: usize| {
        level_set(&p, 3.0, res)
            .iter()
            .flat_map(|l| l.points.iter())
            .map(|&(u, q)| (energy_reduced_at(&p, u, q).unwrap() - 3.0).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [32, 64, 128, 256].into_iter().map(worst).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[3] < errs[0] / 8.0, "{errs:?}");
}

#[test]
fn level_set_below_the_minimum_is_empty() {
    let p = common::default_params();
    let min = default_points().iter().map(|f| f.energy).fold(f64::INFINITY, f64::min);
    assert!(level_set(&p, min - 0.1, 128).is_empty());
}

#[test]
fn separatrices_conserve_energy_and_end_on_saddles() {
    let p = common::default_params();
    let fps = default_points();
    let seps = trace_separatrices(&p, &fps);
    assert!(!seps.is_empty());
    assert!(seps.iter().any(|s| s.topology == Topology::SaddleConnection));
    for s in &seps {
        for b in &s.branches {
            let origin = &fps[b.from];
            assert_eq!(origin.kind, FixedPointKind::Saddle);
            assert_eq!(b.points[0], (origin.u, origin.p_u));
            let worst = b
                .points
                .iter()
                .map(|&(u, q)| (energy_reduced_at(&p, u, q).unwrap() - origin.energy).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-6, "branch from {}: {worst:e}", b.from);
            assert!(b.max_energy_error < 1e-6);
            assert!(b.level_set_distance < 0.05, "{}", b.level_set_distance);
            let BranchEnd::Saddle(k) = b.end else {
                panic!("branch from {} ended at {:?}", b.from, b.end);
            };
            let target = &fps[k];
            let before_close = b.points[b.points.len() - 2];
            assert!(periodic_distance(before_close, (target.u, target.p_u)) < MATCH_RADIUS);
            assert!(s.saddle_refs.contains(&k) && s.saddle_refs.contains(&b.from));
        }
    }
}

#[test]
fn saddle_connection_is_seen_by_a_dense_contour() {
    let p = common::default_params();
    let fps = default_points();
    let seps = trace_separatrices(&p, &fps);
    let conn = seps.iter().find(|s| s.topology == Topology::SaddleConnection).unwrap();
    let (a, b) = (&fps[conn.saddle_refs[0]], &fps[conn.saddle_refs[1]]);
    let near = |l: &Polyline, f: &FixedPoint| l.points.iter().any(|&v| periodic_distance(v, (f.u, f.p_u)) < 0.02);
    let lines = level_set(&p, a.energy, 512);
    assert!(lines.iter().any(|l| near(l, a) && near(l, b)));
}

#[test]
fn render_without_inputs_draws_axes_only() {
    let p = common::default_params();
    let opts = RenderOptions {
        level_count: 0,
        ..Default::default()
    };
    let svg = render_portrait(&p, &[], &[], &[], &opts);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("class=\"axes\""));
    assert!(svg.contains(">u</text>") && svg.contains("p_u = l_z/√2"));
    for marker in ["class=\"saddle", "class=\"center", "class=\"degenerate", "<path d="] {
        assert!(!svg.contains(marker), "{marker}");
    }
}

#[test]
fn render_has_one_marker_per_point_and_is_deterministic() {
    let p = common::default_params();
    let fps = default_points();
    let seps = trace_separatrices(&p, &fps);
    let orbit = integrate_reduced(
        &p,
        &ReducedState::with_v(1.23655, 0.3, 0.0),
        &IntegratorSpec {
            dt: 1e-2,
            t_end: 10.0,
            method: Method::SymplecticMidpoint,
            ..Default::default()
        },
    )
    .unwrap();
    let opts = RenderOptions {
        level_count: 8,
        resolution: 96,
        u_periods: 2,
        ..Default::default()
    };
    let svg = render_portrait(&p, &fps, &seps, std::slice::from_ref(&orbit), &opts);
    assert_eq!(svg.matches("class=\"saddle\"").count(), count(&fps, FixedPointKind::Saddle));
    assert_eq!(svg.matches("class=\"center\"").count(), count(&fps, FixedPointKind::Center));
    assert_eq!(svg.matches("class=\"saddle-repeat\"").count(), count(&fps, FixedPointKind::Saddle));
    assert!(svg.contains("class=\"separatrices\"") && svg.contains("class=\"orbits\""));
    assert_eq!(svg, render_portrait(&p, &fps, &seps, std::slice::from_ref(&orbit), &opts));
}
