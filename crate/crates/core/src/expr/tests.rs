use std::sync::Arc;

use super::*;
use crate::geom;

fn unit4(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    geom::normalized(&[a, b, c, d]).unwrap()
}

#[test]
fn hopf_at_unit_z1() {
    let h = MapExpr::hopf();
    let y = h.eval(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(geom::dist(&y, &[1.0, 0.0, 0.0]) < 1e-14);
}

#[test]
fn hopf_outputs_are_unit() {
    let h = MapExpr::hopf();
    for s in 0..50 {
        let t = s as f64;
        let x = unit4(t.sin(), (2.0 * t).cos(), (3.0 * t).sin(), 0.7 * t.cos());
        let y = h.eval(&x).unwrap();
        assert!((geom::norm(&y) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn identity_rotation_fixes_points() {
    let rot = MapExpr::rotation(Mat::identity(4)).unwrap();
    let x = unit4(0.3, -0.4, 0.5, 0.7);
    let y = rot.eval(&x).unwrap();
    assert!(geom::dist(&x, &y) < 1e-15);
}

#[test]
fn rotation_rejects_non_orthogonal() {
    let mut m = Mat::identity(3);
    m[(0, 1)] = 0.5;
    assert!(MapExpr::rotation(m).is_err());
}

#[test]
fn smash_sends_wedge_to_basepoint() {
    let smash = MapExpr::smash(2, 1).unwrap();
    let bp2 = Space::sphere(2).basepoint();
    let bp1 = Space::sphere(1).basepoint();
    let bp3 = Space::sphere(3).basepoint();
    // First factor at its basepoint, second arbitrary.
    for t in [0.1f64, 1.2, 2.9] {
        let mut x = bp2.clone();
        x.extend([t.sin(), t.cos()]);
        let y = smash.eval(&x).unwrap();
        assert!(geom::dist(&y, &bp3) < 1e-9, "wedge point (bp, b) -> {y:?}");
    }
    // Second factor at its basepoint, first arbitrary.
    for t in [0.3f64, 1.9] {
        let mut x = geom::normalized(&[t.sin(), t.cos(), 0.4]).unwrap();
        x.extend(bp1.clone());
        let y = smash.eval(&x).unwrap();
        assert!(geom::dist(&y, &bp3) < 1e-9, "wedge point (a, bp) -> {y:?}");
    }
}

#[test]
fn smash_is_generically_nondegenerate() {
    let smash = MapExpr::smash(2, 1).unwrap();
    let a = geom::normalized(&[0.2, 0.5, 0.6]).unwrap();
    let mut x = a;
    x.extend(geom::normalized(&[0.8, 0.6]).unwrap());
    let y = smash.eval(&x).unwrap();
    let bp3 = Space::sphere(3).basepoint();
    assert!(geom::dist(&y, &bp3) > 0.1);
}

#[test]
fn wrap_degree_two_doubles_angle() {
    let w = MapExpr::wrap_s3(2);
    // Point with (x3, x4) = (cos t, sin t) scaled: angle doubles.
    let t: f64 = 0.7;
    let x = geom::normalized(&[0.6, 0.0, 0.8 * t.cos(), 0.8 * t.sin()]).unwrap();
    let y = w.eval(&x).unwrap();
    let rho = (x[2] * x[2] + x[3] * x[3]).sqrt();
    assert!((y[2] - rho * (2.0 * t).cos()).abs() < 1e-12);
    assert!((y[3] - rho * (2.0 * t).sin()).abs() < 1e-12);
    assert!((y[0] - x[0]).abs() < 1e-12);
}

#[test]
fn suspend_identity_is_identity() {
    let id3 = MapExpr::rotation(Mat::identity(4)).unwrap();
    let s = MapExpr::suspend(Arc::new(id3)).unwrap();
    let x = geom::normalized(&[0.3, -0.4, 0.5, 0.7, 0.2]).unwrap();
    let y = s.eval(&x).unwrap();
    assert!(geom::dist(&x, &y) < 1e-12);
}

#[test]
fn suspend_restricts_to_inner_on_equator() {
    let h = Arc::new(MapExpr::hopf());
    let s = MapExpr::suspend(h.clone()).unwrap();
    let x3 = unit4(0.3, 0.5, -0.2, 0.6);
    let mut x4 = x3.clone();
    x4.push(0.0);
    let y = s.eval(&x4).unwrap();
    let y_inner = h.eval(&x3).unwrap();
    assert!(geom::dist(&y[..3], &y_inner) < 1e-12);
    assert!(y[3].abs() < 1e-12);
}

#[test]
fn suspend_fixes_poles() {
    let s = MapExpr::suspend(Arc::new(MapExpr::hopf())).unwrap();
    let north = vec![0.0, 0.0, 0.0, 0.0, 1.0];
    let south = vec![0.0, 0.0, 0.0, 0.0, -1.0];
    assert!((s.eval(&north).unwrap()[3] - 1.0).abs() < 1e-12);
    assert!((s.eval(&south).unwrap()[3] + 1.0).abs() < 1e-12);
}

#[test]
fn suspend_of_constant_has_rank_at_most_one() {
    use crate::svd::singular_values_thin;
    let c = MapExpr::constant_basepoint(2, 2);
    let s = MapExpr::suspend(Arc::new(c)).unwrap();
    for t in [0.2f64, 0.9, 2.2] {
        let x = geom::normalized(&[t.cos(), t.sin() * 0.5, 0.6, 0.3 * t.cos()]).unwrap();
        let frame = s.domain().tangent_frame(&x);
        let mut rows = Vec::new();
        for v in &frame {
            rows.push(s.push(&x, v).unwrap().1);
        }
        let svals = singular_values_thin(&Mat::from_rows(&rows));
        assert!(svals[1] < 1e-9, "second singular value {}", svals[1]);
    }
}

#[test]
fn compose_signature_mismatch_rejected() {
    let h = Arc::new(MapExpr::hopf());
    let c1 = Arc::new(MapExpr::cube_collapse(1).unwrap());
    assert!(matches!(
        MapExpr::compose(h, c1),
        Err(MapError::SpaceMismatch { .. })
    ));
}

#[test]
fn eval_rejects_out_of_domain_points() {
    let h = MapExpr::hopf();
    assert!(h.eval(&[2.0, 0.0, 0.0, 0.0]).is_err());
    let c = MapExpr::cube_collapse(2).unwrap();
    assert!(c.eval(&[0.5, 1.4]).is_err());
}

#[test]
fn analytic_push_matches_finite_differences_per_primitive() {
    // Chain-rule consistency for each primitive at interior points.
    let exprs: Vec<MapExpr> = vec![
        MapExpr::hopf(),
        MapExpr::wrap_s3(2),
        MapExpr::wrap_s3(-1),
        MapExpr::reflection(3),
        MapExpr::cube_collapse(3).unwrap(),
        MapExpr::smash(2, 1).unwrap(),
        MapExpr::suspend(Arc::new(MapExpr::hopf())).unwrap(),
        hopf_cube_map(),
        MapExpr::rescale(vec![1.0, 2.0], vec![0.5, 3.0]).unwrap(),
    ];
    let h = 1e-5;
    for e in &exprs {
        let mut checked = 0;
        let mut trial = 0u64;
        while checked < 100 && trial < 4000 {
            trial += 1;
            let t = trial as f64;
            let u: Vec<f64> = (0..e.domain().uniforms_needed())
                .map(|i| ((t * 0.618 + i as f64 * 0.37 + t * t * 1e-3) % 1.0).abs())
                .collect();
            let Some(x) = e.domain().point_from_uniforms(&u) else {
                continue;
            };
            if e.domain().check_point(&x).is_err() {
                continue;
            }
            if e.smooth_margin(&x) < 10.0 * h {
                continue;
            }
            let frame = e.domain().tangent_frame(&x);
            for v in &frame {
                let (_, dy) = e.push(&x, v).unwrap();
                let (Some(xa), Some(xb)) =
                    (e.domain().retract(&x, v, -h), e.domain().retract(&x, v, h))
                else {
                    continue;
                };
                let ya = e.eval(&xa).unwrap();
                let yb = e.eval(&xb).unwrap();
                let fd: Vec<f64> = ya
                    .iter()
                    .zip(&yb)
                    .map(|(a, b)| (b - a) / (2.0 * h))
                    .collect();
                let scale = geom::norm(&fd).max(1.0);
                let err = geom::dist(&dy, &fd) / scale;
                assert!(
                    err < 1e-3,
                    "{}: rel error {err:.2e} at {x:?}",
                    e.describe()
                );
            }
            checked += 1;
        }
        assert!(checked >= 50, "{}: too few interior samples", e.describe());
    }
}

#[test]
fn construction_meta_exponents() {
    let meta = ConstructionMeta {
        m: 3,
        n: 2,
        p: 1,
        eps: 0.25,
        lipschitz: 1.0,
        chart_inv_lipschitz: 1.0,
        smash_lipschitz: 1.0,
    };
    assert_eq!(meta.predicted_exponent(3), num_rational::Rational64::from_integer(1));
    assert_eq!(meta.predicted_exponent(4), num_rational::Rational64::from_integer(4));
    assert_eq!(meta.predicted_exponent(2), num_rational::Rational64::from_integer(-2));
}

#[test]
fn prop1_builds_sphere_map_with_basepoint_complement() {
    let f = prop1_construct(
        3,
        2,
        1,
        Arc::new(hopf_cube_map()),
        Arc::new(degree_one_cube_map(1)),
        0.5,
    )
    .unwrap();
    assert_eq!(f.domain(), &Space::sphere(4));
    assert_eq!(f.codomain(), &Space::sphere(3));
    let bp = f.codomain().basepoint();
    // The south pole and anything far from the chart ball maps to the
    // basepoint.
    let south = vec![0.0, 0.0, 0.0, 0.0, -1.0];
    assert!(geom::dist(&f.eval(&south).unwrap(), &bp) < 1e-12);
    // A thousand sampled points outside the embedded slab all hit the
    // basepoint exactly.
    let sampler = crate::dilation::sampling::DomainSampler::new(Space::sphere(4), 404);
    let mut outside = 0;
    let mut idx = 0u64;
    while outside < 1000 {
        let x = sampler.sample(idx).unwrap();
        idx += 1;
        if f.fold_plan().unwrap().invert(&x).is_some() {
            continue;
        }
        outside += 1;
        let y = f.eval(&x).unwrap();
        assert!(geom::dist(&y, &bp) < 1e-12, "complement point maps to {y:?}");
    }
    // Slab boundary points map to the basepoint through the wedge.
    let plan = f.fold_plan().unwrap();
    for s in 0..20 {
        let t = (s as f64 + 0.5) / 20.0;
        let mut slab: Vec<f64> = plan
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| e * ((t + 0.3 * i as f64) % 1.0))
            .collect();
        slab[s % 4] = if s % 2 == 0 { 0.0 } else { plan.edges[s % 4] };
        let sphere_pt = plan.chart(&slab);
        let y = f.eval(&sphere_pt).unwrap();
        assert!(geom::dist(&y, &bp) < 1e-7, "boundary -> {y:?}");
    }
    // Interior slab points generically miss the basepoint.
    let interior: Vec<f64> = plan.edges.iter().map(|e| e * 0.37).collect();
    let y = f.eval(&plan.chart(&interior)).unwrap();
    assert!(geom::dist(&y, &bp) > 1e-3);
}

#[test]
fn prop1_rejects_mismatched_factors() {
    // f1 with the wrong cube dimension.
    let err = prop1_construct(
        3,
        2,
        1,
        Arc::new(degree_one_cube_map(2)),
        Arc::new(degree_one_cube_map(1)),
        0.5,
    );
    assert!(err.is_err());
    // f1 that misses the basepoint condition: plain hopf-compose-collapse
    // lands the boundary on (-1, 0, 0) instead of the basepoint.
    let bad = MapExpr::compose(
        Arc::new(MapExpr::hopf()),
        Arc::new(MapExpr::cube_collapse(3).unwrap()),
    )
    .unwrap();
    let err = prop1_construct(
        3,
        2,
        1,
        Arc::new(bad),
        Arc::new(degree_one_cube_map(1)),
        0.5,
    );
    assert!(matches!(err, Err(MapError::BadParameter(_))));
}

#[test]
fn json_round_trip_is_bit_exact_on_parameters() {
    let exprs: Vec<MapExpr> = vec![
        MapExpr::hopf(),
        MapExpr::wrap_s3(3),
        MapExpr::reflection(3),
        MapExpr::cube_collapse(2).unwrap(),
        MapExpr::rescale(vec![0.1, 0.7300000000000002], vec![1.0 / 3.0, 7.21e-3]).unwrap(),
        MapExpr::rectangle_chart(3, 1, 0.24999999999999997).unwrap(),
        prop1_construct(
            3,
            2,
            1,
            Arc::new(hopf_cube_map()),
            Arc::new(degree_one_cube_map(1)),
            0.125,
        )
        .unwrap(),
    ];
    for e in &exprs {
        let text = e.to_json_string();
        let back = MapExpr::from_json_str(&text).unwrap();
        assert_eq!(text, back.to_json_string(), "round trip for {}", e.describe());
        assert_eq!(e.domain(), back.domain());
        assert_eq!(e.codomain(), back.codomain());
    }
}

#[test]
fn sphere_outputs_stay_unit_across_composites() {
    let f = prop1_construct(
        3,
        2,
        1,
        Arc::new(hopf_cube_map()),
        Arc::new(degree_one_cube_map(1)),
        0.25,
    )
    .unwrap();
    for s in 0..200 {
        let u: Vec<f64> = (0..5)
            .map(|i| ((s as f64 * 0.7719 + i as f64 * 0.211) % 1.0).abs())
            .collect();
        let x = Space::sphere(4).point_from_uniforms(&u).unwrap();
        let y = f.eval(&x).unwrap();
        assert!((geom::norm(&y) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn lipschitz_bounds_exist_for_construction() {
    let f1 = hopf_cube_map();
    assert!(f1.lipschitz_bound().unwrap() <= 2.0 * COLLAPSE_LIP + 1e-9);
    let f = prop1_construct(
        3,
        2,
        1,
        Arc::new(f1),
        Arc::new(degree_one_cube_map(1)),
        0.25,
    )
    .unwrap();
    let meta = f.construction_meta().unwrap();
    assert!(meta.lipschitz >= 2.0);
    assert!(meta.predicted_bound(3).unwrap() > 0.0);
    assert!(meta.predicted_bound(2).is_none());
}
