use super::*;
use crate::expr::MapExpr;
use crate::space::Space;

#[test]
fn hopf_fiber_over_east_pole_is_the_z1_circle() {
    // The closed-form fiber over (1,0,0) is {(z1, 0) : |z1| = 1}.
    let e = MapExpr::hopf();
    let t = trace_preimage(&e, &[1.0, 0.0, 0.0], 0.02).unwrap();
    assert_eq!(t.components.len(), 1, "one component");
    let comp = &t.components[0];
    assert!(comp.len() > 100);
    for v in comp {
        let dev = (v[2] * v[2] + v[3] * v[3]).sqrt();
        assert!(dev < 1e-5, "vertex off the closed-form fiber by {dev:.2e}");
        assert!((geom::norm(v) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn hopf_fiber_over_west_pole_is_the_z2_circle() {
    let e = MapExpr::hopf();
    let t = trace_preimage(&e, &[-1.0, 0.0, 0.0], 0.02).unwrap();
    assert_eq!(t.components.len(), 1);
    for v in &t.components[0] {
        let dev = (v[0] * v[0] + v[1] * v[1]).sqrt();
        assert!(dev < 1e-5);
    }
}

#[test]
fn closure_gaps_are_small() {
    let e = MapExpr::hopf();
    let t = trace_preimage(&e, &[0.0, 1.0, 0.0], 0.02).unwrap();
    for gap in &t.closure_gaps {
        assert!(*gap < 2.0 * t.step, "closure gap {gap}");
    }
}

#[test]
fn distinct_fibers_are_disjoint() {
    let e = MapExpr::hopf();
    let t1 = trace_preimage(&e, &[1.0, 0.0, 0.0], 0.02).unwrap();
    let t2 = trace_preimage(&e, &[0.0, 0.0, 1.0], 0.02).unwrap();
    let d = min_trace_distance(&t1, &t2);
    assert!(d > 10.0 * TOL_PRE, "fibers too close: {d}");
}

#[test]
fn hopf_invariant_of_hopf_is_one() {
    assert_eq!(hopf_invariant(&MapExpr::hopf()).unwrap(), 1);
}

#[test]
fn hopf_invariant_scales_with_precomposed_degree() {
    for d in [2i64, 3] {
        let e = wrapped_hopf(d);
        assert_eq!(hopf_invariant(&e).unwrap(), d, "degree {d}");
    }
}

#[test]
fn hopf_invariant_negates_under_reflection() {
    use std::sync::Arc;
    let e = MapExpr::compose(
        Arc::new(MapExpr::hopf()),
        Arc::new(MapExpr::reflection(3)),
    )
    .unwrap();
    assert_eq!(hopf_invariant(&e).unwrap(), -1);
}

#[test]
fn degenerate_maps_have_invariant_zero() {
    let c = MapExpr::constant_basepoint(3, 2);
    assert_eq!(hopf_invariant(&c).unwrap(), 0);
    let collapsed = wrapped_hopf(0);
    assert_eq!(hopf_invariant(&collapsed).unwrap(), 0);
}

#[test]
fn invariant_is_independent_of_the_value_pair() {
    // Five distinct admissible pairs from the candidate list.
    let e = wrapped_hopf(2);
    let dirs = icosahedral_directions();
    let mut results = Vec::new();
    for pair in [(0usize, 6usize), (1, 7), (2, 8), (3, 9), (4, 10)] {
        let t1 = trace_preimage(&e, &dirs[pair.0], 0.02).unwrap();
        let t2 = trace_preimage(&e, &dirs[pair.1], 0.02).unwrap();
        let mut total = 0;
        for ca in &t1.components {
            for cb in &t2.components {
                total += linking_number(ca, cb).unwrap();
            }
        }
        results.push(total);
    }
    assert!(results.iter().all(|r| *r == results[0]), "{results:?}");
}

#[test]
fn gromov_audit_on_the_hopf_map() {
    let audit = gromov_audit(&MapExpr::hopf(), 4096).unwrap();
    assert_eq!(audit.hopf_invariant, 1);
    // D is about 4, so the ratio sits near 1/16.
    assert!((audit.dilation2.estimate - 4.0).abs() < 0.05);
    assert!((audit.ratio - 1.0 / 16.0).abs() < 0.005);
    assert!(audit.pass);
}

#[test]
fn gromov_audit_family_ratios_stay_bounded() {
    let base = gromov_audit(&MapExpr::hopf(), 4096).unwrap();
    for d in 2..=3i64 {
        let audit = gromov_audit(&wrapped_hopf(d), 4096).unwrap();
        assert!(audit.pass, "audit fails at degree {d}");
        assert!(
            audit.ratio <= base.ratio * 2.0,
            "ratio {} at degree {d} vs base {}",
            audit.ratio,
            base.ratio
        );
    }
}

#[test]
fn audit_of_constant_map_trivially_holds() {
    let audit = gromov_audit(&MapExpr::constant_basepoint(3, 2), 512).unwrap();
    assert_eq!(audit.hopf_invariant, 0);
    assert_eq!(audit.dilation2.estimate, 0.0);
    assert!(audit.pass);
}

#[test]
fn wrong_signature_is_rejected() {
    let e = MapExpr::hopf();
    let s = MapExpr::suspend(std::sync::Arc::new(e)).unwrap();
    assert!(matches!(
        hopf_invariant(&s),
        Err(HopfError::WrongSignature(_))
    ));
    assert!(matches!(
        trace_preimage(&s, &[1.0, 0.0, 0.0, 0.0], 0.02),
        Err(HopfError::WrongSignature(_))
    ));
}

#[test]
fn traces_serialize_to_json() {
    let e = MapExpr::hopf();
    let t = trace_preimage(&e, &[1.0, 0.0, 0.0], 0.05).unwrap();
    let text = t.to_json_string();
    let back: CurveTrace = serde_json::from_str(&text).unwrap();
    assert_eq!(back.components.len(), t.components.len());
    assert_eq!(back.regular_value, t.regular_value);
}

#[test]
fn icosahedral_candidates_avoid_wrap_poles() {
    // The wrap family is degenerate over (+-1, 0, 0); the candidate list
    // must keep clear of both.
    for y in icosahedral_directions() {
        assert!(geom::sphere_dist(&y, &[1.0, 0.0, 0.0]) > 0.3);
        assert!(geom::sphere_dist(&y, &[-1.0, 0.0, 0.0]) > 0.3);
    }
    let _ = Space::sphere(2);
}
