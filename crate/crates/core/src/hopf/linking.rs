//! Gauss linking numbers of disjoint closed polylines on the 3-sphere.
//!
//! Curves are stereographically projected to R^3 from a pole far from both,
//! then the Gauss double sum runs over segment pairs with the exact
//! solid-angle formula per pair. Summation is a pairwise tree in a fixed
//! order, so results are bit-stable.

use crate::error::HopfError;
use crate::geom::{self, cross3};

/// Pre-rounding deviation from an integer beyond which the curves are
/// declared too coarse.
pub const INTEGER_TOL: f64 = 0.1;

/// Linking number of two disjoint closed polylines with vertices on S^3.
pub fn linking_number(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<i64, HopfError> {
    let raw = linking_sum(a, b)?;
    let rounded = raw.round();
    if (raw - rounded).abs() > INTEGER_TOL {
        return Err(HopfError::NonIntegerLinking {
            value: raw,
            tol: INTEGER_TOL,
        });
    }
    Ok(rounded as i64)
}

/// The pre-rounding Gauss sum (exposed for refinement-invariance tests).
pub fn linking_sum(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, HopfError> {
    if a.len() < 3 || b.len() < 3 {
        return Ok(0.0);
    }
    let max_edge = max_edge_len(a).max(max_edge_len(b));
    let min_dist = min_curve_distance(a, b);
    if min_dist <= 10.0 * max_edge {
        return Err(HopfError::NotRegular(format!(
            "curves too close to link reliably: min distance {min_dist:.3e} vs edge {max_edge:.3e}"
        )));
    }
    let pole = choose_pole(a, b)?;
    let pa: Vec<[f64; 3]> = a.iter().map(|v| stereographic(v, &pole)).collect();
    let pb: Vec<[f64; 3]> = b.iter().map(|v| stereographic(v, &pole)).collect();

    let mut contributions = Vec::with_capacity(pa.len() * pb.len());
    for i in 0..pa.len() {
        let a1 = pa[i];
        let a2 = pa[(i + 1) % pa.len()];
        for j in 0..pb.len() {
            let b1 = pb[j];
            let b2 = pb[(j + 1) % pb.len()];
            contributions.push(segment_pair_solid_angle(a1, a2, b1, b2));
        }
    }
    Ok(tree_sum(&mut contributions) / (4.0 * std::f64::consts::PI))
}

/// Signed solid angle swept by the direction between two straight segments
/// (the exact per-pair value of the Gauss integral).
fn segment_pair_solid_angle(a1: [f64; 3], a2: [f64; 3], b1: [f64; 3], b2: [f64; 3]) -> f64 {
    let r = |p: [f64; 3], q: [f64; 3]| [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    let r11 = r(a1, b1);
    let r12 = r(a1, b2);
    let r21 = r(a2, b1);
    let r22 = r(a2, b2);
    let unit = |v: [f64; 3]| -> Option<[f64; 3]> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1e-14 {
            None
        } else {
            Some([v[0] / n, v[1] / n, v[2] / n])
        }
    };
    let (Some(n1), Some(n2), Some(n3), Some(n4)) = (
        unit(cross3(&r11, &r12)),
        unit(cross3(&r12, &r22)),
        unit(cross3(&r22, &r21)),
        unit(cross3(&r21, &r11)),
    ) else {
        // Degenerate (near-collinear) configuration contributes nothing.
        return 0.0;
    };
    let dotc = |u: [f64; 3], v: [f64; 3]| (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
    let omega = dotc(n1, n2).asin() + dotc(n2, n3).asin() + dotc(n3, n4).asin() + dotc(n4, n1).asin();
    let da = r(a2, a1);
    let db = r(b2, b1);
    let sign = cross3(&da, &db);
    let orient = sign[0] * r11[0] + sign[1] * r11[1] + sign[2] * r11[2];
    if orient >= 0.0 {
        omega
    } else {
        -omega
    }
}

/// Stereographic projection of S^3 from pole `q`, after moving `q` to the
/// last coordinate axis by an orientation-preserving map. Linking numbers
/// are then pole-independent.
fn stereographic(x: &[f64], pole: &[f64]) -> [f64; 3] {
    // Householder taking pole -> e4 has determinant -1; negating one
    // coordinate afterwards restores orientation.
    let mut v = pole.to_vec();
    v[3] -= 1.0;
    let vn2 = geom::dot(&v, &v);
    let mut y = x.to_vec();
    if vn2 > 1e-28 {
        let f = 2.0 * geom::dot(&v, x) / vn2;
        for i in 0..4 {
            y[i] -= f * v[i];
        }
        y[0] = -y[0];
    }
    let denom = 1.0 - y[3];
    [y[0] / denom, y[1] / denom, y[2] / denom]
}

/// Deterministic pole candidates: coordinate poles plus main diagonals.
fn pole_candidates() -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; 4];
            v[i] = s;
            out.push(v);
        }
    }
    for signs in 0..16u32 {
        let v: Vec<f64> = (0..4)
            .map(|i| if signs >> i & 1 == 1 { 0.5 } else { -0.5 })
            .collect();
        out.push(v);
    }
    out
}

fn choose_pole(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Vec<f64>, HopfError> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for cand in pole_candidates() {
        let d = a
            .iter()
            .chain(b.iter())
            .map(|v| geom::sphere_dist(v, &cand))
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().map(|(bd, _)| d > *bd).unwrap_or(true) {
            best = Some((d, cand));
        }
    }
    match best {
        Some((d, pole)) if d > 0.3 => Ok(pole),
        _ => Err(HopfError::NoPole),
    }
}

fn max_edge_len(c: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..c.len() {
        best = best.max(geom::dist(&c[i], &c[(i + 1) % c.len()]));
    }
    best
}

fn min_curve_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for va in a {
        for vb in b {
            best = best.min(geom::dist(va, vb));
        }
    }
    best
}

/// Pairwise tree reduction: a deterministic summation order that is also
/// stable against reordering of the outer loops.
fn tree_sum(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut n = values.len();
    while n > 1 {
        let half = n / 2;
        for i in 0..half {
            values[i] = values[2 * i] + values[2 * i + 1];
        }
        if n % 2 == 1 {
            values[half] = values[n - 1];
            n = half + 1;
        } else {
            n = half;
        }
    }
    values[0]
}
