//! Domains and codomains of map expressions: spheres, rectangular boxes,
//! and products of two spheres.

use serde::{Deserialize, Serialize};

use crate::error::MapError;
use crate::geom;

/// Ambient-coordinate point. Sphere points are unit vectors of length
/// `dim + 1`; box points are coordinate tuples; product points are the two
/// unit vectors concatenated.
pub type Point = Vec<f64>;

/// Tolerance for accepting an input point as lying on a sphere.
pub const SPHERE_INPUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum Space {
    /// Unit d-sphere in R^{d+1}. Basepoint is the south pole
    /// (0, ..., 0, -1).
    Sphere { dim: usize },
    /// Rectangular box `[0, e_1] x ... x [0, e_d]` with the Euclidean metric.
    Cube { edges: Vec<f64> },
    /// Product of two unit spheres, points concatenated, so tangent frames
    /// and metrics stay block-diagonal.
    SphereProduct { dim_a: usize, dim_b: usize },
}

impl Space {
    pub fn sphere(dim: usize) -> Space {
        Space::Sphere { dim }
    }

    pub fn unit_cube(dim: usize) -> Space {
        Space::Cube {
            edges: vec![1.0; dim],
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            Space::Sphere { dim } => *dim,
            Space::Cube { edges } => edges.len(),
            Space::SphereProduct { dim_a, dim_b } => dim_a + dim_b,
        }
    }

    /// Length of ambient coordinate vectors for points of this space.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Space::Sphere { dim } => dim + 1,
            Space::Cube { edges } => edges.len(),
            Space::SphereProduct { dim_a, dim_b } => dim_a + dim_b + 2,
        }
    }

    pub fn basepoint(&self) -> Point {
        match self {
            Space::Sphere { dim } => {
                let mut p = vec![0.0; dim + 1];
                p[*dim] = -1.0;
                p
            }
            Space::Cube { edges } => vec![0.0; edges.len()],
            Space::SphereProduct { dim_a, dim_b } => {
                let mut p = Space::sphere(*dim_a).basepoint();
                p.extend(Space::sphere(*dim_b).basepoint());
                p
            }
        }
    }

    /// Validates that `x` belongs to this space (within tolerances).
    pub fn check_point(&self, x: &[f64]) -> Result<(), MapError> {
        if x.len() != self.ambient_dim() {
            return Err(MapError::OutOfDomain(format!(
                "expected {} coordinates for {self:?}, got {}",
                self.ambient_dim(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(MapError::OutOfDomain("non-finite coordinate".into()));
        }
        match self {
            Space::Sphere { .. } => {
                let n = geom::norm(x);
                if (n - 1.0).abs() > SPHERE_INPUT_TOL {
                    return Err(MapError::OutOfDomain(format!(
                        "sphere point has norm {n}, outside 1 +- {SPHERE_INPUT_TOL}"
                    )));
                }
            }
            Space::Cube { edges } => {
                for (i, (&xi, &ei)) in x.iter().zip(edges).enumerate() {
                    if xi < -1e-12 || xi > ei + 1e-12 {
                        return Err(MapError::OutOfDomain(format!(
                            "coordinate {i} = {xi} outside [0, {ei}]"
                        )));
                    }
                }
            }
            Space::SphereProduct { dim_a, dim_b } => {
                Space::sphere(*dim_a).check_point(&x[..dim_a + 1])?;
                Space::sphere(*dim_b).check_point(&x[dim_a + 1..dim_a + 1 + dim_b + 1])?;
            }
        }
        Ok(())
    }

    /// Orthonormal tangent frame at `x`, as ambient vectors.
    pub fn tangent_frame(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match self {
            Space::Sphere { .. } => geom::tangent_frame(x),
            Space::Cube { edges } => {
                let d = edges.len();
                (0..d)
                    .map(|j| {
                        let mut v = vec![0.0; d];
                        v[j] = 1.0;
                        v
                    })
                    .collect()
            }
            Space::SphereProduct { dim_a, dim_b } => {
                let amb = self.ambient_dim();
                let mut frame = Vec::with_capacity(dim_a + dim_b);
                for u in geom::tangent_frame(&x[..dim_a + 1]) {
                    let mut v = vec![0.0; amb];
                    v[..dim_a + 1].copy_from_slice(&u);
                    frame.push(v);
                }
                for u in geom::tangent_frame(&x[dim_a + 1..]) {
                    let mut v = vec![0.0; amb];
                    v[dim_a + 1..].copy_from_slice(&u);
                    frame.push(v);
                }
                frame
            }
        }
    }

    /// Step from `x` along ambient direction `v` by `t`, staying on the
    /// space (spheres renormalize; boxes clamp is NOT applied — out-of-range
    /// results are reported by `check_point`).
    pub fn retract(&self, x: &[f64], v: &[f64], t: f64) -> Option<Point> {
        let mut y: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi + t * vi).collect();
        match self {
            Space::Sphere { .. } => {
                y = geom::normalized(&y)?;
                Some(y)
            }
            Space::Cube { edges } => {
                for (yi, ei) in y.iter().zip(edges) {
                    if *yi < 0.0 || *yi > *ei {
                        return None;
                    }
                }
                Some(y)
            }
            Space::SphereProduct { dim_a, .. } => {
                let a = geom::normalized(&y[..dim_a + 1])?;
                let b = geom::normalized(&y[dim_a + 1..])?;
                let mut out = a;
                out.extend(b);
                Some(out)
            }
        }
    }

    /// Geodesic-ish distance used for dedup and audits: great-circle distance
    /// on spheres, Euclidean on boxes, l2 combination on products.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Space::Sphere { .. } => geom::sphere_dist(x, y),
            Space::Cube { .. } => geom::dist(x, y),
            Space::SphereProduct { dim_a, .. } => {
                let da = geom::sphere_dist(&x[..dim_a + 1], &y[..dim_a + 1]);
                let db = geom::sphere_dist(&x[dim_a + 1..], &y[dim_a + 1..]);
                (da * da + db * db).sqrt()
            }
        }
    }

    /// Point of the space from a vector of uniform variates in [0,1)^dim
    /// (for spheres, dim+1 variates are consumed through an inverse-normal
    /// transform so the result is area-uniform).
    pub fn point_from_uniforms(&self, u: &[f64]) -> Option<Point> {
        match self {
            Space::Sphere { dim } => {
                let mut v = Vec::with_capacity(dim + 1);
                for &ui in u.iter().take(dim + 1) {
                    v.push(inverse_normal_cdf(ui));
                }
                geom::normalized(&v)
            }
            Space::Cube { edges } => Some(
                edges
                    .iter()
                    .zip(u)
                    .map(|(ei, ui)| ei * ui)
                    .collect::<Vec<f64>>(),
            ),
            Space::SphereProduct { dim_a, dim_b } => {
                let a = Space::sphere(*dim_a).point_from_uniforms(&u[..dim_a + 1])?;
                let b = Space::sphere(*dim_b).point_from_uniforms(&u[dim_a + 1..])?;
                let mut out = a;
                out.extend(b);
                Some(out)
            }
        }
    }

    /// How many uniform variates `point_from_uniforms` consumes.
    pub fn uniforms_needed(&self) -> usize {
        match self {
            Space::Sphere { dim } => dim + 1,
            Space::Cube { edges } => edges.len(),
            Space::SphereProduct { dim_a, dim_b } => dim_a + dim_b + 2,
        }
    }

    /// Total volume (Lebesgue for boxes, round-metric for spheres).
    pub fn volume(&self) -> f64 {
        match self {
            Space::Sphere { dim } => sphere_volume(*dim),
            Space::Cube { edges } => edges.iter().product(),
            Space::SphereProduct { dim_a, dim_b } => sphere_volume(*dim_a) * sphere_volume(*dim_b),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Space::Sphere { dim } => format!("S^{dim}"),
            Space::Cube { edges } => format!("box{edges:?}"),
            Space::SphereProduct { dim_a, dim_b } => format!("S^{dim_a} x S^{dim_b}"),
        }
    }
}

/// Surface volume of the unit d-sphere: 2 pi^{(d+1)/2} / Gamma((d+1)/2).
pub fn sphere_volume(dim: usize) -> f64 {
    let d = dim as f64;
    let half = (d + 1.0) / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma(half)
}

fn gamma(x: f64) -> f64 {
    // Only ever called at integer or half-integer arguments.
    if (x - x.round()).abs() < 1e-12 {
        let n = x.round() as u64;
        (1..n).map(|k| k as f64).product()
    } else {
        // x = k + 1/2
        let k = (x - 0.5).round() as u64;
        let mut g = std::f64::consts::PI.sqrt();
        for i in 0..k {
            g *= 0.5 + i as f64;
        }
        g
    }
}

/// Acklam's rational approximation to the standard normal quantile.
/// Relative error below 1.2e-9, plenty for quasi-random sphere sampling.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    let p = p.clamp(1e-300, 1.0 - 1e-16);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basepoints_belong_to_their_spaces() {
        let spaces = [
            Space::sphere(2),
            Space::sphere(4),
            Space::unit_cube(3),
            Space::SphereProduct { dim_a: 2, dim_b: 1 },
        ];
        for s in spaces {
            s.check_point(&s.basepoint()).unwrap();
        }
    }

    #[test]
    fn frames_are_orthonormal_on_products() {
        let s = Space::SphereProduct { dim_a: 2, dim_b: 1 };
        let u: Vec<f64> = vec![0.1, 0.3, 0.5, 0.7, 0.2];
        let x = s.point_from_uniforms(&u).unwrap();
        s.check_point(&x).unwrap();
        let frame = s.tangent_frame(&x);
        assert_eq!(frame.len(), 3);
        for (i, a) in frame.iter().enumerate() {
            for (j, b) in frame.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((geom::dot(a, b) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(1) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_volume(2) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        // vol(S^3) = 2 pi^2, vol(S^4) = 8 pi^2 / 3
        assert!((sphere_volume(3) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-10);
        assert!((sphere_volume(4) - 8.0 * std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_normal_is_monotone_and_symmetric() {
        let mut last = f64::NEG_INFINITY;
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let z = inverse_normal_cdf(p);
            assert!(z > last);
            last = z;
            assert!((z + inverse_normal_cdf(1.0 - p)).abs() < 1e-8);
        }
        assert!(inverse_normal_cdf(0.5).abs() < 1e-9);
        assert!((inverse_normal_cdf(0.975) - 1.959964).abs() < 1e-4);
    }
}
