//! Radial degree-1 collapse of a cube onto a sphere, and its inverse.
//!
//! `[0,1]^m` is centered, pushed onto the unit ball along rays (max-norm
//! radius becomes Euclidean radius), and wrapped onto `S^m` by
//! `v -> (sin(pi r) v/|v|, cos(pi r))`. The whole cube boundary lands on the
//! south-pole basepoint and the center on the north pole; the map has
//! degree 1 and an explicit Lipschitz bound.

use crate::geom;

/// Recorded Lipschitz bound for the collapse in any dimension: a factor 2
/// from centering, at most 3 from the cube-to-ball radial map, and pi from
/// the ball-to-sphere wrap.
pub const COLLAPSE_LIP: f64 = 6.0 * std::f64::consts::PI;

/// Recorded Lipschitz bound for the smash realization built from collapses.
/// Conservative; the sampled operator norm is checked against it in tests.
pub const SMASH_LIP: f64 = 8.0 * std::f64::consts::PI;

/// Forward collapse `[0,1]^m -> S^m` in ambient R^{m+1}.
pub fn collapse(x: &[f64]) -> Vec<f64> {
    let m = x.len();
    let u: Vec<f64> = x.iter().map(|xi| 2.0 * xi - 1.0).collect();
    let a = u.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut y = vec![0.0; m + 1];
    if a < 1e-300 {
        y[m] = 1.0;
        return y;
    }
    let g2 = geom::norm(&u);
    let f = (std::f64::consts::PI * a).sin() / g2;
    for i in 0..m {
        y[i] = f * u[i];
    }
    y[m] = (std::f64::consts::PI * a).cos();
    y
}

/// Forward collapse with directional derivative.
pub fn collapse_jvp(x: &[f64], dx: &[f64]) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let m = x.len();
    let y = collapse(x);
    if m == 1 {
        // One-dimensional case is the smooth wrap t -> pi(2t - 1).
        let u = 2.0 * x[0] - 1.0;
        let du = 2.0 * dx[0];
        let dy = vec![PI * (PI * u).cos() * du, -PI * (PI * u).sin() * du];
        return (y, dy);
    }
    let u: Vec<f64> = x.iter().map(|xi| 2.0 * xi - 1.0).collect();
    let du: Vec<f64> = dx.iter().map(|d| 2.0 * d).collect();
    let (imax, a) = max_abs(&u);
    let g2 = geom::norm(&u);
    let mut dy = vec![0.0; m + 1];
    if a < 1e-12 || g2 < 1e-12 {
        // Non-smooth at the center; report a zero derivative (callers guard
        // by margin).
        return (y, dy);
    }
    let da = u[imax].signum() * du[imax];
    let dg2 = geom::dot(&u, &du) / g2;
    let s = (PI * a).sin();
    let c = (PI * a).cos();
    for i in 0..m {
        dy[i] = PI * c * da * u[i] / g2 + s * (du[i] / g2 - u[i] * dg2 / (g2 * g2));
    }
    dy[m] = -PI * s * da;
    (y, dy)
}

/// Inverse collapse `S^m -> [0,1]^m`; total on the sphere, with the
/// basepoint sent to a boundary representative.
pub fn collapse_inv(y: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    let m = y.len() - 1;
    let r = y[m].clamp(-1.0, 1.0).acos() / PI;
    let head_norm = geom::norm(&y[..m]);
    let u: Vec<f64> = if head_norm < 1e-14 {
        // Either pole: radius r with an arbitrary direction.
        let mut u = vec![0.0; m];
        u[0] = r;
        u
    } else {
        let w: Vec<f64> = y[..m].iter().map(|yi| yi / head_norm).collect();
        let (_, winf) = max_abs(&w);
        w.iter().map(|wi| wi * r / winf).collect()
    };
    u.iter().map(|ui| (ui + 1.0) / 2.0).collect()
}

/// Inverse collapse with directional derivative.
pub fn collapse_inv_jvp(y: &[f64], dy: &[f64]) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let m = y.len() - 1;
    let x = collapse_inv(y);
    let sin_pir = (1.0 - y[m] * y[m]).max(0.0).sqrt();
    let head_norm = geom::norm(&y[..m]);
    if sin_pir < 1e-12 || head_norm < 1e-12 {
        return (x, vec![0.0; m]);
    }
    let r = y[m].clamp(-1.0, 1.0).acos() / PI;
    let dr = -dy[m] / (PI * sin_pir);
    let w: Vec<f64> = y[..m].iter().map(|yi| yi / head_norm).collect();
    let dhn = geom::dot(&y[..m], &dy[..m]) / head_norm;
    let dw: Vec<f64> = y[..m]
        .iter()
        .zip(&dy[..m])
        .map(|(yi, dyi)| (dyi - yi / head_norm * dhn) / head_norm)
        .collect();
    let (jmax, winf) = max_abs(&w);
    let dwinf = w[jmax].signum() * dw[jmax];
    let dx: Vec<f64> = (0..m)
        .map(|i| {
            let dui = dw[i] * r / winf + w[i] * (dr / winf - r * dwinf / (winf * winf));
            dui / 2.0
        })
        .collect();
    (x, dx)
}

/// Distance estimate (in domain coordinates) from `x` to the non-smooth
/// loci of the collapse: coordinate ties, the center, and the boundary.
pub fn collapse_margin(x: &[f64]) -> f64 {
    let m = x.len();
    let boundary = x
        .iter()
        .fold(f64::INFINITY, |acc, xi| acc.min(xi.min(1.0 - xi)));
    if m == 1 {
        return boundary;
    }
    let u: Vec<f64> = x.iter().map(|xi| 2.0 * xi - 1.0).collect();
    let mut mags: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let tie = (mags[0] - mags[1]) / 2.0;
    let center = mags[0];
    boundary.min(tie / 2.0).min(center / 2.0)
}

/// Margin for the inverse collapse at a sphere point: distance to the two
/// poles and to direction ties.
pub fn collapse_inv_margin(y: &[f64]) -> f64 {
    let m = y.len() - 1;
    let pole = (1.0 - y[m].abs()).max(0.0);
    let head_norm = geom::norm(&y[..m]);
    if head_norm < 1e-12 || m == 1 {
        return pole;
    }
    let mut mags: Vec<f64> = y[..m].iter().map(|v| (v / head_norm).abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let tie = (mags[0] - mags[1]) / 2.0;
    pole.min(tie)
}

fn max_abs(v: &[f64]) -> (usize, f64) {
    let mut imax = 0;
    let mut best = v[0].abs();
    for (i, vi) in v.iter().enumerate().skip(1) {
        if vi.abs() > best {
            best = vi.abs();
            imax = i;
        }
    }
    (imax, best)
}
