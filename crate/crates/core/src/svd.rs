//! Singular values of small dense matrices by one-sided Jacobi iteration.
//!
//! The matrices here are differentials of sphere maps, so dimensions stay
//! below ~16 and we want full relative accuracy rather than throughput.

use crate::geom::Mat;

/// Singular values of `a`, sorted non-increasing, padded with zeros to
/// `a.cols` entries (the count convention for differentials: one value per
/// domain direction).
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let mut s = singular_values_thin(a);
    s.resize(a.cols, 0.0);
    s
}

/// Singular values without padding: `min(rows, cols)` entries, non-increasing.
#[allow(clippy::needless_range_loop)] // two columns are read and written in lockstep
pub fn singular_values_thin(a: &Mat) -> Vec<f64> {
    // One-sided Jacobi orthogonalizes the columns of A; the singular values
    // are the resulting column norms. Work on the transpose when that makes
    // the column count smaller.
    let work = if a.cols > a.rows { a.transpose() } else { a.clone() };
    let m = work.rows;
    let n = work.cols;
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| work.col(j)).collect();

    let max_sweeps = 60;
    let tol = 1e-300;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    alpha += cols[p][i] * cols[p][i];
                    beta += cols[q][i] * cols[q][i];
                    gamma += cols[p][i] * cols[q][i];
                }
                if alpha * beta <= tol {
                    continue;
                }
                let denom = (alpha * beta).sqrt();
                let conv = gamma.abs() / denom;
                off = off.max(conv);
                if conv < 1e-15 {
                    continue;
                }
                // Jacobi rotation that zeroes the (p,q) inner product.
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let vp = cols[p][i];
                    let vq = cols[q][i];
                    cols[p][i] = c * vp - s * vq;
                    cols[q][i] = s * vp + c * vq;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }

    let mut svals: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    svals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    svals
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn diagonal_matrix() {
        let a = mat(&[&[3.0, 0.0], &[0.0, -2.0]]);
        let s = singular_values_thin(&a);
        assert!((s[0] - 3.0).abs() < 1e-14);
        assert!((s[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one_matrix() {
        let a = mat(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        let s = singular_values_thin(&a);
        assert!((s[0] - 3.0).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12);
        assert!(s[2].abs() < 1e-12);
    }

    #[test]
    fn rectangular_padding() {
        // 2x4 differential: two nonzero values, padded to four.
        let a = mat(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 2.0, 0.0, 0.0]]);
        let s = singular_values(&a);
        assert_eq!(s.len(), 4);
        assert!((s[0] - 2.0).abs() < 1e-14);
        assert!((s[1] - 1.0).abs() < 1e-14);
        assert_eq!(s[2], 0.0);
        assert_eq!(s[3], 0.0);
    }

    #[test]
    fn frobenius_and_det_consistency() {
        // sum of squares of singular values = squared Frobenius norm,
        // product of singular values = |det| for square matrices.
        let cases = [
            mat(&[&[2.0, 1.0], &[-1.0, 0.5]]),
            mat(&[&[1.0, 2.0, 3.0], &[0.0, -1.0, 4.0], &[2.0, 2.0, 2.0]]),
            mat(&[
                &[0.3, -1.2, 0.7, 0.1],
                &[2.0, 0.4, -0.9, 1.1],
                &[-0.5, 0.6, 1.3, -2.2],
                &[0.8, -0.3, 0.2, 0.9],
            ]),
        ];
        for a in &cases {
            let s = singular_values_thin(a);
            let fro2: f64 = s.iter().map(|x| x * x).sum();
            assert!((fro2 - a.norm_fro().powi(2)).abs() < 1e-10 * fro2.max(1.0));
            let prod: f64 = s.iter().product();
            assert!((prod - a.det().abs()).abs() < 1e-10 * prod.max(1.0));
        }
    }

    #[test]
    fn invariant_under_orthogonal_factors() {
        let t: f64 = 0.93;
        let rot = mat(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        let a = mat(&[&[3.0, 1.0], &[0.0, 0.5]]);
        let s1 = singular_values_thin(&a);
        let s2 = singular_values_thin(&rot.matmul(&a));
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
