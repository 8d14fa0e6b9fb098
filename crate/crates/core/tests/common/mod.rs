//! Shared test oracles, independent of the implementation paths they check.
#![allow(dead_code)]

use kdilation::geom::{dot, Mat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Oracle for the k-th exterior power norm: maximize
/// `|J v_1 ^ ... ^ v_k| = sqrt(det Gram(J v_i))` over orthonormal k-frames,
/// from random starts with greedy plane-rotation polish. No singular values
/// anywhere in this path; the Gram determinant comes from LU.
pub fn frame_maximization_oracle(j: &Mat, k: usize, starts: usize, rng: &mut ChaCha8Rng) -> f64 {
    let d = j.cols;
    assert!(k >= 1 && k <= d);
    let mut best = 0.0f64;
    for _ in 0..starts {
        let basis = random_orthonormal_basis(d, rng);
        let polished = polish_frame(j, k, basis);
        best = best.max(polished);
    }
    best
}

fn frame_value(j: &Mat, basis: &[Vec<f64>], k: usize) -> f64 {
    let images: Vec<Vec<f64>> = basis[..k].iter().map(|v| j.mul_vec(v)).collect();
    let mut gram = Mat::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            gram[(a, b)] = dot(&images[a], &images[b]);
        }
    }
    gram.det().max(0.0).sqrt()
}

fn polish_frame(j: &Mat, k: usize, mut basis: Vec<Vec<f64>>) -> f64 {
    let d = basis.len();
    let mut best = frame_value(j, &basis, k);
    if k == d {
        return best;
    }
    let mut angle = 0.5f64;
    while angle > 1e-7 {
        let mut improved = false;
        for i in 0..k {
            for c in k..d {
                for sign in [1.0, -1.0] {
                    let (cos, sin) = ((sign * angle).cos(), (sign * angle).sin());
                    let vi: Vec<f64> = basis[i]
                        .iter()
                        .zip(&basis[c])
                        .map(|(a, b)| cos * a + sin * b)
                        .collect();
                    let vc: Vec<f64> = basis[i]
                        .iter()
                        .zip(&basis[c])
                        .map(|(a, b)| -sin * a + cos * b)
                        .collect();
                    let old_i = std::mem::replace(&mut basis[i], vi);
                    let old_c = std::mem::replace(&mut basis[c], vc);
                    let val = frame_value(j, &basis, k);
                    if val > best * (1.0 + 1e-14) {
                        best = val;
                        improved = true;
                    } else {
                        basis[i] = old_i;
                        basis[c] = old_c;
                    }
                }
            }
        }
        if !improved {
            angle *= 0.5;
        }
    }
    best
}

pub fn random_orthonormal_basis(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
        for _ in 0..d {
            basis.push((0..d).map(|_| gaussian(rng)).collect());
        }
        if gram_schmidt(&mut basis) {
            return basis;
        }
    }
}

fn gram_schmidt(vectors: &mut [Vec<f64>]) -> bool {
    for i in 0..vectors.len() {
        for jj in 0..i {
            let proj = dot(&vectors[i], &vectors[jj]);
            let prev = vectors[jj].clone();
            for (vi, pj) in vectors[i].iter_mut().zip(&prev) {
                *vi -= proj * pj;
            }
        }
        let n = dot(&vectors[i], &vectors[i]).sqrt();
        if n < 1e-8 {
            return false;
        }
        for vi in vectors[i].iter_mut() {
            *vi /= n;
        }
    }
    true
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}
