//! Small dense vector/matrix helpers for dimensions up to ~16.

/// Dense row-major matrix, sized for differentials of sphere maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Determinant by LU with partial pivoting. Square matrices only.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut sign = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a[i * n + k].abs() > a[piv * n + k].abs() {
                    piv = i;
                }
            }
            if a[piv * n + k] == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                sign = -sign;
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        sign * (0..n).map(|i| a[i * n + i]).product::<f64>()
    }

    /// Solve `A x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` when the matrix is numerically singular.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if a[i * n + k].abs() > a[piv * n + k].abs() {
                    piv = i;
                }
            }
            if a[piv * n + k].abs() < 1e-300 {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                x.swap(k, piv);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                if f == 0.0 {
                    continue;
                }
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= a[k * n + j] * x[j];
            }
            x[k] = s / a[k * n + k];
        }
        Some(x)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| x * c).collect()
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Normalize to unit Euclidean norm. Returns `None` for a near-zero vector.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n < 1e-300 || !n.is_finite() {
        return None;
    }
    Some(scale(a, 1.0 / n))
}

/// Cross product in R^3.
pub fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `x`,
/// via the Householder reflection taking the last coordinate axis to `x`.
///
/// Returns `dim(x) - 1` vectors. Any unit `x` is accepted; near the axis
/// itself the reflection degenerates gracefully to the identity columns.
pub fn tangent_frame(x: &[f64]) -> Vec<Vec<f64>> {
    let d = x.len();
    let mut v: Vec<f64> = x.to_vec();
    v[d - 1] -= 1.0;
    let vn2 = dot(&v, &v);
    let mut frame = Vec::with_capacity(d - 1);
    for j in 0..d - 1 {
        let mut col = vec![0.0; d];
        col[j] = 1.0;
        if vn2 > 1e-28 {
            let f = 2.0 * v[j] / vn2;
            for i in 0..d {
                col[i] -= f * v[i];
            }
        }
        frame.push(col);
    }
    frame
}

/// Project `v` onto the tangent space of the unit sphere at `x`.
pub fn project_tangent(x: &[f64], v: &[f64]) -> Vec<f64> {
    let c = dot(x, v);
    v.iter().zip(x).map(|(vi, xi)| vi - c * xi).collect()
}

/// Geodesic distance between unit vectors on a sphere.
pub fn sphere_dist(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_frame_is_orthonormal_and_tangent() {
        let pts: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, -1.0],
            vec![1.0, 0.0, 0.0],
            normalized(&[0.3, -0.5, 0.81]).unwrap(),
            normalized(&[0.3, -0.5, 0.2, 0.77, -0.1]).unwrap(),
        ];
        for x in pts {
            let frame = tangent_frame(&x);
            assert_eq!(frame.len(), x.len() - 1);
            for (i, u) in frame.iter().enumerate() {
                assert!(dot(u, &x).abs() < 1e-12, "not tangent at {x:?}");
                for (j, w) in frame.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(u, w) - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn solve_roundtrip() {
        let a = Mat::from_rows(&[
            vec![2.0, 1.0, -1.0],
            vec![-3.0, -1.0, 2.0],
            vec![-2.0, 1.0, 2.0],
        ]);
        let x = a.solve(&[8.0, -11.0, -3.0]).unwrap();
        let expect = [2.0, 3.0, -1.0];
        for (xi, ei) in x.iter().zip(&expect) {
            assert!((xi - ei).abs() < 1e-12);
        }
    }

    #[test]
    fn det_of_rotation_is_one() {
        let t: f64 = 0.7;
        let a = Mat::from_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]);
        assert!((a.det() - 1.0).abs() < 1e-14);
    }
}
