//! Small dense linear algebra, generic over [`Scalar`] so that solves can be
//! differentiated through.

use crate::dual::Scalar;
use crate::error::GeomError;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..self.cols {
                    acc += self[(i, j)] * v[j];
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, rhs: &Mat<S>) -> Mat<S> {
        debug_assert_eq!(self.cols, rhs.rows);
        Mat::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = S::zero();
            for k in 0..self.cols {
                acc += self[(i, k)] * rhs[(k, j)];
            }
            acc
        })
    }

    /// `u^T A v`
    pub fn bilinear(&self, u: &[S], v: &[S]) -> S {
        let av = self.mul_vec(v);
        dot(u, &av)
    }

    pub fn to_f64(&self) -> Mat<f64> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(Scalar::value).collect() }
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting on the real parts.
    pub fn inverse(&self) -> Result<Mat<S>, GeomError> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        let scale = self.data.iter().map(|x| x.value().abs()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return Err(GeomError::SingularMetric);
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r1, &r2| {
                    a[(r1, col)].value().abs().total_cmp(&a[(r2, col)].value().abs())
                })
                .unwrap();
            if a[(pivot, col)].value().abs() <= 1e-14 * scale {
                return Err(GeomError::SingularMetric);
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)].recip();
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                for j in 0..n {
                    let t = a[(col, j)];
                    a[(r, j)] -= factor * t;
                    let t = inv[(col, j)];
                    inv[(r, j)] -= factor * t;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<S: Scalar>(u: &[S], v: &[S]) -> S {
    let mut acc = S::zero();
    for (a, b) in u.iter().zip(v) {
        acc += *a * *b;
    }
    acc
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Lower Cholesky factor `L` with `A = L L^T`.
pub fn cholesky(a: &Mat<f64>) -> Result<Mat<f64>, GeomError> {
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(GeomError::SingularMetric);
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Result of an overdetermined least-squares solve.
#[derive(Clone, Debug)]
pub struct LeastSquares<S> {
    pub solution: Vec<S>,
    /// Euclidean norm of `A x - b` at the solution.
    pub residual: f64,
}

/// Solve `min ‖A x − b‖₂` for a tall full-column-rank `A` by Householder QR.
///
/// Pivot magnitudes are compared on real parts only, so the same code path
/// is taken for every perturbation level.
pub fn least_squares<S: Scalar>(a: &Mat<S>, b: &[S]) -> Result<LeastSquares<S>, GeomError> {
    let (m, n) = (a.rows, a.cols);
    assert!(m >= n, "least squares needs at least as many rows as unknowns");
    assert_eq!(b.len(), m);
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    // each pivot is compared with its own column, so rescaling columns does
    // not change the rank decision
    let col_norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| r[(i, j)].value().powi(2)).sum::<f64>().sqrt())
        .collect();
    for k in 0..n {
        let col_scale = col_norms[k];
        if !(col_scale > 0.0) {
            return Err(GeomError::RankDeficient { smallest: 0.0 });
        }
        let mut sigma = S::zero();
        for i in k..m {
            sigma += r[(i, k)] * r[(i, k)];
        }
        let alpha_mag = sigma.value().sqrt();
        if alpha_mag <= 1e-13 * col_scale {
            return Err(GeomError::RankDeficient { smallest: alpha_mag / col_scale });
        }
        let norm_x = sigma.sqrt();
        let alpha = if r[(k, k)].value() >= 0.0 { -norm_x } else { norm_x };
        // v = x - alpha e_1, H = I - 2 v v^T / (v^T v)
        let mut v: Vec<S> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        for j in k..n {
            let mut s = S::zero();
            for (idx, i) in (k..m).enumerate() {
                s += v[idx] * r[(i, j)];
            }
            let f = (s + s) / vtv;
            for (idx, i) in (k..m).enumerate() {
                r[(i, j)] -= f * v[idx];
            }
        }
        let mut s = S::zero();
        for (idx, i) in (k..m).enumerate() {
            s += v[idx] * qtb[i];
        }
        let f = (s + s) / vtv;
        for (idx, i) in (k..m).enumerate() {
            qtb[i] -= f * v[idx];
        }
    }
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let mut s = qtb[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    let residual = qtb[n..].iter().map(|v| v.value().powi(2)).sum::<f64>().sqrt();
    Ok(LeastSquares { solution: x, residual })
}

/// Smallest singular value of `A` after scaling every column to unit norm.
pub fn min_singular_value_normalized(a: &Mat<f64>) -> f64 {
    let mut m = nalgebra::DMatrix::from_row_slice(a.rows, a.cols, &a.data);
    for mut col in m.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= nrm;
        }
    }
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}
