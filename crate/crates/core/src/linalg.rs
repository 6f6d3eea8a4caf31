//! Small dense linear algebra over `Complex<T>`.
//!
//! Real matrices are stored with zero imaginary parts; every routine here maps
//! real input to real output, so one implementation covers both base fields.
//! Sizes in this crate are tiny (n is rarely above 6), so everything is plain
//! row-major loops.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Log-gap between consecutive row scales above which rows of a graded matrix
/// are treated as decoupled (the coupling is of relative order `exp(-2 * gap)`).
const GRADED_SPLIT_GAP: f64 = 36.0;

const MAX_JACOBI_SWEEPS: usize = 80;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a real matrix from row slices. Panics on ragged input.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| Complex::new(rows[i][j], T::zero()))
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diag_real(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(l, j)];
                    out[(i, j)] += a * b;
                }
            }
        }
        out
    }

    /// `self * diag(d)` (columns scaled).
    pub fn scale_cols(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].scale(d[j]))
    }

    /// `diag(d) * self` (rows scaled).
    pub fn scale_rows(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.rows);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].scale(d[i]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Sub-matrix of rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Exact Hermitian symmetry of the stored entries.
    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..=i).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    /// `|| self^* self - I ||_F`.
    pub fn unitarity_defect(&self) -> T {
        self.adjoint().matmul(self).sub(&Self::identity(self.cols)).frobenius_norm()
    }

    /// Householder QR of a square matrix, normalized so that `R` has a real
    /// positive diagonal. Returns `None` if a column is exactly dependent.
    pub fn qr(&self) -> Option<(Self, Self)> {
        assert!(self.is_square(), "qr expects a square matrix");
        let n = self.rows;
        let mut r = self.clone();
        let mut q = Self::identity(n);
        let mut v = vec![Complex::<T>::zero(); n];
        for j in 0..n {
            let norm = (j..n).map(|i| r[(i, j)].norm_sqr()).sum::<T>().sqrt();
            if norm == T::zero() || !norm.is_finite() {
                return None;
            }
            let x0 = r[(j, j)];
            let phase = if x0.norm() == T::zero() {
                Complex::one()
            } else {
                x0.unscale(x0.norm())
            };
            // v = x + phase * |x| e_1 reflects x onto -phase * |x| e_1.
            let alpha = -(phase.scale(norm));
            for i in j..n {
                v[i] = r[(i, j)];
            }
            v[j] -= alpha;
            let vnorm2 = (j..n).map(|i| v[i].norm_sqr()).sum::<T>();
            if vnorm2 > T::zero() {
                let two = T::lit(2.0);
                for c in j..n {
                    let mut dot = Complex::zero();
                    for i in j..n {
                        dot += v[i].conj() * r[(i, c)];
                    }
                    let f = dot.scale(two / vnorm2);
                    for i in j..n {
                        let vi = v[i];
                        r[(i, c)] -= vi * f;
                    }
                }
                // Q <- Q H, H = I - 2 v v^* / |v|^2.
                for row in 0..n {
                    let mut dot = Complex::zero();
                    for i in j..n {
                        dot += q[(row, i)] * v[i];
                    }
                    let f = dot.scale(two / vnorm2);
                    for i in j..n {
                        let vi = v[i];
                        q[(row, i)] -= f * vi.conj();
                    }
                }
            }
            for i in (j + 1)..n {
                r[(i, j)] = Complex::zero();
            }
        }
        // Absorb the diagonal phases of R into Q.
        for j in 0..n {
            let d = r[(j, j)];
            let mag = d.norm();
            if mag == T::zero() {
                return None;
            }
            let ph = d.unscale(mag);
            for row in 0..n {
                q[(row, j)] = q[(row, j)] * ph;
            }
            for c in j..n {
                r[(j, c)] = ph.conj() * r[(j, c)];
            }
            r[(j, j)] = Complex::new(mag, T::zero());
        }
        Some((q, r))
    }

    /// `ln |R[j][j]|` of a Householder QR of `self`, without forming `Q`.
    /// Consumes the contents of `self` as workspace. Returns `false` if a
    /// column is exactly dependent or a value is non-finite.
    pub fn qr_log_diag_in_place(&mut self, out: &mut [T]) -> bool {
        assert!(self.is_square() && out.len() == self.rows, "qr_log_diag expects a square matrix");
        let n = self.rows;
        for j in 0..n {
            let norm2 = (j..n).map(|i| self[(i, j)].norm_sqr()).sum::<T>();
            if norm2 == T::zero() || !norm2.is_finite() {
                return false;
            }
            let norm = norm2.sqrt();
            out[j] = norm.ln();
            if j + 1 == n {
                break;
            }
            let x0 = self[(j, j)];
            let phase = if x0.norm() == T::zero() {
                Complex::one()
            } else {
                x0.unscale(x0.norm())
            };
            // v = x + phase |x| e_1, stored in column j.
            self[(j, j)] = x0 + phase.scale(norm);
            let vnorm2 = (j..n).map(|i| self[(i, j)].norm_sqr()).sum::<T>();
            let two = T::lit(2.0);
            for c in (j + 1)..n {
                let mut dot = Complex::zero();
                for i in j..n {
                    dot += self[(i, j)].conj() * self[(i, c)];
                }
                let f = dot.scale(two / vnorm2);
                for i in j..n {
                    let vi = self[(i, j)];
                    self[(i, c)] -= vi * f;
                }
            }
        }
        true
    }

    /// Logs of the Cholesky diagonal `ln L[j][j]` of a Hermitian positive
    /// definite matrix (only the lower triangle is read).
    pub fn cholesky_log_diag(&self) -> Result<Vec<T>> {
        assert!(self.is_square(), "cholesky expects a square matrix");
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        let mut logs = Vec::with_capacity(n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::FactorizationFailure {
                    pivot: j,
                    detail: format!("non-positive pivot {d}"),
                });
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex::new(ljj, T::zero());
            logs.push(ljj.ln());
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s.unscale(ljj);
            }
        }
        Ok(logs)
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Complex<T> {
        assert!(self.is_square(), "determinant expects a square matrix");
        let n = self.rows;
        if n == 0 {
            return Complex::one();
        }
        let mut a = self.clone();
        let mut det = Complex::<T>::one();
        for j in 0..n {
            let mut p = j;
            let mut best = a[(j, j)].norm();
            for i in (j + 1)..n {
                let v = a[(i, j)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() {
                return Complex::zero();
            }
            if p != j {
                for c in 0..n {
                    let tmp = a[(j, c)];
                    a[(j, c)] = a[(p, c)];
                    a[(p, c)] = tmp;
                }
                det = -det;
            }
            let pivot = a[(j, j)];
            det *= pivot;
            for i in (j + 1)..n {
                let f = a[(i, j)] / pivot;
                if f.is_zero() {
                    continue;
                }
                for c in j..n {
                    let v = a[(j, c)];
                    a[(i, c)] -= f * v;
                }
            }
        }
        det
    }

    /// Singular values in descending order (one-sided Jacobi on the rows).
    ///
    /// For a wide or square matrix this returns `rows` values.
    pub fn singular_values(&self) -> Vec<T> {
        let mut rows: Vec<Vec<Complex<T>>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        row_jacobi_singular_values(&mut rows)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs)
    }
}

fn inner<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    x.iter().zip(y).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
}

fn norm_sqr<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// One-sided (Hestenes) Jacobi: rotates pairs of rows until they are mutually
/// orthogonal; the row norms are then the singular values. Row scaling does
/// not hurt relative accuracy, which is what the graded routine relies on.
pub(crate) fn row_jacobi_singular_values<T: Real>(rows: &mut [Vec<Complex<T>>]) -> Vec<T> {
    let m = rows.len();
    let tol = T::epsilon() * T::from_usize_lossy(m.max(1));
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..m {
            for j in (i + 1)..m {
                let alpha = norm_sqr(&rows[i]);
                let beta = norm_sqr(&rows[j]);
                let gamma = inner(&rows[i], &rows[j]);
                let g = gamma.norm();
                if g == T::zero() || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.unscale(g);
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (head, tail) = rows.split_at_mut(j);
                let x = &mut head[i];
                let y = &mut tail[0];
                for (xk, yk) in x.iter_mut().zip(y.iter_mut()) {
                    let xv = *xk;
                    let yv = *yk;
                    *xk = xv.scale(c) - (phase.conj() * yv).scale(s);
                    *yk = (phase * xv).scale(s) + yv.scale(c);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = rows.iter().map(|r| norm_sqr(r).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Log singular values (descending) of the row-graded matrix
/// `diag(exp(log_scale)) * m`, where the rows of `m` are of moderate size.
///
/// Rows are processed from the largest scale down. Rows whose scales are within
/// a bounded log-gap of each other form a cluster whose singular values are
/// computed together by one-sided Jacobi after rescaling; across a large gap the
/// smaller rows only contribute through their component orthogonal to the span
/// of the larger ones. No quantity of size `exp(log_scale)` is ever formed.
pub fn graded_log_singular_values<T: Real>(log_scale: &[T], m: &Matrix<T>) -> Result<Vec<T>> {
    if log_scale.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: log_scale.len(),
        });
    }
    if m.rows() > m.cols() {
        return Err(Error::InvalidArgument("graded matrix must not be tall".into()));
    }
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable: ties keep input order.
    order.sort_by(|&a, &b| {
        log_scale[b]
            .partial_cmp(&log_scale[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let split = T::lit(GRADED_SPLIT_GAP);
    let mut basis: Vec<Vec<Complex<T>>> = Vec::new();
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && log_scale[order[end - 1]] - log_scale[order[end]] <= split {
            end += 1;
        }
        let top = log_scale[order[start]];
        let mut projected: Vec<Vec<Complex<T>>> = Vec::with_capacity(end - start);
        for &idx in &order[start..end] {
            let mut v = m.row(idx).to_vec();
            project_out(&mut v, &basis);
            projected.push(v);
        }
        let mut cluster: Vec<Vec<Complex<T>>> = order[start..end]
            .iter()
            .zip(&projected)
            .map(|(&idx, v)| {
                let s = (log_scale[idx] - top).exp();
                v.iter().map(|z| z.scale(s)).collect()
            })
            .collect();
        for s in row_jacobi_singular_values(&mut cluster) {
            if !(s > T::zero()) || !s.is_finite() {
                return Err(Error::NumericalRange(format!(
                    "graded singular value {s} in cluster starting at scale {top}"
                )));
            }
            out.push(top + s.ln());
        }
        for v in projected {
            let mut v = v;
            project_out(&mut v, &basis);
            let nrm = norm_sqr(&v).sqrt();
            if nrm > T::zero() {
                basis.push(v.iter().map(|z| z.unscale(nrm)).collect());
            }
        }
        start = end;
    }
    out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Removes the components along an orthonormal set (two passes of classical
/// Gram-Schmidt).
fn project_out<T: Real>(v: &mut [Complex<T>], basis: &[Vec<Complex<T>>]) {
    for _ in 0..2 {
        for b in basis {
            let c = inner(b, v);
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= *bk * c;
            }
        }
    }
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    /// Descending.
    pub values: Vec<T>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<T>>,
}

pub fn symmetric_eigen<T: Real>(a: &[Vec<T>]) -> SymmetricEigen<T> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let diag: T = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (T::lit(2.0) * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap_or(std::cmp::Ordering::Equal));
    SymmetricEigen {
        values: idx.iter().map(|&i| m[i][i]).collect(),
        vectors: idx.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn sample() -> Matrix<f64> {
        Matrix::from_rows(&[
            vec![c(1.0, 0.5), c(-2.0, 0.0), c(0.3, -1.0)],
            vec![c(0.0, 1.0), c(4.0, 0.2), c(1.0, 1.0)],
            vec![c(2.0, 0.0), c(0.5, -0.5), c(-3.0, 0.0)],
        ])
    }

    #[test]
    fn qr_reconstructs_with_positive_diagonal() {
        let a = sample();
        let (q, r) = a.qr().unwrap();
        assert!(q.unitarity_defect() < 1e-14);
        assert!(q.matmul(&r).sub(&a).frobenius_norm() < 1e-13);
        for i in 0..3 {
            assert!(r[(i, i)].re > 0.0 && r[(i, i)].im == 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], Complex::zero());
            }
        }
    }

    #[test]
    fn qr_keeps_real_input_real() {
        let a = Matrix::from_real_rows(&[vec![2.0, -1.0], vec![1.0, 3.0]]);
        let (q, r) = a.qr().unwrap();
        assert!(q.as_slice().iter().chain(r.as_slice()).all(|z| z.im == 0.0));
    }

    #[test]
    fn qr_log_diag_matches_full_qr() {
        let a = sample();
        let (_, r) = a.qr().unwrap();
        let mut w = a.clone();
        let mut out = vec![0.0; 3];
        assert!(w.qr_log_diag_in_place(&mut out));
        for j in 0..3 {
            assert!((out[j] - r[(j, j)].re.ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn qr_rejects_zero_column() {
        let a = Matrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 3.0]]);
        assert!(a.qr().is_none());
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let a = Matrix::from_real_rows(&[vec![2.0f64, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]);
        // 2*(12-1) - 1*(4-0) = 18
        assert!((a.determinant().re - 18.0).abs() < 1e-12);
        let d = sample().determinant();
        let s = sample();
        let mut cof = Complex::zero();
        for j in 0..3 {
            let minor = Matrix::from_fn(2, 2, |r, cc| {
                let cc = if cc >= j { cc + 1 } else { cc };
                s[(r + 1, cc)]
            });
            let m = minor[(0, 0)] * minor[(1, 1)] - minor[(0, 1)] * minor[(1, 0)];
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            cof += s[(0, j)] * m * sign;
        }
        assert!((d - cof).norm() < 1e-12);
    }

    #[test]
    fn cholesky_logs_and_failure() {
        let p = Matrix::from_real_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]);
        let l = p.cholesky_log_diag().unwrap();
        assert!((l[0] - 2f64.ln()).abs() < 1e-15);
        assert!((l[1] - 2f64.ln()).abs() < 1e-15);
        let bad = Matrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(
            bad.cholesky_log_diag(),
            Err(Error::FactorizationFailure { pivot: 1, .. })
        ));
    }

    #[test]
    fn singular_values_of_known_matrices() {
        let a = Matrix::from_real_rows(&[vec![0.0f64, 3.0], vec![1.0, 0.0]]);
        let s = a.singular_values();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
        let a = sample();
        let s = a.singular_values();
        let prod: f64 = s.iter().product();
        assert!((prod - a.determinant().norm()).abs() < 1e-12 * prod);
        let frob: f64 = s.iter().map(|x| x * x).sum();
        assert!((frob - a.frobenius_norm().powi(2)).abs() < 1e-12 * frob);
    }

    #[test]
    fn graded_matches_direct_on_moderate_scales() {
        let m = sample();
        let ls = [1.5, -0.25, 0.75];
        let direct = m.scale_rows(&ls.map(f64::exp)).singular_values();
        let graded = graded_log_singular_values(&ls, &m).unwrap();
        for (d, g) in direct.iter().zip(&graded) {
            assert!((d.ln() - g).abs() < 1e-12, "{d} {g}");
        }
    }

    #[test]
    fn graded_handles_scales_beyond_overflow() {
        // rows (e^800, e^800 t), (0, 1): sigma_1 ~ e^800 sqrt(1+t^2), sigma_2 = 1/sqrt(1+t^2)
        let t = 0.75f64;
        let m = Matrix::from_real_rows(&[vec![1.0, t], vec![0.0, 1.0]]);
        let g = graded_log_singular_values(&[800.0, 0.0], &m).unwrap();
        let h = (1.0 + t * t).sqrt().ln();
        assert!((g[0] - (800.0 + h)).abs() < 1e-12);
        assert!((g[1] + h).abs() < 1e-12);
    }

    #[test]
    fn symmetric_eigen_diagonalizes() {
        let a = vec![vec![2.0f64, 1.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 5.0]];
        let e = symmetric_eigen(&a);
        assert!((e.values[0] - 5.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!((e.values[2] - 1.0).abs() < 1e-14);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i][j] * v[j]).sum();
                assert!((av - lam * v[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_real_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]);
        let (q, r) = a.qr().unwrap();
        assert!(q.matmul(&r).sub(&a).frobenius_norm() < 1e-5);
        assert!((a.determinant().re - 5.0).abs() < 1e-5);
    }
}
