//! Matrix-group domain types: elements of GL_n, positive definite matrices,
//! unitaries of U_n, and Weyl chamber points.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldTag;
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Smallest singular value accepted for an invertible group element.
pub fn det_floor<T: Real>() -> T {
    T::lit(1e-150).max(T::min_positive_value())
}

/// Default tolerance on `||u^* u - I||_F`.
pub fn unitary_tol<T: Real>(n: usize) -> T {
    let base = if std::mem::size_of::<T>() >= 8 { 1e-12 } else { 1e-4 };
    T::lit(base) * T::from_usize_lossy(n)
}

fn check_field<T: Real>(field: FieldTag, m: &Matrix<T>) -> Result<()> {
    if field == FieldTag::Real && m.as_slice().iter().any(|z| z.im != T::zero()) {
        return Err(Error::InvalidArgument("real field with complex entries".into()));
    }
    Ok(())
}

/// An invertible n x n matrix over the base field.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<T> {
    field: FieldTag,
    matrix: Matrix<T>,
}

impl<T: Real> GroupElement<T> {
    pub fn new(field: FieldTag, matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::InvalidArgument("group element must be a non-empty square matrix".into()));
        }
        if !matrix.all_finite() {
            return Err(Error::InvalidArgument("group element has non-finite entries".into()));
        }
        check_field(field, &matrix)?;
        let smallest = *matrix.singular_values().last().expect("non-empty");
        if !(smallest > det_floor::<T>()) {
            return Err(Error::SingularInput {
                smallest: smallest.to_f64_lossy(),
                floor: det_floor::<T>().to_f64_lossy(),
            });
        }
        Ok(GroupElement { field, matrix })
    }

    pub fn identity(field: FieldTag, n: usize) -> Self {
        GroupElement {
            field,
            matrix: Matrix::identity(n),
        }
    }

    /// `diag(exp(x / 2))`, the standard representative with `g g^* = diag(exp(x))`.
    pub fn from_chamber(field: FieldTag, x: &WeylChamberPoint<T>) -> Self {
        let half: Vec<T> = x.coords().iter().map(|&v| (v / T::lit(2.0)).exp()).collect();
        GroupElement {
            field,
            matrix: Matrix::diag_real(&half),
        }
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// `ln |det g|^2 = ln det(g g^*)`.
    pub fn log_det_gram(&self) -> T {
        T::lit(2.0) * self.matrix.determinant().norm().ln()
    }
}

/// Hermitian (symmetric if real) positive definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PosDefMatrix<T> {
    field: FieldTag,
    matrix: Matrix<T>,
}

impl<T: Real> PosDefMatrix<T> {
    pub fn new(field: FieldTag, matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("positive definite matrix must be square".into()));
        }
        check_field(field, &matrix)?;
        if !matrix.is_hermitian() {
            return Err(Error::InvalidArgument("matrix is not Hermitian as stored".into()));
        }
        matrix.cholesky_log_diag()?;
        Ok(PosDefMatrix { field, matrix })
    }

    /// `g g^*`, symmetrized so that the stored entries are exactly Hermitian.
    pub fn gram_of(g: &GroupElement<T>) -> Result<Self> {
        let m = g.matrix().matmul(&g.matrix().adjoint());
        let n = m.rows();
        let sym = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(m[(i, i)].re, T::zero())
            } else if i > j {
                m[(i, j)]
            } else {
                m[(j, i)].conj()
            }
        });
        Self::new(g.field(), sym)
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }
}

/// Element of U_n(F); for the real field this is the full orthogonal group O(n).
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryElement<T> {
    field: FieldTag,
    matrix: Matrix<T>,
}

impl<T: Real> UnitaryElement<T> {
    pub fn new(field: FieldTag, matrix: Matrix<T>) -> Result<Self> {
        let tol = unitary_tol::<T>(matrix.rows());
        Self::with_tolerance(field, matrix, tol)
    }

    pub fn with_tolerance(field: FieldTag, matrix: Matrix<T>, tol: T) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("unitary must be square".into()));
        }
        check_field(field, &matrix)?;
        let defect = matrix.unitarity_defect();
        if !(defect <= tol) {
            return Err(Error::InvalidArgument(format!(
                "unitarity defect {defect} exceeds tolerance {tol}"
            )));
        }
        Ok(UnitaryElement { field, matrix })
    }

    pub fn identity(field: FieldTag, n: usize) -> Self {
        UnitaryElement {
            field,
            matrix: Matrix::identity(n),
        }
    }

    /// Skips the unitarity check. Used to build negative controls for the
    /// lemma verification suite.
    pub fn from_matrix_unchecked(field: FieldTag, matrix: Matrix<T>) -> Self {
        UnitaryElement { field, matrix }
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }
}

/// Point of the Weyl chamber: a descending real vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeylChamberPoint<T> {
    x: Vec<T>,
}

impl<T: Real> WeylChamberPoint<T> {
    pub fn new(x: Vec<T>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidArgument("empty chamber point".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("chamber point has non-finite entries".into()));
        }
        if x.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("chamber point is not in descending order".into()));
        }
        Ok(WeylChamberPoint { x })
    }

    /// Sorts descending (stable: exact ties keep input order).
    pub fn from_unsorted(mut x: Vec<T>) -> Result<Self> {
        x.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(x)
    }

    pub fn zeros(n: usize) -> Self {
        WeylChamberPoint { x: vec![T::zero(); n] }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.x
    }

    pub fn into_coords(self) -> Vec<T> {
        self.x
    }

    pub fn sum(&self) -> T {
        self.x.iter().copied().sum()
    }

    /// All coordinates equal, i.e. the double coset of a scalar matrix.
    pub fn is_scalar(&self) -> bool {
        self.x.iter().all(|&v| v == self.x[0])
    }

    pub fn shifted(&self, c: T) -> Self {
        WeylChamberPoint {
            x: self.x.iter().map(|&v| v + c).collect(),
        }
    }
}

/// `(ln Delta_1(p), ..., ln Delta_n(p))` from the Cholesky factor `p = L L^*`:
/// `ln Delta_r = 2 * sum_{j <= r} ln L[j][j]`.
pub fn principal_minor_logs<T: Real>(p: &PosDefMatrix<T>) -> Result<Vec<T>> {
    let logs = p.matrix().cholesky_log_diag()?;
    let two = T::lit(2.0);
    let mut acc = T::zero();
    Ok(logs
        .into_iter()
        .map(|l| {
            acc += two * l;
            acc
        })
        .collect())
}

/// `ln sigma_sing(g)`: logs of the singular values of `g`, descending.
pub fn singular_log_spectrum<T: Real>(g: &GroupElement<T>) -> Result<WeylChamberPoint<T>> {
    let sv = g.matrix().singular_values();
    let floor = det_floor::<T>();
    if let Some(&smallest) = sv.last() {
        if !(smallest > floor) {
            return Err(Error::SingularInput {
                smallest: smallest.to_f64_lossy(),
                floor: floor.to_f64_lossy(),
            });
        }
    }
    WeylChamberPoint::from_unsorted(sv.into_iter().map(|s| s.ln()).collect())
}

/// Chamber coordinates of the double coset `K g K`: `ln` of the eigenvalues of
/// `g g^*`, i.e. `2 ln sigma_sing(g)`.
pub fn chamber_coordinates<T: Real>(g: &GroupElement<T>) -> Result<WeylChamberPoint<T>> {
    let s = singular_log_spectrum(g)?;
    Ok(WeylChamberPoint {
        x: s.x.iter().map(|&v| T::lit(2.0) * v).collect(),
    })
}
