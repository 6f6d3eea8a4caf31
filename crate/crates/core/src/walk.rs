//! Biinvariant random walks `S_k = X_1 X_2 ... X_k` on GL_n(F).
//!
//! The product is kept as `S_k^* = Q diag(e^l) R` with `Q` unitary and `R`
//! unit upper triangular, so no entry of size `e^l` is ever formed.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::WeylChamberPoint;
use crate::haar::Seed;
use crate::linalg::{graded_log_singular_values, Matrix};
use crate::measures::{draw_increment, BiinvariantMeasure};
use crate::scalar::Real;

/// `S^* = Q diag(e^log_diag) R`, `R` unit upper triangular.
#[derive(Clone, Debug)]
pub struct RenormalizedProduct<T> {
    q: Matrix<T>,
    log_diag: Vec<T>,
    r: Matrix<T>,
    steps: usize,
}

impl<T: Real> RenormalizedProduct<T> {
    pub fn identity(n: usize) -> Self {
        RenormalizedProduct {
            q: Matrix::identity(n),
            log_diag: vec![T::zero(); n],
            r: Matrix::identity(n),
            steps: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.log_diag.len()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `S <- S x`.
    pub fn push(&mut self, x: &Matrix<T>) -> Result<()> {
        let n = self.n();
        if x.rows() != n || x.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.rows() });
        }
        self.steps += 1;
        let step = self.steps;
        let blowup = |detail: String| Error::NumericalBlowup { step, detail };
        // (S x)^* = x^* Q D R = Q_M R_M D R.
        let (qm, rm) = x
            .adjoint()
            .matmul(&self.q)
            .qr()
            .ok_or_else(|| blowup("increment times frame is singular".into()))?;
        let old = self.log_diag.clone();
        let mut r = Matrix::zeros(n, n);
        for i in 0..n {
            let rii = rm[(i, i)].re;
            self.log_diag[i] = old[i] + rii.ln();
            r[(i, i)] = Complex::one();
            for j in (i + 1)..n {
                let mut acc = Complex::<T>::zero();
                for l in i..=j {
                    let scale = (old[l] - old[i]).exp() / rii;
                    acc += rm[(i, l)].scale(scale) * self.r[(l, j)];
                }
                r[(i, j)] = acc;
            }
        }
        if !self.log_diag.iter().all(|v| v.is_finite()) || !r.all_finite() || !qm.all_finite() {
            return Err(blowup("non-finite renormalized factor".into()));
        }
        self.q = qm;
        self.r = r;
        Ok(())
    }

    /// `ln sigma_sing(S)`, descending.
    pub fn log_singular_values(&self) -> Result<WeylChamberPoint<T>> {
        let s = graded_log_singular_values(&self.log_diag, &self.r).map_err(|e| Error::NumericalBlowup {
            step: self.steps,
            detail: e.to_string(),
        })?;
        WeylChamberPoint::new(s)
    }

    /// `ln |det S|`.
    pub fn log_abs_det(&self) -> T {
        self.log_diag.iter().copied().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkCheckpoint<T> {
    pub k: usize,
    /// `ln sigma_sing(S_k)`.
    pub log_singular: WeylChamberPoint<T>,
    /// `ln |det S_k|` from the product.
    pub log_abs_det: T,
    /// `sum_{i <= k} ln |det X_i|`, from the sampled chamber points.
    pub increment_log_det_sum: T,
    /// `sum_{i <= k} ln sigma_1(X_i)`.
    pub increment_top_sum: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkTrajectory<T> {
    pub k_max: usize,
    pub checkpoints: Vec<WalkCheckpoint<T>>,
}

fn check_request(k_max: usize, checkpoints: &[usize]) -> Result<()> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
    }
    if checkpoints.iter().any(|&k| k == 0 || k > k_max) {
        return Err(Error::InvalidArgument(format!("checkpoints must lie in 1..={k_max}")));
    }
    Ok(())
}

/// Multiplies `k_max` draws from `nu` on the right, all from `seed.rng()`.
pub fn run_walk<T: Real>(
    nu: &BiinvariantMeasure<T>,
    k_max: usize,
    checkpoints: &[usize],
    seed: Seed,
) -> Result<WalkTrajectory<T>> {
    check_request(k_max, checkpoints)?;
    let mut rng = seed.rng();
    let mut s = RenormalizedProduct::identity(nu.n);
    let half = T::lit(0.5);
    let (mut det_sum, mut top_sum) = (T::zero(), T::zero());
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for k in 1..=k_max {
        let (x, chamber) = draw_increment(nu, &mut rng)?;
        det_sum += chamber.sum() * half;
        top_sum += chamber.coords()[0] * half;
        s.push(&x)?;
        if next.peek() == Some(&&k) {
            next.next();
            out.push(WalkCheckpoint {
                k,
                log_singular: s.log_singular_values()?,
                log_abs_det: s.log_abs_det(),
                increment_log_det_sum: det_sum,
                increment_top_sum: top_sum,
            });
        }
    }
    Ok(WalkTrajectory {
        k_max,
        checkpoints: out,
    })
}

/// Same draws as [`run_walk`], multiplied out directly. Only usable while the
/// entries of `S_k` stay representable.
pub fn run_walk_direct<T: Real>(
    nu: &BiinvariantMeasure<T>,
    k_max: usize,
    checkpoints: &[usize],
    seed: Seed,
) -> Result<WalkTrajectory<T>> {
    check_request(k_max, checkpoints)?;
    let mut rng = seed.rng();
    let mut s = Matrix::<T>::identity(nu.n);
    let half = T::lit(0.5);
    let (mut det_sum, mut top_sum) = (T::zero(), T::zero());
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for k in 1..=k_max {
        let (x, chamber) = draw_increment(nu, &mut rng)?;
        det_sum += chamber.sum() * half;
        top_sum += chamber.coords()[0] * half;
        s = s.matmul(&x);
        if !s.all_finite() {
            return Err(Error::NumericalBlowup {
                step: k,
                detail: "direct product overflowed".into(),
            });
        }
        if next.peek() == Some(&&k) {
            next.next();
            let sv = s.singular_values();
            if sv.iter().any(|v| !(*v > T::zero())) {
                return Err(Error::NumericalBlowup {
                    step: k,
                    detail: "direct product lost rank".into(),
                });
            }
            out.push(WalkCheckpoint {
                k,
                log_singular: WeylChamberPoint::from_unsorted(sv.iter().map(|v| v.ln()).collect())?,
                log_abs_det: s.determinant().norm().ln(),
                increment_log_det_sum: det_sum,
                increment_top_sum: top_sum,
            });
        }
    }
    Ok(WalkTrajectory {
        k_max,
        checkpoints: out,
    })
}
