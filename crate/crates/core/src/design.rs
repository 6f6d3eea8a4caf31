//! Monte-Carlo designs for integrals of the form `E_x E_k h(x, f(x, k))`,
//! where `x` is a chamber point, `k` is Haar distributed and `f` is the
//! log-minor profile.
//!
//! Columns are Haar draws. Each column `m` contributes
//! `Z_m = sum_j w_j h(x_j, k_m)` over the rows of the design, and the estimate
//! is the mean of the `Z_m`. All integrands of one call see the same draws.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldTag;
use crate::haar::{sample_haar, McPlan};
use crate::linalg::Matrix;
use crate::mc::{RealEstimate, VecWelford};
use crate::scalar::Real;

/// Offset of the stream indices used for outer chamber draws of a paired design.
const PAIRED_STREAM_BASE: u64 = 1 << 40;

/// Profile of one `(x, k)` evaluation.
pub(crate) struct ProfilePoint<'a, T> {
    pub chamber: &'a [T],
    /// `ln Delta_r`, r = 1..n.
    pub cumulative: &'a [T],
    /// `f_r = ln Delta_r - ln Delta_{r-1}`.
    pub f: &'a [T],
}

pub(crate) type ChamberSampler<'a, T> = dyn Fn(&mut ChaCha8Rng) -> Result<Vec<T>> + Sync + 'a;

pub(crate) enum Outer<'a, T> {
    /// Weighted atoms, integrated exactly.
    Atoms(&'a [(T, Vec<T>)]),
    /// Sampled chamber points, each crossed with every Haar draw.
    Sampled(&'a [Vec<T>]),
    /// One fresh chamber draw per Haar draw.
    Paired(&'a ChamberSampler<'a, T>),
}

pub(crate) struct DesignOutput<T> {
    columns: VecWelford<T>,
    rows: Option<VecWelford<T>>,
}

impl<T: Real> DesignOutput<T> {
    pub fn inner_samples(&self) -> usize {
        self.columns.count()
    }

    pub fn outer_samples(&self) -> usize {
        self.rows.as_ref().map_or(0, VecWelford::count)
    }

    pub fn mean(&self, i: usize) -> T {
        self.columns.component(i).mean()
    }

    pub fn inner_se(&self, i: usize) -> T {
        self.columns.component(i).std_error()
    }

    pub fn outer_se(&self, i: usize) -> T {
        match &self.rows {
            Some(r) => r.component(i).std_error(),
            None => T::zero(),
        }
    }

    pub fn se(&self, i: usize) -> T {
        let a = self.inner_se(i);
        let b = self.outer_se(i);
        (a * a + b * b).sqrt()
    }

    pub fn estimate(&self, i: usize) -> RealEstimate<T> {
        RealEstimate {
            mean: self.mean(i),
            std_error: self.se(i),
            samples: self.inner_samples(),
        }
    }
}

/// Cumulative log-minors `ln Delta_r(k^* diag(e^x) k)` for a descending `x`.
///
/// Works on `B = diag(e^{(x - x_1)/2}) k`, whose Gram matrix is
/// `e^{-x_1} k^* diag(e^x) k`; the leading minors of a Gram matrix are the
/// squared products of the QR diagonal of `B`. The last entry is the exact
/// value `sum x`, and a scalar `x` short-circuits to `r * x_1`.
pub(crate) fn cumulative_log_minors<T: Real>(
    x: &[T],
    k: &Matrix<T>,
    work: &mut Matrix<T>,
    diag: &mut [T],
    out: &mut [T],
) -> Result<()> {
    let n = x.len();
    let total: T = x.iter().copied().sum();
    if x.iter().all(|&v| v == x[0]) {
        for r in 0..n - 1 {
            out[r] = T::from_usize_lossy(r + 1) * x[0];
        }
        out[n - 1] = total;
        return Ok(());
    }
    let half = T::lit(0.5);
    for i in 0..n {
        let s = ((x[i] - x[0]) * half).exp();
        if !(s >= T::min_positive_value()) {
            return Err(Error::NumericalRange(format!(
                "chamber spread {} exceeds the representable range",
                (x[0] - x[i]).to_f64_lossy()
            )));
        }
        for j in 0..n {
            work[(i, j)] = k[(i, j)].scale(s);
        }
    }
    if !work.qr_log_diag_in_place(diag) {
        return Err(Error::FactorizationFailure {
            pivot: 0,
            detail: "rank deficient scaled rotation".into(),
        });
    }
    let two = T::lit(2.0);
    let mut acc = T::zero();
    for r in 0..n - 1 {
        acc += two * diag[r];
        out[r] = T::from_usize_lossy(r + 1) * x[0] + acc;
    }
    out[n - 1] = total;
    Ok(())
}

/// Per-thread scratch for profile evaluation.
struct Scratch<T> {
    work: Matrix<T>,
    diag: Vec<T>,
    cumulative: Vec<T>,
    f: Vec<T>,
    h: Vec<T>,
    z: Vec<T>,
}

impl<T: Real> Scratch<T> {
    fn new(n: usize, dim: usize) -> Self {
        Scratch {
            work: Matrix::zeros(n, n),
            diag: vec![T::zero(); n],
            cumulative: vec![T::zero(); n],
            f: vec![T::zero(); n],
            h: vec![T::zero(); dim],
            z: vec![T::zero(); dim],
        }
    }

    fn eval<F>(&mut self, x: &[T], k: &Matrix<T>, sample: usize, integrand: &F) -> Result<()>
    where
        F: Fn(&ProfilePoint<T>, &mut [T]),
    {
        cumulative_log_minors(x, k, &mut self.work, &mut self.diag, &mut self.cumulative)?;
        let mut prev = T::zero();
        for r in 0..x.len() {
            self.f[r] = self.cumulative[r] - prev;
            prev = self.cumulative[r];
        }
        let p = ProfilePoint {
            chamber: x,
            cumulative: &self.cumulative,
            f: &self.f,
        };
        integrand(&p, &mut self.h);
        if let Some(pos) = self.h.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand {
                sample,
                detail: format!("component {pos} at chamber point {x:?}"),
            });
        }
        Ok(())
    }
}

struct Partial<T> {
    columns: VecWelford<T>,
    row_sums: Vec<Vec<T>>,
}

/// Runs the design. `plan.samples` is the number of Haar columns; partition `p`
/// draws its rotations from `plan.seed.derive(p)`.
pub(crate) fn evaluate<T, F>(
    field: FieldTag,
    n: usize,
    plan: &McPlan,
    outer: Outer<'_, T>,
    dim: usize,
    integrand: F,
) -> Result<DesignOutput<T>>
where
    T: Real,
    F: Fn(&ProfilePoint<T>, &mut [T]) + Sync,
{
    if plan.samples < 2 {
        return Err(Error::InvalidArgument("at least 2 Haar samples are required".into()));
    }
    let rows_len = match &outer {
        Outer::Atoms(a) => a.len(),
        Outer::Sampled(s) => s.len(),
        Outer::Paired(_) => 0,
    };
    let check = |x: &[T]| -> Result<()> {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        Ok(())
    };
    match &outer {
        Outer::Atoms(a) => a.iter().try_for_each(|(_, x)| check(x))?,
        Outer::Sampled(s) => {
            if s.len() < 2 {
                return Err(Error::InvalidArgument("at least 2 outer samples are required".into()));
            }
            s.iter().try_for_each(|x| check(x))?
        }
        Outer::Paired(_) => {}
    }
    let inv_rows = if rows_len > 0 {
        T::one() / T::from_usize_lossy(rows_len)
    } else {
        T::one()
    };

    let partials: Vec<Result<Partial<T>>> = plan
        .ranges()
        .into_par_iter()
        .enumerate()
        .map(|(p, range)| {
            let mut krng = plan.seed.derive(p as u64).rng();
            let mut xrng = plan.seed.derive(PAIRED_STREAM_BASE + p as u64).rng();
            let mut s = Scratch::new(n, dim);
            let mut columns = VecWelford::new(dim);
            let mut row_sums = match &outer {
                Outer::Sampled(rows) => vec![vec![T::zero(); dim]; rows.len()],
                _ => Vec::new(),
            };
            for m in range {
                let k = sample_haar::<T, _>(field, n, &mut krng);
                let k = k.matrix();
                s.z.iter_mut().for_each(|v| *v = T::zero());
                match &outer {
                    Outer::Atoms(atoms) => {
                        for (w, x) in atoms.iter() {
                            s.eval(x, k, m, &integrand)?;
                            for (z, &h) in s.z.iter_mut().zip(&s.h) {
                                *z += *w * h;
                            }
                        }
                    }
                    Outer::Sampled(rows) => {
                        for (x, sums) in rows.iter().zip(row_sums.iter_mut()) {
                            s.eval(x, k, m, &integrand)?;
                            for ((z, acc), &h) in s.z.iter_mut().zip(sums.iter_mut()).zip(&s.h) {
                                *z += h;
                                *acc += h;
                            }
                        }
                        s.z.iter_mut().for_each(|z| *z *= inv_rows);
                    }
                    Outer::Paired(sampler) => {
                        let x = sampler(&mut xrng)?;
                        check(&x)?;
                        s.eval(&x, k, m, &integrand)?;
                        s.z.copy_from_slice(&s.h);
                    }
                }
                columns.push(&s.z);
            }
            Ok(Partial { columns, row_sums })
        })
        .collect();

    let mut columns = VecWelford::new(dim);
    let mut row_sums: Vec<Vec<T>> = match &outer {
        Outer::Sampled(rows) => vec![vec![T::zero(); dim]; rows.len()],
        _ => Vec::new(),
    };
    for part in partials {
        let part = part?;
        columns.merge(&part.columns);
        for (acc, s) in row_sums.iter_mut().zip(&part.row_sums) {
            for (a, &v) in acc.iter_mut().zip(s) {
                *a += v;
            }
        }
    }
    let rows = match &outer {
        Outer::Sampled(_) => {
            let inv = T::one() / T::from_usize_lossy(plan.samples);
            let mut w = VecWelford::new(dim);
            for sums in &row_sums {
                let y: Vec<T> = sums.iter().map(|&v| v * inv).collect();
                w.push(&y);
            }
            Some(w)
        }
        _ => None,
    };
    Ok(DesignOutput { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::Seed;

    #[test]
    fn cumulative_minors_match_cholesky_route() {
        let mut rng = Seed::new(11).rng();
        for field in FieldTag::ALL {
            let k = sample_haar::<f64, _>(field, 3, &mut rng);
            let x = [1.3, 0.2, -0.7];
            let mut work = Matrix::zeros(3, 3);
            let mut diag = vec![0.0; 3];
            let mut out = vec![0.0; 3];
            cumulative_log_minors(&x, k.matrix(), &mut work, &mut diag, &mut out).unwrap();
            let d = Matrix::diag_real(&x.map(f64::exp));
            let p = k.matrix().adjoint().matmul(&d).matmul(k.matrix());
            let chol = p.cholesky_log_diag().unwrap();
            let mut acc = 0.0;
            for r in 0..3 {
                acc += 2.0 * chol[r];
                assert!((acc - out[r]).abs() < 1e-12, "{field} r={r}: {acc} vs {}", out[r]);
            }
        }
    }

    #[test]
    fn cumulative_minors_survive_large_spread() {
        // diag(e^40, 1) in Cholesky form loses the small minor entirely.
        let mut rng = Seed::new(2).rng();
        let k = sample_haar::<f64, _>(FieldTag::Real, 2, &mut rng);
        let x = [40.0, 0.0];
        let mut work = Matrix::zeros(2, 2);
        let mut diag = vec![0.0; 2];
        let mut out = vec![0.0; 2];
        cumulative_log_minors(&x, k.matrix(), &mut work, &mut diag, &mut out).unwrap();
        let c = k.matrix()[(0, 0)].re;
        let s = k.matrix()[(1, 0)].re;
        let expected = (40f64.exp() * c * c + s * s).ln();
        assert!((out[0] - expected).abs() < 1e-12);
        assert_eq!(out[1], 40.0);
    }

    #[test]
    fn paired_and_atom_designs_agree_on_a_point_mass() {
        let plan = McPlan::new(4000, Seed::new(1)).with_partitions(3);
        let x = vec![1.0, -0.5];
        let atoms = [(1.0, x.clone())];
        let a = evaluate(FieldTag::Real, 2, &plan, Outer::Atoms(&atoms), 2, |p, h| {
            h.copy_from_slice(p.f);
        })
        .unwrap();
        let sampler = move |_: &mut ChaCha8Rng| Ok(x.clone());
        let b = evaluate(FieldTag::Real, 2, &plan, Outer::Paired(&sampler), 2, |p, h| {
            h.copy_from_slice(p.f);
        })
        .unwrap();
        assert_eq!(a.mean(0), b.mean(0));
        assert_eq!(a.se(1), b.se(1));
    }
}
