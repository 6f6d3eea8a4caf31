//! Spherical functions `phi_{i rho + lambda}` and moment functions as Haar
//! integrals over log-minor profiles.
//!
//! For `g` with `g g^* = u diag(e^x) u^*`, the profile of `k` is
//! `f_r(k) = ln Delta_r(k^* g g^* k) - ln Delta_{r-1}(k^* g g^* k)`. Every
//! quantity here is biinvariant, so a group element enters only through its
//! chamber coordinates `x = 2 ln sigma_sing(g)` (see [`DoubleCoset`]).

use num_complex::Complex;
use serde::Serialize;

use crate::design::{evaluate, DesignOutput, Outer, ProfilePoint};
use crate::error::{Error, Result};
use crate::field::FieldTag;
use crate::group::{chamber_coordinates, principal_minor_logs, GroupElement, PosDefMatrix, UnitaryElement, WeylChamberPoint};
use crate::haar::McPlan;
use crate::linalg::{symmetric_eigen, Matrix, SymmetricEigen};
use crate::mc::{ComplexEstimate, McEstimate, RealEstimate};
use crate::scalar::Real;

/// Relative eigenvalue threshold for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoVector<T> {
    pub field: FieldTag,
    pub rho: Vec<T>,
}

/// Half sum of positive roots: `rho_l = (d/2)(n + 1 - 2l)`.
pub fn rho<T: Real>(field: FieldTag, n: usize) -> RhoVector<T> {
    let half_d = T::from_usize_lossy(field.d()) * T::lit(0.5);
    let rho = (1..=n)
        .map(|l| half_d * (T::from_usize_lossy(n + 1) - T::from_usize_lossy(2 * l)))
        .collect();
    RhoVector { field, rho }
}

/// Real spectral parameter `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SpectralParameter<T> {
    lambda: Vec<T>,
}

impl<T: Real> SpectralParameter<T> {
    pub fn new(lambda: Vec<T>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidArgument("empty spectral parameter".into()));
        }
        if lambda.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("spectral parameter has non-finite entries".into()));
        }
        Ok(SpectralParameter { lambda })
    }

    pub fn zeros(n: usize) -> Self {
        SpectralParameter { lambda: vec![T::zero(); n] }
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn values(&self) -> &[T] {
        &self.lambda
    }

    pub fn neg(&self) -> Self {
        SpectralParameter {
            lambda: self.lambda.iter().map(|&v| -v).collect(),
        }
    }

    pub fn norm(&self) -> T {
        self.lambda.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.iter().all(|&v| v == T::zero())
    }

    /// Coefficients `lambda_r - lambda_{r+1}` of `ln Delta_r`, with
    /// `lambda_{n+1} = 0`.
    pub fn minor_exponents(&self) -> Vec<T> {
        let n = self.lambda.len();
        (0..n)
            .map(|r| self.lambda[r] - if r + 1 < n { self.lambda[r + 1] } else { T::zero() })
            .collect()
    }

    #[inline]
    pub(crate) fn dot(&self, f: &[T]) -> T {
        self.lambda.iter().zip(f).map(|(&a, &b)| a * b).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct MultiIndex {
    l: Vec<u32>,
}

impl MultiIndex {
    pub fn new(l: Vec<u32>) -> Self {
        MultiIndex { l }
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex { l: vec![0; n] }
    }

    /// `e_r` (0-based `r`).
    pub fn unit(n: usize, r: usize) -> Self {
        let mut l = vec![0; n];
        l[r] = 1;
        MultiIndex { l }
    }

    pub fn n(&self) -> usize {
        self.l.len()
    }

    pub fn order(&self) -> u32 {
        self.l.iter().sum()
    }

    pub fn values(&self) -> &[u32] {
        &self.l
    }

    fn product<T: Real>(&self, f: &[T], absolute: bool) -> T {
        let mut p = T::one();
        for (&e, &v) in self.l.iter().zip(f) {
            if e > 0 {
                let v = if absolute { v.abs() } else { v };
                p *= v.powi(e as i32);
            }
        }
        p
    }
}

/// Double coset `K g K`, represented by its chamber coordinates
/// `x = ln eig(g g^*)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleCoset<T> {
    pub field: FieldTag,
    pub chamber: WeylChamberPoint<T>,
}

impl<T: Real> DoubleCoset<T> {
    pub fn new(field: FieldTag, chamber: WeylChamberPoint<T>) -> Self {
        DoubleCoset { field, chamber }
    }

    pub fn from_group(g: &GroupElement<T>) -> Result<Self> {
        Ok(DoubleCoset {
            field: g.field(),
            chamber: chamber_coordinates(g)?,
        })
    }

    pub fn n(&self) -> usize {
        self.chamber.n()
    }

    /// `ln det(g g^*)`.
    pub fn log_det_gram(&self) -> T {
        self.chamber.sum()
    }

    /// `2 ln sigma_sing(g)`, i.e. the chamber coordinates themselves.
    pub fn two_log_singular(&self) -> &[T] {
        self.chamber.coords()
    }

    fn atoms(&self) -> [(T, Vec<T>); 1] {
        [(T::one(), self.chamber.coords().to_vec())]
    }
}

fn profile_from_cumulative<T: Real>(cumulative: &[T]) -> Vec<T> {
    let mut prev = T::zero();
    cumulative
        .iter()
        .map(|&c| {
            let f = c - prev;
            prev = c;
            f
        })
        .collect()
}

/// `f(k)` computed literally: Cholesky of `k^* g g^* k`.
pub fn log_minor_profile<T: Real>(g: &GroupElement<T>, k: &UnitaryElement<T>) -> Result<Vec<T>> {
    if g.n() != k.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), got: k.n() });
    }
    let gk = g.matrix().adjoint().matmul(k.matrix());
    let p = gk.adjoint().matmul(&gk);
    let n = p.rows();
    // Force exact Hermitian storage before validating.
    let p = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::new(p[(i, i)].re, T::zero())
        } else if i > j {
            p[(i, j)]
        } else {
            p[(j, i)].conj()
        }
    });
    let p = PosDefMatrix::new(g.field(), p)?;
    Ok(profile_from_cumulative(&principal_minor_logs(&p)?))
}

/// Cumulative log-minors `ln Delta_r(k^* diag(e^x) k)`, r = 1..n, computed
/// without forming `diag(e^x)`.
pub fn chamber_log_minors<T: Real>(x: &WeylChamberPoint<T>, k: &UnitaryElement<T>) -> Result<Vec<T>> {
    let n = x.n();
    if k.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: k.n() });
    }
    let mut work = Matrix::zeros(n, n);
    let mut diag = vec![T::zero(); n];
    let mut out = vec![T::zero(); n];
    crate::design::cumulative_log_minors(x.coords(), k.matrix(), &mut work, &mut diag, &mut out)?;
    Ok(out)
}

/// Profile `f(k)` for the coset with chamber coordinates `x`.
pub fn chamber_log_minor_profile<T: Real>(x: &WeylChamberPoint<T>, k: &UnitaryElement<T>) -> Result<Vec<T>> {
    Ok(profile_from_cumulative(&chamber_log_minors(x, k)?))
}

/// `(cos a, sin a)` with exact symmetry under `a -> -a`.
#[inline]
pub(crate) fn cis<T: Real>(a: T) -> (T, T) {
    let (s, c) = a.abs().sin_cos();
    if a < T::zero() {
        (c, -s)
    } else {
        (c, s)
    }
}

/// `exp(i a) - 1` without cancellation: `(-2 sin^2(a/2), sin a)`.
#[inline]
pub(crate) fn expm1i<T: Real>(a: T) -> (T, T) {
    let h = (a * T::lit(0.5)).sin();
    let (_, s) = cis(a);
    (-T::lit(2.0) * h * h, s)
}

fn check_dim<T: Real>(c: &DoubleCoset<T>, n: usize) -> Result<()> {
    if c.n() != n {
        return Err(Error::DimensionMismatch { expected: c.n(), got: n });
    }
    Ok(())
}

pub(crate) fn complex_estimate<T: Real>(out: &DesignOutput<T>, re: usize) -> ComplexEstimate<T> {
    let a = out.se(re);
    let b = out.se(re + 1);
    McEstimate {
        mean: Complex::new(out.mean(re), out.mean(re + 1)),
        std_error: (a * a + b * b).sqrt(),
        samples: out.inner_samples(),
    }
}

/// Linear combination `sum_i w_i exp(i lambda_i . f)` over one set of draws.
pub(crate) fn stencil_on<T: Real>(
    field: FieldTag,
    n: usize,
    plan: &McPlan,
    outer: Outer<'_, T>,
    stencil: &[(T, SpectralParameter<T>)],
) -> Result<ComplexEstimate<T>> {
    if let Some((_, l)) = stencil.iter().find(|(_, l)| l.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: l.n() });
    }
    let out = evaluate(field, n, plan, outer, 2, |p: &ProfilePoint<T>, h: &mut [T]| {
        let (mut re, mut im) = (T::zero(), T::zero());
        for (w, l) in stencil {
            let (c, s) = cis(l.dot(p.f));
            re += *w * c;
            im += *w * s;
        }
        h[0] = re;
        h[1] = im;
    })?;
    Ok(complex_estimate(&out, 0))
}

/// `phi_{i rho + lambda}(g) = E_k exp(i lambda . f(k))`.
pub fn spherical_fn<T: Real>(c: &DoubleCoset<T>, lambda: &SpectralParameter<T>, plan: &McPlan) -> Result<ComplexEstimate<T>> {
    Ok(spherical_fn_grid(c, std::slice::from_ref(lambda), plan)?.remove(0))
}

/// [`spherical_fn`] on a grid of parameters, all from the same Haar draws.
pub fn spherical_fn_grid<T: Real>(
    c: &DoubleCoset<T>,
    grid: &[SpectralParameter<T>],
    plan: &McPlan,
) -> Result<Vec<ComplexEstimate<T>>> {
    let n = c.n();
    for l in grid {
        check_dim(c, l.n())?;
    }
    let atoms = c.atoms();
    let out = evaluate(c.field, n, plan, Outer::Atoms(&atoms), 2 * grid.len(), |p, h| {
        for (i, l) in grid.iter().enumerate() {
            let (re, im) = cis(l.dot(p.f));
            h[2 * i] = re;
            h[2 * i + 1] = im;
        }
    })?;
    Ok((0..grid.len()).map(|i| complex_estimate(&out, 2 * i)).collect())
}

/// `sum_i w_i phi_{i rho + lambda_i}(g)` over common draws.
pub fn spherical_fn_stencil<T: Real>(
    c: &DoubleCoset<T>,
    stencil: &[(T, SpectralParameter<T>)],
    plan: &McPlan,
) -> Result<ComplexEstimate<T>> {
    let atoms = c.atoms();
    stencil_on(c.field, c.n(), plan, Outer::Atoms(&atoms), stencil)
}

/// Tensor-product central difference stencil for `d^l / d lambda^l` at
/// `lambda0` with step `h`; supports `l_r <= 2` in every coordinate.
pub fn central_difference_stencil<T: Real>(
    lambda0: &SpectralParameter<T>,
    l: &MultiIndex,
    h: T,
) -> Result<Vec<(T, SpectralParameter<T>)>> {
    if l.n() != lambda0.n() {
        return Err(Error::DimensionMismatch { expected: lambda0.n(), got: l.n() });
    }
    if !(h > T::zero()) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let mut points: Vec<(T, Vec<T>)> = vec![(T::one(), lambda0.values().to_vec())];
    for (r, &e) in l.values().iter().enumerate() {
        let one_d: Vec<(T, T)> = match e {
            0 => continue,
            1 => {
                let w = T::one() / (T::lit(2.0) * h);
                vec![(w, h), (-w, -h)]
            }
            2 => {
                let w = T::one() / (h * h);
                vec![(w, h), (-T::lit(2.0) * w, T::zero()), (w, -h)]
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "central differences support orders up to 2 per coordinate".into(),
                ))
            }
        };
        points = points
            .iter()
            .flat_map(|(w, p)| {
                one_d.iter().map(move |&(w1, d)| {
                    let mut q = p.clone();
                    q[r] += d;
                    (*w * w1, q)
                })
            })
            .collect();
    }
    points
        .into_iter()
        .map(|(w, p)| Ok((w, SpectralParameter::new(p)?)))
        .collect()
}

fn moment_impl<T: Real>(c: &DoubleCoset<T>, l: &MultiIndex, plan: &McPlan, absolute: bool) -> Result<RealEstimate<T>> {
    check_dim(c, l.n())?;
    let atoms = c.atoms();
    let out = evaluate(c.field, c.n(), plan, Outer::Atoms(&atoms), 1, |p, h| {
        h[0] = l.product(p.f, absolute);
    })?;
    Ok(out.estimate(0))
}

/// `m_l(g) = E_k prod_r f_r(k)^{l_r}`.
pub fn moment_fn<T: Real>(c: &DoubleCoset<T>, l: &MultiIndex, plan: &McPlan) -> Result<RealEstimate<T>> {
    moment_impl(c, l, plan, false)
}

/// `E_k prod_r |f_r(k)|^{l_r}`, the bound in the derivative estimate.
pub fn abs_moment_fn<T: Real>(c: &DoubleCoset<T>, l: &MultiIndex, plan: &McPlan) -> Result<RealEstimate<T>> {
    moment_impl(c, l, plan, true)
}

/// First and second moment functions with their covariance, all from one set
/// of draws.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSummary<T> {
    pub n: usize,
    /// Haar draws.
    pub inner_samples: usize,
    /// Outer chamber draws (0 when the chamber law was integrated exactly).
    pub outer_samples: usize,
    pub m1: Vec<T>,
    pub m1_se: Vec<T>,
    pub m1_se_inner: Vec<T>,
    pub m1_se_outer: Vec<T>,
    pub m2: Vec<Vec<T>>,
    pub m2_se: Vec<Vec<T>>,
    /// `m2 - m1^t m1`, entry by entry from the stored values.
    pub sigma2: Vec<Vec<T>>,
    pub sigma2_se: Vec<Vec<T>>,
    /// Average of `(f - m1)(f - m1)^t`; equals `sigma2` algebraically and is PSD
    /// by construction.
    pub sample_covariance: Vec<Vec<T>>,
    /// `s_r = m1_1 + ... + m1_r`, accumulated from `ln Delta_r` directly.
    pub partial_sums: Vec<T>,
    pub partial_sums_se: Vec<T>,
}

impl<T: Real> MomentSummary<T> {
    pub fn sigma2_eigen(&self) -> SymmetricEigen<T> {
        symmetric_eigen(&self.sigma2)
    }

    /// Number of eigenvalues of `sigma2` above `RANK_TOL * max eigenvalue`.
    pub fn numerical_rank(&self) -> usize {
        numerical_rank(&self.sigma2_eigen().values)
    }

    /// `sigma2 * (1, ..., 1)^t`.
    pub fn sigma2_row_sums(&self) -> Vec<T> {
        self.sigma2.iter().map(|row| row.iter().copied().sum()).collect()
    }
}

pub fn numerical_rank<T: Real>(eigenvalues: &[T]) -> usize {
    let max = eigenvalues.iter().copied().fold(T::zero(), T::max);
    if !(max > T::zero()) {
        return 0;
    }
    let tol = T::lit(RANK_TOL) * max;
    eigenvalues.iter().filter(|&&v| v > tol).count()
}

/// Two passes over identical draws: raw moments, then centered products.
pub(crate) fn summarize_with<'a, T: Real>(
    field: FieldTag,
    n: usize,
    plan: &McPlan,
    outer: &dyn Fn() -> Outer<'a, T>,
) -> Result<MomentSummary<T>> {
    let nn = n * n;
    // Layout: f (n), f f^t (n*n), ln Delta (n).
    let first = evaluate(field, n, plan, outer(), 2 * n + nn, |p, h| {
        h[..n].copy_from_slice(p.f);
        for r in 0..n {
            for s in 0..n {
                h[n + r * n + s] = p.f[r] * p.f[s];
            }
        }
        h[n + nn..].copy_from_slice(p.cumulative);
    })?;
    let m1: Vec<T> = (0..n).map(|r| first.mean(r)).collect();
    let m2: Vec<Vec<T>> = (0..n)
        .map(|r| (0..n).map(|s| first.mean(n + r * n + s)).collect())
        .collect();
    let sigma2: Vec<Vec<T>> = (0..n)
        .map(|r| (0..n).map(|s| m2[r][s] - m1[r] * m1[s]).collect())
        .collect();

    let center = m1.clone();
    let second = evaluate(field, n, plan, outer(), nn, |p, h| {
        for r in 0..n {
            let a = p.f[r] - center[r];
            for s in 0..n {
                h[r * n + s] = a * (p.f[s] - center[s]);
            }
        }
    })?;

    let grid = |out: &DesignOutput<T>, off: usize, g: &dyn Fn(&DesignOutput<T>, usize) -> T| -> Vec<Vec<T>> {
        (0..n).map(|r| (0..n).map(|s| g(out, off + r * n + s)).collect()).collect()
    };
    Ok(MomentSummary {
        n,
        inner_samples: first.inner_samples(),
        outer_samples: first.outer_samples(),
        m1,
        m1_se: (0..n).map(|r| first.se(r)).collect(),
        m1_se_inner: (0..n).map(|r| first.inner_se(r)).collect(),
        m1_se_outer: (0..n).map(|r| first.outer_se(r)).collect(),
        m2_se: grid(&first, n, &|o, i| o.se(i)),
        m2,
        sigma2,
        sigma2_se: grid(&second, 0, &|o, i| o.se(i)),
        sample_covariance: grid(&second, 0, &|o, i| o.mean(i)),
        partial_sums: (0..n).map(|r| first.mean(n + nn + r)).collect(),
        partial_sums_se: (0..n).map(|r| first.se(n + nn + r)).collect(),
    })
}

/// `m_1(g)`, `m_2(g)` and `Sigma^2(g)` from one set of Haar draws.
pub fn moment_summary<T: Real>(c: &DoubleCoset<T>, plan: &McPlan) -> Result<MomentSummary<T>> {
    let atoms = c.atoms();
    summarize_with(c.field, c.n(), plan, &|| Outer::Atoms(&atoms))
}

/// `sum_{i <= r} 2 ln sigma_i(g) - s_r(g)` for r = 1..n, estimated per draw.
pub fn drift_spectrum_gap<T: Real>(c: &DoubleCoset<T>, plan: &McPlan) -> Result<Vec<RealEstimate<T>>> {
    let n = c.n();
    let atoms = c.atoms();
    let out = evaluate(c.field, n, plan, Outer::Atoms(&atoms), n, |p, h| {
        let mut top = T::zero();
        for r in 0..n {
            top += p.chamber[r];
            h[r] = top - p.cumulative[r];
        }
    })?;
    Ok((0..n).map(|r| out.estimate(r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{sample_haar, Seed};

    fn coset(field: FieldTag, x: &[f64]) -> DoubleCoset<f64> {
        DoubleCoset::new(field, WeylChamberPoint::new(x.to_vec()).unwrap())
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho::<f64>(FieldTag::Real, 2).rho, vec![0.5, -0.5]);
        assert_eq!(rho::<f64>(FieldTag::Complex, 3).rho, vec![2.0, 0.0, -2.0]);
        assert_eq!(rho::<f64>(FieldTag::Complex, 1).rho, vec![0.0]);
    }

    #[test]
    fn profile_examples() {
        let mut rng = Seed::new(4).rng();
        let k = sample_haar::<f64, _>(FieldTag::Complex, 3, &mut rng);
        let c = 1.7f64;
        let g = GroupElement::new(FieldTag::Complex, Matrix::diag_real(&[-c, -c, -c])).unwrap();
        let f = log_minor_profile(&g, &k).unwrap();
        for v in f {
            assert!((v - 2.0 * c.ln()).abs() < 1e-12);
        }
        let g = GroupElement::new(FieldTag::Real, Matrix::diag_real(&[2.0, 1.0])).unwrap();
        let f = log_minor_profile(&g, &UnitaryElement::identity(FieldTag::Real, 2)).unwrap();
        assert!((f[0] - 4f64.ln()).abs() < 1e-15 && f[1].abs() < 1e-15);
    }

    #[test]
    fn literal_and_chamber_profiles_agree() {
        let mut rng = Seed::new(9).rng();
        for field in FieldTag::ALL {
            let a = crate::haar::gaussian_matrix::<f64, _>(field, 3, &mut rng);
            let g = GroupElement::new(field, a).unwrap();
            let c = DoubleCoset::from_group(&g).unwrap();
            let k = sample_haar::<f64, _>(field, 3, &mut rng);
            let f = log_minor_profile(&g, &k).unwrap();
            // The chamber route sees k rotated by the left singular vectors of g;
            // compare the telescoped sums, which do not depend on that rotation.
            let s: f64 = f.iter().sum();
            let fc = chamber_log_minor_profile(&c.chamber, &k).unwrap();
            let sc: f64 = fc.iter().sum();
            assert!((s - sc).abs() < 1e-10 * (1.0 + s.abs()));
            assert!((s - g.log_det_gram()).abs() < 1e-10 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn lambda_zero_and_identity_are_exact() {
        let plan = McPlan::new(500, Seed::new(0)).with_partitions(2);
        let c = coset(FieldTag::Real, &[1.2, -0.4]);
        let phi = spherical_fn(&c, &SpectralParameter::zeros(2), &plan).unwrap();
        assert_eq!(phi.mean, Complex::new(1.0, 0.0));
        assert_eq!(phi.std_error, 0.0);
        let id = coset(FieldTag::Complex, &[0.0, 0.0, 0.0]);
        let phi = spherical_fn(&id, &SpectralParameter::new(vec![3.0, -1.0, 0.5]).unwrap(), &plan).unwrap();
        assert_eq!(phi.mean, Complex::new(1.0, 0.0));
        assert_eq!(phi.std_error, 0.0);
    }

    #[test]
    fn hermitian_symmetry_is_exact() {
        let plan = McPlan::new(300, Seed::new(8)).with_partitions(3);
        let c = coset(FieldTag::Complex, &[2.0, 0.3, -1.0]);
        let l = SpectralParameter::new(vec![0.7, -0.2, 1.1]).unwrap();
        let a = spherical_fn(&c, &l, &plan).unwrap();
        let b = spherical_fn(&c, &l.neg(), &plan).unwrap();
        assert_eq!(a.mean, b.mean.conj());
        assert_eq!(a.std_error, b.std_error);
    }

    #[test]
    fn first_moment_matches_closed_form() {
        let plan = McPlan::new(40_000, Seed::new(3)).with_partitions(4);
        let (a1, a2) = (4.0f64, 1.0f64);
        let c = coset(FieldTag::Real, &[a1.ln(), a2.ln()]);
        let m = moment_fn(&c, &MultiIndex::unit(2, 0), &plan).unwrap();
        let exact = 2.0 * ((a1.sqrt() + a2.sqrt()) / 2.0).ln();
        assert!(m.z_score(exact) < 4.0, "{m:?} vs {exact}");
        assert_eq!(moment_fn(&c, &MultiIndex::zeros(2), &plan).unwrap().mean, 1.0);
    }

    #[test]
    fn summary_identities() {
        let plan = McPlan::new(5000, Seed::new(1)).with_partitions(2);
        let c = coset(FieldTag::Real, &[4f64.ln(), 0.0]);
        let s = moment_summary(&c, &plan).unwrap();
        assert!((s.partial_sums[1] - 4f64.ln()).abs() < 1e-12);
        assert_eq!(s.partial_sums_se[1], 0.0);
        for r in s.sigma2_row_sums() {
            assert!(r.abs() < 1e-9);
        }
        assert_eq!(s.numerical_rank(), 1);
        for r in 0..2 {
            for t in 0..2 {
                assert_eq!(s.m2[r][t], s.m2[t][r]);
                assert!((s.sigma2[r][t] - s.sample_covariance[r][t]).abs() < 1e-10);
            }
        }

        let scalar = coset(FieldTag::Complex, &[0.8, 0.8, 0.8]);
        let s = moment_summary(&scalar, &plan).unwrap();
        assert!(s.sigma2.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(s.numerical_rank(), 0);
    }

    #[test]
    fn stencil_weights() {
        let l0 = SpectralParameter::new(vec![0.0, 0.0]).unwrap();
        let st = central_difference_stencil(&l0, &MultiIndex::new(vec![1, 1]), 0.1).unwrap();
        assert_eq!(st.len(), 4);
        let total: f64 = st.iter().map(|(w, _)| w).sum();
        assert!(total.abs() < 1e-12);
        let st = central_difference_stencil(&l0, &MultiIndex::new(vec![2, 0]), 0.1).unwrap();
        assert_eq!(st.len(), 3);
        assert!(central_difference_stencil(&l0, &MultiIndex::new(vec![3, 0]), 0.1).is_err());
    }

    #[test]
    fn drift_gap_is_nonnegative() {
        let plan = McPlan::new(2000, Seed::new(6));
        let c = coset(FieldTag::Real, &[6.0, 1.0, -2.0]);
        for e in drift_spectrum_gap(&c, &plan).unwrap() {
            assert!(e.mean >= -5.0 * e.std_error);
        }
    }

    #[test]
    fn minor_exponents_use_trailing_zero() {
        let l = SpectralParameter::new(vec![3.0, 1.0, -2.0]).unwrap();
        assert_eq!(l.minor_exponents(), vec![2.0, 3.0, -2.0]);
    }
}
