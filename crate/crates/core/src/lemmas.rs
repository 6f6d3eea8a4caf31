//! Checks of the matrix identities behind the finiteness and independence
//! arguments: minor coefficients, block determinants of unitaries, the ball
//! transformation `P`, and the permutation determinant.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldTag;
use crate::group::{det_floor, principal_minor_logs, PosDefMatrix, UnitaryElement};
use crate::haar::{sample_haar, McPlan, Seed};
use crate::linalg::Matrix;
use crate::mc::{RealEstimate, Welford};
use crate::scalar::Real;

/// Clamp for roundoff negatives in [`minor_coefficients`].
pub const COEF_TOL: f64 = 1e-12;

/// All r-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

fn leading_minor<T: Real>(m: &Matrix<T>, r: usize) -> T {
    m.block(0, r, 0, r).determinant().re
}

/// `c_I(u) = Delta_r(u^* P_I u)` for every r-subset `I` (0-based indices).
pub fn minor_coefficients<T: Real>(u: &UnitaryElement<T>, r: usize) -> Result<Vec<(Vec<usize>, T)>> {
    let n = u.n();
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!("minor order {r} outside 1..={n}")));
    }
    let m = u.matrix();
    let tol = T::lit(COEF_TOL);
    Ok(subsets(n, r)
        .into_iter()
        .map(|set| {
            let mut p = vec![T::zero(); n];
            set.iter().for_each(|&i| p[i] = T::one());
            let h = m.adjoint().matmul(&m.scale_rows(&p));
            let mut c = leading_minor(&h, r);
            if c < T::zero() && c > -tol {
                c = T::zero();
            }
            (set, c)
        })
        .collect())
}

/// `Delta_r(u^* diag(a) u)`.
pub fn weighted_minor<T: Real>(u: &UnitaryElement<T>, a: &[T], r: usize) -> T {
    let m = u.matrix();
    leading_minor(&m.adjoint().matmul(&m.scale_rows(a)), r)
}

/// `(|det u_1|, |det u_2|)` for the diagonal blocks of sizes `r` and `n - r`.
pub fn block_det_pair<T: Real>(u: &UnitaryElement<T>, r: usize) -> Result<(T, T)> {
    let n = u.n();
    if r == 0 || r >= n {
        return Err(Error::InvalidArgument(format!("block size {r} outside 1..{n}")));
    }
    let m = u.matrix();
    Ok((m.block(0, r, 0, r).determinant().norm(), m.block(r, n, r, n).determinant().norm()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegMomentReport<T> {
    /// Over the samples with `|det k_r| >= det_floor`.
    pub estimate: RealEstimate<T>,
    /// Samples excluded for `|det k_r| < det_floor`.
    pub below_floor: usize,
    /// Largest single term.
    pub max_term: T,
    /// Share of the total sum carried by the largest 1% of terms.
    pub top_percent_share: T,
    /// `(samples so far, running mean)` at tenths of the run.
    pub running: Vec<(usize, T)>,
}

/// Monte-Carlo estimate of `int_K |det k_r|^{-2 eps} dk`.
pub fn block_det_neg_moment<T: Real>(
    field: FieldTag,
    n: usize,
    r: usize,
    eps: T,
    plan: &McPlan,
) -> Result<NegMomentReport<T>> {
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!("block size {r} outside 1..={n}")));
    }
    if !(eps >= T::zero() && eps < T::lit(0.5)) {
        return Err(Error::InvalidArgument("eps must lie in [0, 1/2)".into()));
    }
    if plan.samples < 2 {
        return Err(Error::InvalidArgument("at least 2 samples are required".into()));
    }
    let exact_one = r == n || eps == T::zero();
    let floor = det_floor::<T>();
    let power = -T::lit(2.0) * eps;
    let chunks: Vec<Vec<Option<T>>> = plan
        .ranges()
        .into_par_iter()
        .enumerate()
        .map(|(p, range)| {
            let mut rng = plan.seed.derive(p as u64).rng();
            range
                .map(|_| {
                    let k = sample_haar::<T, _>(field, n, &mut rng);
                    if exact_one {
                        return Some(T::one());
                    }
                    let d = k.matrix().block(0, r, 0, r).determinant().norm();
                    (d >= floor).then(|| d.powf(power))
                })
                .collect()
        })
        .collect();
    let values: Vec<Option<T>> = chunks.into_iter().flatten().collect();
    let mut w = Welford::new();
    let mut running = Vec::new();
    let step = (values.len() / 10).max(1);
    let mut kept = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            w.push(*v);
            kept.push(*v);
        }
        if (i + 1) % step == 0 {
            running.push((i + 1, w.mean()));
        }
    }
    let below_floor = values.len() - kept.len();
    kept.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let total: T = kept.iter().copied().sum();
    let top = (kept.len() / 100).max(1).min(kept.len());
    let top_sum: T = kept[..top].iter().copied().sum();
    Ok(NegMomentReport {
        estimate: if exact_one {
            RealEstimate {
                mean: T::one(),
                std_error: T::zero(),
                samples: values.len(),
            }
        } else {
            w.estimate()
        },
        below_floor,
        max_term: kept.first().copied().unwrap_or_else(T::zero),
        top_percent_share: if total > T::zero() { top_sum / total } else { T::zero() },
        running,
    })
}

/// Entry `(r, j)` is `sum_{l <= r} x_{pi_j(l)}`, `pi_j` the transposition of
/// the first and `j`-th index.
pub fn permutation_sum_matrix<T: Real>(x: &[T]) -> Vec<Vec<T>> {
    let n = x.len();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|j| {
                    (0..=r)
                        .map(|l| {
                            let idx = if l == 0 {
                                j
                            } else if l == j {
                                0
                            } else {
                                l
                            };
                            x[idx]
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn real_det<T: Real>(rows: &[Vec<T>]) -> T {
    Matrix::from_real_rows(rows).determinant().re
}

/// `(lhs, rhs)`: the permutation-sum determinant and
/// `(x_1 + ... + x_n) prod_{j >= 2} (x_1 - x_j)`.
pub fn det_identity_check<T: Real>(x: &[T]) -> (T, T) {
    if x.is_empty() {
        return (T::one(), T::one());
    }
    let lhs = real_det(&permutation_sum_matrix(x));
    let sum: T = x.iter().copied().sum();
    let rhs = x[1..].iter().fold(sum, |acc, &v| acc * (x[0] - v));
    (lhs, rhs)
}

/// `(I - y^* y)^{1/2}` for a row vector `y` with `|y| <= 1`.
fn ball_root<T: Real>(y: &[Complex<T>]) -> Matrix<T> {
    let r = y.len();
    let nrm2: T = y.iter().map(|z| z.norm_sqr()).sum();
    if nrm2 == T::zero() {
        return Matrix::identity(r);
    }
    // On span(y^*) the eigenvalue is 1 - |y|^2, elsewhere 1.
    let c = (T::one() - (T::one() - nrm2).max(T::zero()).sqrt()) / nrm2;
    Matrix::from_fn(r, r, |i, j| {
        let id = if i == j { Complex::<T>::one() } else { Complex::<T>::zero() };
        id - (y[i].conj() * y[j]).scale(c)
    })
}

/// `(|det P(y_1, ..., y_r)|, |det (y_1; ...; y_r)|)`.
pub fn stacked_det_check<T: Real>(ys: &[Vec<Complex<T>>]) -> Result<(T, T)> {
    let r = ys.len();
    if r == 0 {
        return Err(Error::InvalidArgument("need at least one row".into()));
    }
    for (j, y) in ys.iter().enumerate() {
        if y.len() != r {
            return Err(Error::DimensionMismatch { expected: r, got: y.len() });
        }
        let nrm2: T = y.iter().map(|z| z.norm_sqr()).sum();
        if nrm2 > T::one() {
            return Err(Error::InvalidArgument(format!("row {j} lies outside the unit ball")));
        }
    }
    let mut rows: Vec<Vec<Complex<T>>> = Vec::with_capacity(r);
    // Accumulated right factor (I - y_{j-1}^* y_{j-1})^{1/2} ... (I - y_1^* y_1)^{1/2}.
    let mut acc = Matrix::<T>::identity(r);
    for (j, y) in ys.iter().enumerate() {
        if j > 0 {
            acc = ball_root(&ys[j - 1]).matmul(&acc);
        }
        let row = Matrix::from_rows(&[y.clone()]).matmul(&acc);
        rows.push(row.row(0).to_vec());
    }
    let p = Matrix::from_rows(&rows).determinant().norm();
    let direct = Matrix::from_rows(ys).determinant().norm();
    Ok((p, direct))
}

/// Determinant of `(ln Delta_r(k_j^* diag(e^a) k_j))_{r, j}` over the
/// transposition matrices `k_j`, with the minors taken from Cholesky.
pub fn log_minor_independence_check<T: Real>(a: &[T]) -> Result<T> {
    let n = a.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty chamber point".into()));
    }
    let e: Vec<T> = a.iter().map(|v| v.exp()).collect();
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(n);
    for j in 0..n {
        let k = Matrix::from_fn(n, n, |r, c| {
            let src = if r == 0 {
                j
            } else if r == j {
                0
            } else {
                r
            };
            if c == src {
                Complex::one()
            } else {
                Complex::zero()
            }
        });
        let p = k.adjoint().matmul(&Matrix::diag_real(&e)).matmul(&k);
        let p = PosDefMatrix::new(FieldTag::Real, p)?;
        cols.push(principal_minor_logs(&p)?);
    }
    let m: Vec<Vec<T>> = (0..n).map(|r| (0..n).map(|j| cols[j][r]).collect()).collect();
    Ok(real_det(&m))
}

// --- verification suite ----------------------------------------------------

/// Deliberate defects for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Scale the first row of every unitary fed to the block determinant check.
    CorruptUnitary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub fields: Vec<FieldTag>,
    pub dims: Vec<usize>,
    /// Random instances per (field, n) for the unitary checks, and in total for
    /// the deterministic-formula checks.
    pub instances: usize,
    pub neg_moment_samples: usize,
    pub seed: Seed,
    pub partitions: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            fields: FieldTag::ALL.to_vec(),
            dims: vec![2, 3, 4],
            instances: 1000,
            neg_moment_samples: 100_000,
            seed: Seed::new(0),
            partitions: 1,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub passed: bool,
    pub instances: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<LemmaCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, instances: usize, max_deviation: f64, tolerance: f64, detail: String) -> LemmaCheck {
    LemmaCheck {
        name: name.into(),
        passed: max_deviation.is_finite() && max_deviation <= tolerance,
        instances,
        max_deviation,
        tolerance,
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn uniform_ball_row<R: Rng + ?Sized>(field: FieldTag, r: usize, rng: &mut R) -> Vec<Complex<f64>> {
    // Gaussian direction, radius U^{1/dim}.
    let g = crate::haar::gaussian_matrix::<f64, R>(field, r, rng);
    let v: Vec<Complex<f64>> = g.row(0).to_vec();
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let dim = (r * field.d()) as f64;
    let rad = rng.random::<f64>().powf(1.0 / dim);
    v.iter().map(|z| z.scale(rad / nrm)).collect()
}

/// Runs every lemma check of the suite in `f64`.
pub fn run_lemma_suite(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.instances == 0 || cfg.dims.is_empty() || cfg.fields.is_empty() {
        return Err(Error::InvalidArgument("verification needs instances, dims and fields".into()));
    }
    let mut checks = Vec::new();

    // Minor coefficients: nonnegativity, unit sum, reconstruction.
    let (mut neg, mut sum_dev, mut rec_dev, mut count) = (0f64, 0f64, 0f64, 0usize);
    let (mut glech, mut glech_count) = (0f64, 0usize);
    for (fi, &field) in cfg.fields.iter().enumerate() {
        for &n in &cfg.dims {
            let mut rng = cfg.seed.derive((fi * 1000 + n) as u64).rng();
            for _ in 0..cfg.instances {
                let u = sample_haar::<f64, _>(field, n, &mut rng);
                let avecs: Vec<Vec<f64>> = (0..10)
                    .map(|_| (0..n).map(|_| (2.0 * rng.random::<f64>() - 1.0).exp()).collect())
                    .collect();
                for r in 1..=n {
                    let coefs = minor_coefficients(&u, r)?;
                    let s: f64 = coefs.iter().map(|(_, c)| c).sum();
                    sum_dev = sum_dev.max((s - 1.0).abs());
                    neg = neg.max(coefs.iter().map(|(_, c)| -c).fold(0.0, f64::max));
                    for a in &avecs {
                        let lhs: f64 = coefs
                            .iter()
                            .map(|(set, c)| c * set.iter().map(|&i| a[i]).product::<f64>())
                            .sum();
                        let rhs = weighted_minor(&u, a, r);
                        rec_dev = rec_dev.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
                    }
                }
                count += 1;

                let u = match cfg.fault {
                    Some(Fault::CorruptUnitary) => {
                        let mut m = u.matrix().clone();
                        for c in 0..n {
                            m[(0, c)] = m[(0, c)].scale(1.1);
                        }
                        UnitaryElement::from_matrix_unchecked(field, m)
                    }
                    None => u,
                };
                for r in 1..n {
                    let (a, b) = block_det_pair(&u, r)?;
                    glech = glech.max((a - b).abs());
                }
                glech_count += 1;
            }
        }
    }
    checks.push(check(
        "pos-coeff nonnegativity",
        count,
        neg,
        1e-12,
        "largest negative coefficient".into(),
    ));
    checks.push(check("pos-coeff sum", count, sum_dev, 1e-10, "max |sum_I c_I - 1|".into()));
    checks.push(check(
        "pos-coeff reconstruction",
        count,
        rec_dev,
        1e-9,
        "max relative error of sum_I c_I prod a_i against the direct minor".into(),
    ));
    checks.push(check(
        "glech-det",
        glech_count,
        glech,
        1e-10,
        "max ||det u_1| - |det u_2||".into(),
    ));

    // Ball transformation determinant.
    let mut rng = cfg.seed.derive(1 << 20).rng();
    let (mut dev, mut cnt) = (0f64, 0usize);
    for &field in &cfg.fields {
        for r in 1..=4 {
            for _ in 0..cfg.instances {
                let ys: Vec<Vec<Complex<f64>>> = (0..r).map(|_| uniform_ball_row(field, r, &mut rng)).collect();
                let (a, b) = stacked_det_check(&ys)?;
                dev = dev.max((a - b).abs());
                cnt += 1;
            }
        }
    }
    checks.push(check("det-P", cnt, dev, 1e-9, "max ||det P(y)| - |det y||".into()));

    // Permutation determinant identity.
    let mut rng = cfg.seed.derive(2 << 20).rng();
    let (mut dev, mut cnt) = (0f64, 0usize);
    for &n in &cfg.dims {
        for _ in 0..cfg.instances {
            let x: Vec<f64> = (0..n).map(|_| -5.0 + 10.0 * rng.random::<f64>()).collect();
            let (l, r) = det_identity_check(&x);
            dev = dev.max(rel(l, r));
            cnt += 1;
        }
    }
    checks.push(check("det-rechnung", cnt, dev, 1e-9, "max |lhs - rhs| / max(1, |lhs|, |rhs|)".into()));

    // Linear independence of the log-minor functions.
    let mut rng = cfg.seed.derive(3 << 20).rng();
    let (mut dev, mut zero_hits, mut cnt) = (0f64, 0usize, 0usize);
    for &n in &cfg.dims {
        for _ in 0..cfg.instances {
            let mut a: Vec<f64> = (0..n).map(|_| -2.0 + 4.0 * rng.random::<f64>()).collect();
            a.sort_by(|p, q| q.partial_cmp(p).unwrap());
            let d = log_minor_independence_check(&a)?;
            let (_, formula) = det_identity_check(&a);
            dev = dev.max(rel(d, formula));
            if formula.abs() > 1e-6 && d == 0.0 {
                zero_hits += 1;
            }
            cnt += 1;
        }
    }
    let mut lin = check("lin-unab", cnt, dev, 1e-9, format!("{zero_hits} vanishing determinants"));
    lin.passed &= zero_hits == 0;
    checks.push(lin);

    // Integrable singularity: n = 2, r = 1, complex, eps = 1/4 integrates to 4/3.
    let plan = McPlan::new(cfg.neg_moment_samples, cfg.seed.derive(4 << 20)).with_partitions(cfg.partitions);
    let rep = block_det_neg_moment(FieldTag::Complex, 2, 1, 0.25, &plan)?;
    let z = rep.estimate.z_score(4.0 / 3.0);
    checks.push(check(
        "int-finite",
        rep.estimate.samples,
        z,
        4.0,
        format!(
            "estimate {:.6} +- {:.6} against 4/3 ({} below floor)",
            rep.estimate.mean, rep.estimate.std_error, rep.below_floor
        ),
    ));

    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn subsets_enumerate() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn identity_coefficients() {
        let u = UnitaryElement::<f64>::identity(FieldTag::Real, 3);
        for (set, c) in minor_coefficients(&u, 2).unwrap() {
            assert_eq!(c, if set == vec![0, 1] { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn block_dets_of_rotation() {
        let u = UnitaryElement::<f64>::identity(FieldTag::Real, 4);
        assert_eq!(block_det_pair(&u, 2).unwrap(), (1.0, 1.0));
        let t = 0.7f64;
        let m = Matrix::from_real_rows(&[
            vec![t.cos(), -t.sin(), 0.0],
            vec![t.sin(), t.cos(), 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let u = UnitaryElement::new(FieldTag::Real, m).unwrap();
        let (a, b) = block_det_pair(&u, 1).unwrap();
        assert!((a - t.cos()).abs() < 1e-15 && (b - t.cos()).abs() < 1e-15);
    }

    #[test]
    fn neg_moment_exact_cases() {
        let plan = McPlan::new(50, Seed::new(1));
        let a = block_det_neg_moment::<f64>(FieldTag::Real, 3, 3, 0.3, &plan).unwrap();
        assert_eq!((a.estimate.mean, a.estimate.std_error), (1.0, 0.0));
        let b = block_det_neg_moment::<f64>(FieldTag::Complex, 3, 1, 0.0, &plan).unwrap();
        assert_eq!((b.estimate.mean, b.estimate.std_error), (1.0, 0.0));
        assert!(block_det_neg_moment::<f64>(FieldTag::Real, 3, 1, 0.5, &plan).is_err());
    }

    #[test]
    fn neg_moment_matches_four_thirds() {
        let plan = McPlan::new(100_000, Seed::new(2)).with_partitions(4);
        let rep = block_det_neg_moment::<f64>(FieldTag::Complex, 2, 1, 0.25, &plan).unwrap();
        assert!(rep.estimate.z_score(4.0 / 3.0) < 4.0, "{:?}", rep.estimate);
        assert_eq!(rep.running.len(), 10);
    }

    #[test]
    fn det_identity_examples() {
        assert_eq!(det_identity_check(&[1.0, 2.0, 3.0]).1, 12.0);
        assert!((det_identity_check(&[1.0f64, 2.0, 3.0]).0 - 12.0).abs() < 1e-12);
        let (l, r) = det_identity_check(&[0.4f64, 0.4, 0.4, 0.4]);
        assert!(l.abs() < 1e-14 && r == 0.0);
        let (l, r) = det_identity_check(&[1.5f64, -0.5, -1.0]);
        assert!(l.abs() < 1e-14 && r == 0.0);
    }

    #[test]
    fn stacked_examples() {
        let e = |i: usize, r: usize| -> Vec<Complex<f64>> {
            (0..r).map(|j| Complex::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()
        };
        let (a, b) = stacked_det_check(&[e(0, 3), e(1, 3), e(2, 3)]).unwrap();
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let y = vec![Complex::new(-0.3f64, 0.4)];
        let (a, b) = stacked_det_check(&[y]).unwrap();
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        assert!(stacked_det_check(&[vec![Complex::new(1.5f64, 0.0)]]).is_err());
    }

    #[test]
    fn independence_examples() {
        let a = [2f64.ln(), 0.0, -(3f64.ln())];
        assert!(log_minor_independence_check(&a).unwrap().abs() > 0.0);
        assert!(log_minor_independence_check(&[0.3f64; 3]).unwrap().abs() < 1e-14);
        let a = [4f64.ln(), 0.0];
        let d = log_minor_independence_check(&a).unwrap();
        assert!((d - det_identity_check(&a).1).abs() < 1e-12);
    }

    #[test]
    fn suite_passes_and_negative_control_fails() {
        let cfg = VerifyConfig {
            instances: 60,
            neg_moment_samples: 20_000,
            ..VerifyConfig::default()
        };
        let rep = run_lemma_suite(&cfg).unwrap();
        assert!(rep.all_passed(), "{rep:#?}");
        let bad = VerifyConfig {
            fault: Some(Fault::CorruptUnitary),
            ..cfg
        };
        let rep = run_lemma_suite(&bad).unwrap();
        let g = rep.checks.iter().find(|c| c.name == "glech-det").unwrap();
        assert!(!g.passed);
    }

    proptest! {
        #[test]
        fn det_identity_holds(x in prop::collection::vec(-5.0f64..5.0, 1..6)) {
            let (l, r) = det_identity_check(&x);
            prop_assert!(rel(l, r) <= 1e-9);
        }

        #[test]
        fn block_dets_agree(seed in any::<u64>(), n in 2usize..6, complex in any::<bool>()) {
            let field = if complex { FieldTag::Complex } else { FieldTag::Real };
            let u = sample_haar::<f64, _>(field, n, &mut Seed::new(seed).rng());
            for r in 1..n {
                let (a, b) = block_det_pair(&u, r).unwrap();
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}
