//! The normalized statistic `T = (2 ln sigma_sing(S_k) - k m_1(nu)) / sqrt(k)`
//! over independent walks, and its comparison with `N(0, Sigma^2(nu))`.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::haar::{McPlan, Seed};
use crate::linalg::symmetric_eigen;
use crate::mc::RealEstimate;
use crate::measures::{measure_drift_with, measure_moments_with, BiinvariantMeasure, MeasureMoments, MeasurePlan, MomentDesign};
use crate::scalar::Real;
use crate::spherical::RANK_TOL;
use crate::walk::run_walk;

const TRIAL_STREAM_BASE: u64 = 1 << 42;
const PILOT_STREAM: u64 = 1 << 43;
const DRIFT_STREAM: u64 = (1 << 43) + 1;
const MOMENTS_STREAM: u64 = 1 << 44;

/// Minimum number of trials for an ensemble or a comparison.
pub const MIN_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CltConfig {
    /// Tolerance on the statistic; the centering error budget is a tenth of it.
    pub statistic_tol: f64,
    /// Draws of the pilot run that sizes the centering run.
    pub pilot_samples: usize,
    /// Cap on the draws of the centering run.
    pub max_drift_samples: usize,
    /// Draws for `Sigma^2(nu)`.
    pub moment_samples: usize,
    /// Partition count of the Monte-Carlo integrals.
    pub partitions: usize,
}

impl Default for CltConfig {
    fn default() -> Self {
        CltConfig {
            statistic_tol: 0.1,
            pilot_samples: 20_000,
            max_drift_samples: 40_000_000,
            moment_samples: 400_000,
            partitions: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltSample<T> {
    pub k: usize,
    /// One `T` per trial, in trial order.
    pub statistics: Vec<Vec<T>>,
    /// The `m_1(nu)` used for centering.
    pub centering: Vec<RealEstimate<T>>,
    /// `m_1`, `Sigma^2` of `nu` from a separate run.
    pub nu_moments: MeasureMoments<T>,
}

fn design_for<T: Real>(nu: &BiinvariantMeasure<T>) -> MomentDesign {
    if nu.atoms().is_some() {
        MomentDesign::Atoms
    } else {
        MomentDesign::Paired
    }
}

/// `m_1(nu)` with standard error at most `0.1 * statistic_tol / sqrt(k_max)`
/// per coordinate, unless the sample cap is hit first.
pub fn precise_drift<T: Real>(
    nu: &BiinvariantMeasure<T>,
    k_max: usize,
    seed: Seed,
    cfg: &CltConfig,
) -> Result<Vec<RealEstimate<T>>> {
    let design = design_for(nu);
    let target = 0.1 * cfg.statistic_tol / (k_max.max(1) as f64).sqrt();
    let plan = |samples: usize, stream: u64| {
        MeasurePlan::new(0, McPlan::new(samples, seed.derive(stream)).with_partitions(cfg.partitions))
    };
    let pilot = measure_drift_with(nu, &plan(cfg.pilot_samples.max(2), PILOT_STREAM), design)?;
    let worst = pilot.iter().map(|e| e.std_error.to_f64_lossy()).fold(0.0, f64::max);
    if worst <= target {
        return Ok(pilot);
    }
    let ratio = worst / target;
    let wanted = (ratio * ratio * cfg.pilot_samples as f64 * 1.1).ceil();
    let samples = if wanted.is_finite() {
        (wanted as usize).min(cfg.max_drift_samples)
    } else {
        cfg.max_drift_samples
    };
    measure_drift_with(nu, &plan(samples.max(2), DRIFT_STREAM), design)
}

/// Walks of length `max(ks)`, read off at every `k` in `ks` (strictly increasing).
pub fn clt_curve<T: Real>(
    nu: &BiinvariantMeasure<T>,
    ks: &[usize],
    trials: usize,
    seed: Seed,
    cfg: &CltConfig,
) -> Result<Vec<CltSample<T>>> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!("at least {MIN_TRIALS} trials are required")));
    }
    let k_max = *ks.last().ok_or_else(|| Error::InvalidArgument("empty list of walk lengths".into()))?;
    let centering = precise_drift(nu, k_max, seed, cfg)?;
    let mplan = MeasurePlan::new(
        0,
        McPlan::new(cfg.moment_samples.max(2), seed.derive(MOMENTS_STREAM)).with_partitions(cfg.partitions),
    );
    let nu_moments = measure_moments_with(nu, &mplan, design_for(nu))?;
    let m1: Vec<T> = centering.iter().map(|e| e.mean).collect();

    let walks: Vec<Vec<Vec<T>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let traj = run_walk(nu, k_max, ks, seed.derive(TRIAL_STREAM_BASE + i as u64))?;
            traj.checkpoints
                .iter()
                .map(|c| {
                    let k = T::from_usize_lossy(c.k);
                    let root = k.sqrt();
                    let t: Vec<T> = c
                        .log_singular
                        .coords()
                        .iter()
                        .zip(&m1)
                        .map(|(&s, &m)| (T::lit(2.0) * s - k * m) / root)
                        .collect();
                    if t.iter().all(|v| v.is_finite()) {
                        Ok(t)
                    } else {
                        Err(Error::NumericalBlowup {
                            step: c.k,
                            detail: format!("non-finite statistic in trial {i}"),
                        })
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(ks
        .iter()
        .enumerate()
        .map(|(j, &k)| CltSample {
            k,
            statistics: walks.iter().map(|w| w[j].clone()).collect(),
            centering: centering.clone(),
            nu_moments: nu_moments.clone(),
        })
        .collect())
}

pub fn clt_ensemble_with<T: Real>(
    nu: &BiinvariantMeasure<T>,
    k: usize,
    trials: usize,
    seed: Seed,
    cfg: &CltConfig,
) -> Result<CltSample<T>> {
    Ok(clt_curve(nu, &[k], trials, seed, cfg)?.remove(0))
}

pub fn clt_ensemble<T: Real>(nu: &BiinvariantMeasure<T>, k: usize, trials: usize, seed: Seed) -> Result<CltSample<T>> {
    clt_ensemble_with(nu, k, trials, seed, &CltConfig::default())
}

// --- Gaussian comparison ---------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionKs {
    /// Unit eigenvector of `Sigma^2`.
    pub direction: Vec<f64>,
    pub variance: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianReport {
    pub trials: usize,
    pub mean_norm: f64,
    /// `||cov(T) - Sigma^2||_F / ||Sigma^2||_F`; the absolute error when `Sigma^2 = 0`.
    pub cov_frobenius_rel_err: f64,
    pub mardia_skewness: f64,
    pub mardia_skewness_p: f64,
    pub mardia_kurtosis: f64,
    pub mardia_kurtosis_z: f64,
    pub per_direction_ks: Vec<DirectionKs>,
    pub sigma2_rank: usize,
    /// `Sigma^2` has numerical rank below n; tests ran on its range.
    pub degenerate_covariance: bool,
}

/// Kolmogorov distribution tail with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, samples: usize) -> f64 {
    let sn = (samples as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `sup |F_n - Phi|` of standardized values.
pub fn ks_statistic_normal(z: &mut [f64]) -> f64 {
    let phi = Normal::standard();
    z.sort_by(|a, b| a.total_cmp(b));
    let n = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = phi.cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn sign_normalized(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    let flip = if s != 0.0 {
        s < 0.0
    } else {
        v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0)
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mardia's statistics of `y` with its own mean and covariance:
/// `(b1, skewness p-value, b2, kurtosis z)`.
fn mardia(y: &[Vec<f64>]) -> (f64, f64, f64, f64) {
    let q = y.first().map_or(0, Vec::len);
    let nn = y.len() as f64;
    if q == 0 || y.len() < 2 {
        return (0.0, 1.0, 0.0, 0.0);
    }
    let mean: Vec<f64> = (0..q).map(|j| y.iter().map(|v| v[j]).sum::<f64>() / nn).collect();
    let d: Vec<Vec<f64>> = y.iter().map(|v| v.iter().zip(&mean).map(|(a, m)| a - m).collect()).collect();
    let s: Vec<Vec<f64>> = (0..q)
        .map(|a| (0..q).map(|b| d.iter().map(|v| v[a] * v[b]).sum::<f64>() / nn).collect())
        .collect();
    let e = symmetric_eigen(&s);
    let max = e.values.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..q).filter(|&i| e.values[i] > RANK_TOL * max && max > 0.0).collect();
    let p = keep.len();
    if p == 0 {
        return (0.0, 1.0, 0.0, 0.0);
    }
    // Whitened residuals: d_i^t S^+ d_j = w_i . w_j.
    let w: Vec<Vec<f64>> = d
        .iter()
        .map(|v| keep.iter().map(|&i| dot(v, &e.vectors[i]) / e.values[i].sqrt()).collect())
        .collect();
    let b1 = w
        .par_iter()
        .map(|wi| w.iter().map(|wj| dot(wi, wj).powi(3)).sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        / (nn * nn);
    let b2 = w.iter().map(|wi| dot(wi, wi).powi(2)).sum::<f64>() / nn;
    let pf = p as f64;
    let dof = pf * (pf + 1.0) * (pf + 2.0) / 6.0;
    let skew_p = ChiSquared::new(dof).map_or(f64::NAN, |c| c.sf(nn * b1 / 6.0));
    let z = (b2 - pf * (pf + 2.0)) / (8.0 * pf * (pf + 2.0) / nn).sqrt();
    (b1, skew_p, b2, z)
}

/// Compares `statistics` with `N(0, sigma2)`. Directional KS tests run on the
/// eigenvectors of `sigma2` spanning its numerical range; Mardia's statistics
/// use the sample moments of the projection onto that range.
pub fn gaussian_compare_to<T: Real>(statistics: &[Vec<T>], sigma2: &[Vec<T>]) -> Result<GaussianReport> {
    let trials = statistics.len();
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!("at least {MIN_TRIALS} trials are required")));
    }
    let n = sigma2.len();
    if let Some(t) = statistics.iter().find(|t| t.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: t.len() });
    }
    let t: Vec<Vec<f64>> = statistics
        .iter()
        .map(|v| v.iter().map(|x| x.to_f64_lossy()).collect())
        .collect();
    let s2: Vec<Vec<f64>> = sigma2.iter().map(|r| r.iter().map(|x| x.to_f64_lossy()).collect()).collect();
    if t.iter().flatten().chain(s2.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite statistic or covariance".into()));
    }
    let nn = trials as f64;
    let mean: Vec<f64> = (0..n).map(|j| t.iter().map(|v| v[j]).sum::<f64>() / nn).collect();
    let cov: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| t.iter().map(|v| (v[a] - mean[a]) * (v[b] - mean[b])).sum::<f64>() / (nn - 1.0))
                .collect()
        })
        .collect();
    let frob = |m: &dyn Fn(usize, usize) -> f64| -> f64 {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| m(a, b).powi(2)).sum::<f64>().sqrt()
    };
    let diff = frob(&|a, b| cov[a][b] - s2[a][b]);
    let scale = frob(&|a, b| s2[a][b]);
    let cov_frobenius_rel_err = if scale > 0.0 { diff / scale } else { diff };

    let e = symmetric_eigen(&s2);
    let max = e.values.first().copied().unwrap_or(0.0);
    let range: Vec<usize> = (0..n).filter(|&i| max > 0.0 && e.values[i] > RANK_TOL * max).collect();
    let per_direction_ks = range
        .iter()
        .map(|&i| {
            let v = sign_normalized(e.vectors[i].clone());
            let sd = e.values[i].sqrt();
            let mut z: Vec<f64> = t.iter().map(|x| dot(x, &v) / sd).collect();
            let d = ks_statistic_normal(&mut z);
            DirectionKs {
                direction: v,
                variance: e.values[i],
                ks_statistic: d,
                p_value: ks_p_value(d, trials),
            }
        })
        .collect();
    let projected: Vec<Vec<f64>> = t
        .iter()
        .map(|x| range.iter().map(|&i| dot(x, &e.vectors[i])).collect())
        .collect();
    let (b1, skew_p, b2, kz) = mardia(&projected);
    Ok(GaussianReport {
        trials,
        mean_norm: dot(&mean, &mean).sqrt(),
        cov_frobenius_rel_err,
        mardia_skewness: b1,
        mardia_skewness_p: skew_p,
        mardia_kurtosis: b2,
        mardia_kurtosis_z: kz,
        per_direction_ks,
        sigma2_rank: range.len(),
        degenerate_covariance: range.len() < n,
    })
}

pub fn gaussian_compare<T: Real>(sample: &CltSample<T>) -> Result<GaussianReport> {
    gaussian_compare_to(&sample.statistics, sample.nu_moments.sigma2())
}
