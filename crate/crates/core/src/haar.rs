//! Haar measure on U_n(F) and seeded, partitioned Monte-Carlo over it.
//!
//! Randomness is organized as `(seed, stream)` pairs feeding ChaCha8. A
//! computation split into `P` partitions gives partition `p` the derived seed
//! `seed.derive(p)`, and partial results are merged in partition order. The
//! output is therefore a pure function of `(seed, samples, partitions)`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldTag;
use crate::group::UnitaryElement;
use crate::linalg::Matrix;
use crate::mc::{partition_ranges, ComplexEstimate, ComplexWelford, RealEstimate, VecWelford};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed { value, stream: 0 }
    }

    /// Independent child stream `index`.
    pub fn derive(self, index: u64) -> Seed {
        Seed {
            value: self.value,
            stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(1))),
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream);
        rng
    }
}

/// Sample count, seed and partition count of one Monte-Carlo computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McPlan {
    pub samples: usize,
    pub seed: Seed,
    pub partitions: usize,
}

impl McPlan {
    pub fn new(samples: usize, seed: Seed) -> Self {
        McPlan {
            samples,
            seed,
            partitions: 1,
        }
    }

    pub fn with_partitions(mut self, partitions: usize) -> Self {
        self.partitions = partitions.max(1);
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    pub(crate) fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        partition_ranges(self.samples, self.partitions)
    }
}

/// Gaussian matrix for the field: standard normal entries, or complex entries
/// with independent real and imaginary parts of variance 1/2.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(field: FieldTag, n: usize, rng: &mut R) -> Matrix<T> {
    let half = T::lit(0.5).sqrt();
    Matrix::from_fn(n, n, |_, _| match field {
        FieldTag::Real => Complex::new(T::sample_standard_normal(rng), T::zero()),
        FieldTag::Complex => Complex::new(
            T::sample_standard_normal(rng) * half,
            T::sample_standard_normal(rng) * half,
        ),
    })
}

/// Haar-distributed element of U_n(F) (O(n) for the real field).
///
/// Q from the QR factorization of a Gaussian matrix, with the phases of R's
/// diagonal moved into Q; without that correction Q is not Haar distributed.
pub fn sample_haar<T: Real, R: Rng + ?Sized>(field: FieldTag, n: usize, rng: &mut R) -> UnitaryElement<T> {
    loop {
        let z = gaussian_matrix::<T, R>(field, n, rng);
        // A rank-deficient Gaussian matrix has probability zero; just redraw.
        if let Some((q, _)) = z.qr() {
            return UnitaryElement::from_matrix_unchecked(field, q);
        }
    }
}

/// `plan.samples` Haar draws in partition order.
pub fn haar_samples<T: Real>(field: FieldTag, n: usize, plan: &McPlan) -> Vec<UnitaryElement<T>> {
    let ranges = plan.ranges();
    let chunks: Vec<Vec<UnitaryElement<T>>> = ranges
        .par_iter()
        .enumerate()
        .map(|(p, r)| {
            let mut rng = plan.seed.derive(p as u64).rng();
            (0..r.len()).map(|_| sample_haar(field, n, &mut rng)).collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

fn check_finite<T: Real>(values: &[T], sample: usize) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteIntegrand {
            sample,
            detail: format!("component {pos} = {}", values[pos]),
        });
    }
    Ok(())
}

/// Componentwise Monte-Carlo estimate of `E_k[f(k)]` over Haar measure.
pub fn haar_expect<T, F>(f: F, dim: usize, field: FieldTag, n: usize, plan: &McPlan) -> Result<Vec<RealEstimate<T>>>
where
    T: Real,
    F: Fn(&UnitaryElement<T>) -> Vec<T> + Sync,
{
    if plan.samples < 2 {
        return Err(Error::InvalidArgument("haar_expect needs at least 2 samples".into()));
    }
    let partials: Vec<Result<VecWelford<T>>> = plan
        .ranges()
        .par_iter()
        .enumerate()
        .map(|(p, r)| {
            let mut rng = plan.seed.derive(p as u64).rng();
            let mut acc = VecWelford::new(dim);
            for i in r.clone() {
                let k = sample_haar(field, n, &mut rng);
                let v = f(&k);
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
                }
                check_finite(&v, i)?;
                acc.push(&v);
            }
            Ok(acc)
        })
        .collect();
    let mut total = VecWelford::new(dim);
    for part in partials {
        total.merge(&part?);
    }
    Ok(total.estimates())
}

/// Complex-valued counterpart of [`haar_expect`].
pub fn haar_expect_complex<T, F>(
    f: F,
    dim: usize,
    field: FieldTag,
    n: usize,
    plan: &McPlan,
) -> Result<Vec<ComplexEstimate<T>>>
where
    T: Real,
    F: Fn(&UnitaryElement<T>) -> Vec<Complex<T>> + Sync,
{
    if plan.samples < 2 {
        return Err(Error::InvalidArgument("haar_expect needs at least 2 samples".into()));
    }
    let partials: Vec<Result<Vec<ComplexWelford<T>>>> = plan
        .ranges()
        .par_iter()
        .enumerate()
        .map(|(p, r)| {
            let mut rng = plan.seed.derive(p as u64).rng();
            let mut acc = vec![ComplexWelford::new(); dim];
            for i in r.clone() {
                let k = sample_haar(field, n, &mut rng);
                let v = f(&k);
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
                }
                if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFiniteIntegrand {
                        sample: i,
                        detail: "complex integrand".into(),
                    });
                }
                acc.iter_mut().zip(&v).for_each(|(a, &z)| a.push(z));
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![ComplexWelford::new(); dim];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            t.merge(&p);
        }
    }
    Ok(total.iter().map(ComplexWelford::estimate).collect())
}
