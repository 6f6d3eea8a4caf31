//! Streaming Monte-Carlo accumulators and estimates.
//!
//! Accumulators are single-pass (Welford) and merge with Chan's pairwise rule,
//! so per-partition results can be combined in a fixed order. A stream of
//! identical values yields an exactly zero variance and an exact mean.

use std::ops::Range;

use num_complex::Complex;
use serde::Serialize;

use crate::scalar::Real;

/// Mean with standard error `sd / sqrt(samples)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate<V, T> {
    pub mean: V,
    pub std_error: T,
    pub samples: usize,
}

pub type RealEstimate<T> = McEstimate<T, T>;
pub type ComplexEstimate<T> = McEstimate<Complex<T>, T>;

impl<T: Real> RealEstimate<T> {
    pub fn exact(value: T) -> Self {
        McEstimate {
            mean: value,
            std_error: T::zero(),
            samples: 1,
        }
    }

    /// `|mean - target| / std_error`, with an exact match counting as zero.
    pub fn z_score(&self, target: T) -> T {
        let d = (self.mean - target).abs();
        if d == T::zero() {
            T::zero()
        } else {
            d / self.std_error
        }
    }
}

impl<T: Real> ComplexEstimate<T> {
    pub fn z_score(&self, target: Complex<T>) -> T {
        let d = (self.mean - target).norm();
        if d == T::zero() {
            T::zero()
        } else {
            d / self.std_error
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford<T> {
    count: usize,
    mean: T,
    m2: T,
}

impl<T: Real> Welford<T> {
    pub fn new() -> Self {
        Welford {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    #[inline]
    pub fn push(&mut self, x: T) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / T::from_usize_lossy(self.count);
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let na = T::from_usize_lossy(self.count);
        let nb = T::from_usize_lossy(other.count);
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * (nb / n);
        self.m2 += other.m2 + delta * delta * (na * nb / n);
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> T {
        if self.count < 2 {
            T::zero()
        } else {
            self.m2 / T::from_usize_lossy(self.count - 1)
        }
    }

    pub fn std_error(&self) -> T {
        if self.count < 2 {
            return T::infinity();
        }
        (self.variance() / T::from_usize_lossy(self.count)).sqrt()
    }

    pub fn estimate(&self) -> RealEstimate<T> {
        McEstimate {
            mean: self.mean,
            std_error: self.std_error(),
            samples: self.count,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexWelford<T> {
    re: Welford<T>,
    im: Welford<T>,
}

impl<T: Real> ComplexWelford<T> {
    pub fn new() -> Self {
        ComplexWelford {
            re: Welford::new(),
            im: Welford::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, z: Complex<T>) {
        self.re.push(z.re);
        self.im.push(z.im);
    }

    pub fn merge(&mut self, other: &Self) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn count(&self) -> usize {
        self.re.count()
    }

    /// Standard error of the complex mean: `sqrt((var_re + var_im) / n)`.
    pub fn estimate(&self) -> ComplexEstimate<T> {
        let n = self.re.count();
        let se = if n < 2 {
            T::infinity()
        } else {
            ((self.re.variance() + self.im.variance()) / T::from_usize_lossy(n)).sqrt()
        };
        McEstimate {
            mean: Complex::new(self.re.mean(), self.im.mean()),
            std_error: se,
            samples: n,
        }
    }
}

/// Componentwise accumulator for vector-valued integrands.
#[derive(Clone, Debug, PartialEq)]
pub struct VecWelford<T> {
    parts: Vec<Welford<T>>,
}

impl<T: Real> VecWelford<T> {
    pub fn new(dim: usize) -> Self {
        VecWelford {
            parts: vec![Welford::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    #[inline]
    pub fn push(&mut self, x: &[T]) {
        debug_assert_eq!(x.len(), self.parts.len());
        for (w, &v) in self.parts.iter_mut().zip(x) {
            w.push(v);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            a.merge(b);
        }
    }

    pub fn count(&self) -> usize {
        self.parts.first().map_or(0, Welford::count)
    }

    pub fn component(&self, i: usize) -> &Welford<T> {
        &self.parts[i]
    }

    pub fn means(&self) -> Vec<T> {
        self.parts.iter().map(Welford::mean).collect()
    }

    pub fn estimates(&self) -> Vec<RealEstimate<T>> {
        self.parts.iter().map(Welford::estimate).collect()
    }
}

/// Splits `0..total` into `parts` contiguous ranges; the first `total % parts`
/// ranges get one extra element.
pub fn partition_ranges(total: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.max(1);
    let base = total / parts;
    let extra = total % parts;
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let len = base + usize::from(p < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}
