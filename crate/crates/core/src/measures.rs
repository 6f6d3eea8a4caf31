//! K-biinvariant probability measures on GL_n(F), given by a law on the Weyl
//! chamber plus independent Haar rotations on both sides.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{evaluate, ChamberSampler, Outer};
use crate::error::{Error, Result};
use crate::field::FieldTag;
use crate::group::{GroupElement, WeylChamberPoint};
use crate::haar::{sample_haar, McPlan, Seed};
use crate::linalg::Matrix;
use crate::mc::{ComplexEstimate, RealEstimate};
use crate::scalar::Real;
use crate::spherical::{numerical_rank, stencil_on, summarize_with, MomentSummary, SpectralParameter};

/// Stream index reserved for the outer chamber draws of a crossed design.
const OUTER_STREAM: u64 = 1 << 41;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Marginal<T> {
    Normal { mu: T, sigma: T },
    Uniform { lo: T, hi: T },
    /// Uniform over the listed values.
    LogSpaced(Vec<T>),
}

impl<T: Real> Marginal<T> {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            Marginal::Normal { mu, sigma } => *mu + *sigma * T::sample_standard_normal(rng),
            Marginal::Uniform { lo, hi } => *lo + (*hi - *lo) * T::sample_unit(rng),
            Marginal::LogSpaced(v) => v[rng.random_range(0..v.len())],
        }
    }

    fn mean(&self) -> T {
        match self {
            Marginal::Normal { mu, .. } => *mu,
            Marginal::Uniform { lo, hi } => (*lo + *hi) * T::lit(0.5),
            Marginal::LogSpaced(v) => v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChamberLaw<T> {
    Point(WeylChamberPoint<T>),
    /// `n` i.i.d. draws from the marginal, sorted descending.
    SortedIid { marginal: Marginal<T>, n: usize },
    /// `x -> x + shift * (1, ..., 1)`.
    Scaled { base: Box<ChamberLaw<T>>, shift: T },
}

impl<T: Real> ChamberLaw<T> {
    pub fn n(&self) -> usize {
        match self {
            ChamberLaw::Point(x) => x.n(),
            ChamberLaw::SortedIid { n, .. } => *n,
            ChamberLaw::Scaled { base, .. } => base.n(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            ChamberLaw::Point(x) => x.coords().to_vec(),
            ChamberLaw::SortedIid { marginal, n } => {
                let mut v: Vec<T> = (0..*n).map(|_| marginal.sample(rng)).collect();
                v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
                v
            }
            ChamberLaw::Scaled { base, shift } => {
                let mut v = base.sample(rng);
                v.iter_mut().for_each(|x| *x += *shift);
                v
            }
        }
    }

    /// The single point of a deterministic law.
    pub fn point(&self) -> Option<Vec<T>> {
        match self {
            ChamberLaw::Point(x) => Some(x.coords().to_vec()),
            ChamberLaw::SortedIid { .. } => None,
            ChamberLaw::Scaled { base, shift } => base
                .point()
                .map(|v| v.into_iter().map(|x| x + *shift).collect()),
        }
    }

    /// `E[x_1 + ... + x_n]`.
    pub fn mean_sum(&self) -> T {
        match self {
            ChamberLaw::Point(x) => x.sum(),
            ChamberLaw::SortedIid { marginal, n } => T::from_usize_lossy(*n) * marginal.mean(),
            ChamberLaw::Scaled { base, shift } => base.mean_sum() + T::from_usize_lossy(self.n()) * *shift,
        }
    }

    fn shifted(self, shift: T) -> Self {
        ChamberLaw::Scaled {
            base: Box::new(self),
            shift,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component<T> {
    pub weight: T,
    pub law: ChamberLaw<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiinvariantMeasure<T> {
    pub field: FieldTag,
    pub n: usize,
    /// Weights sum to one.
    pub components: Vec<Component<T>>,
}

impl<T: Real> BiinvariantMeasure<T> {
    /// Validates and normalizes the weights.
    pub fn new(field: FieldTag, n: usize, components: Vec<(T, ChamberLaw<T>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::spec("n", "must be positive"));
        }
        if components.is_empty() {
            return Err(Error::spec("components", "at least one component is required"));
        }
        let mut total = T::zero();
        for (i, (w, law)) in components.iter().enumerate() {
            if !w.is_finite() || !(*w > T::zero()) {
                return Err(Error::spec(format!("components[{i}].weight"), format!("must be positive and finite, got {w}")));
            }
            if law.n() != n {
                return Err(Error::spec(
                    format!("components[{i}].law"),
                    format!("dimension {} does not match n = {n}", law.n()),
                ));
            }
            total += *w;
        }
        if !total.is_finite() {
            return Err(Error::spec("components", "weights are not normalizable"));
        }
        let components = components
            .into_iter()
            .map(|(w, law)| Component { weight: w / total, law })
            .collect();
        Ok(BiinvariantMeasure { field, n, components })
    }

    pub fn point_mass(field: FieldTag, x: WeylChamberPoint<T>) -> Self {
        BiinvariantMeasure {
            field,
            n: x.n(),
            components: vec![Component {
                weight: T::one(),
                law: ChamberLaw::Point(x),
            }],
        }
    }

    /// Parses the JSON measure format.
    pub fn from_json(doc: &str) -> Result<Self> {
        let raw: RawMeasure = serde_json::from_str(doc).map_err(|e| Error::spec("document", e.to_string()))?;
        raw.into_measure()
    }

    /// The same measure with every chamber point shifted by `shift * (1, ..., 1)`.
    pub fn shifted(&self, shift: T) -> Self {
        BiinvariantMeasure {
            field: self.field,
            n: self.n,
            components: self
                .components
                .iter()
                .map(|c| Component {
                    weight: c.weight,
                    law: c.law.clone().shifted(shift),
                })
                .collect(),
        }
    }

    /// Weighted atoms when every component is deterministic.
    pub fn atoms(&self) -> Option<Vec<(T, Vec<T>)>> {
        self.components
            .iter()
            .map(|c| c.law.point().map(|x| (c.weight, x)))
            .collect()
    }

    /// `E_nu[ln det g g^*]`.
    pub fn mean_log_det(&self) -> T {
        self.components.iter().map(|c| c.weight * c.law.mean_sum()).sum()
    }

    pub fn sample_chamber<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let u = T::sample_unit(rng);
        let mut acc = T::zero();
        let last = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc || i == last {
                return c.law.sample(rng);
            }
        }
        unreachable!()
    }

    fn chamber_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<WeylChamberPoint<T>> {
        WeylChamberPoint::from_unsorted(self.sample_chamber(rng))
            .map_err(|e| Error::NonFiniteIntegrand { sample: 0, detail: format!("chamber law emitted {e}") })
    }
}

/// Draws `g = u_1 diag(e^{x/2}) u_2` with `x` from the chamber law and
/// independent Haar `u_1`, `u_2`.
pub fn sample_group_element<T: Real, R: Rng + ?Sized>(
    nu: &BiinvariantMeasure<T>,
    rng: &mut R,
) -> Result<(GroupElement<T>, WeylChamberPoint<T>)> {
    let (m, x) = draw_increment(nu, rng)?;
    Ok((GroupElement::new(nu.field, m)?, x))
}

/// Same draw as [`sample_group_element`], without the invertibility check.
pub(crate) fn draw_increment<T: Real, R: Rng + ?Sized>(
    nu: &BiinvariantMeasure<T>,
    rng: &mut R,
) -> Result<(Matrix<T>, WeylChamberPoint<T>)> {
    let x = nu.chamber_point(rng)?;
    let half = T::lit(0.5);
    let d: Vec<T> = x.coords().iter().map(|&v| (v * half).exp()).collect();
    let u1 = sample_haar::<T, R>(nu.field, nu.n, rng);
    let u2 = sample_haar::<T, R>(nu.field, nu.n, rng);
    Ok((u1.matrix().scale_cols(&d).matmul(u2.matrix()), x))
}

/// How the chamber law enters a nested integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentDesign {
    /// Point masses summed exactly; only the Haar integral is sampled.
    Atoms,
    /// Outer chamber draws, each crossed with every Haar draw.
    Crossed,
    /// One chamber draw per Haar draw.
    Paired,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeasurePlan {
    /// Outer chamber draws for the crossed design.
    pub outer_samples: usize,
    /// Haar draws (and, for the paired design, chamber draws).
    pub inner: McPlan,
}

impl MeasurePlan {
    pub fn new(outer_samples: usize, inner: McPlan) -> Self {
        MeasurePlan { outer_samples, inner }
    }

    /// Atoms when the measure is discrete, otherwise crossed.
    pub fn auto_design<T: Real>(&self, nu: &BiinvariantMeasure<T>) -> MomentDesign {
        if nu.atoms().is_some() {
            MomentDesign::Atoms
        } else {
            MomentDesign::Crossed
        }
    }
}

/// Owned outer part of a design.
enum OuterData<'a, T> {
    Atoms(Vec<(T, Vec<T>)>),
    Rows(Vec<Vec<T>>),
    Paired(Box<ChamberSampler<'a, T>>),
}

impl<'a, T: Real> OuterData<'a, T> {
    fn build(nu: &'a BiinvariantMeasure<T>, plan: &MeasurePlan, design: MomentDesign) -> Result<Self> {
        Ok(match design {
            MomentDesign::Atoms => OuterData::Atoms(
                nu.atoms()
                    .ok_or_else(|| Error::InvalidArgument("atom design needs a discrete chamber law".into()))?,
            ),
            MomentDesign::Crossed => {
                let mut rng = plan.inner.seed.derive(OUTER_STREAM).rng();
                OuterData::Rows(
                    (0..plan.outer_samples)
                        .map(|_| nu.chamber_point(&mut rng).map(WeylChamberPoint::into_coords))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            MomentDesign::Paired => OuterData::Paired(Box::new(move |rng: &mut ChaCha8Rng| {
                nu.chamber_point(rng).map(WeylChamberPoint::into_coords)
            })),
        })
    }

    fn outer(&self) -> Outer<'_, T> {
        match self {
            OuterData::Atoms(a) => Outer::Atoms(a),
            OuterData::Rows(r) => Outer::Sampled(r),
            OuterData::Paired(s) => Outer::Paired(s.as_ref()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefinitenessReport<T> {
    pub positive_definite: bool,
    /// Descending.
    pub eigenvalues: Vec<T>,
    pub min_eigenvalue: T,
    pub numerical_rank: usize,
    /// Unit eigenvector of the smallest eigenvalue when not positive definite.
    pub kernel_direction: Option<Vec<T>>,
}

impl<T: Real> DefinitenessReport<T> {
    pub fn from_matrix(sigma2: &[Vec<T>]) -> Self {
        let n = sigma2.len();
        let e = crate::linalg::symmetric_eigen(sigma2);
        let rank = numerical_rank(&e.values);
        let positive_definite = rank == n;
        let kernel_direction = if positive_definite {
            None
        } else {
            let mut v = e.vectors[n - 1].clone();
            let s: T = v.iter().copied().sum();
            let flip = if s != T::zero() {
                s < T::zero()
            } else {
                v.iter().find(|x| **x != T::zero()).is_some_and(|x| *x < T::zero())
            };
            if flip {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            Some(v)
        };
        DefinitenessReport {
            positive_definite,
            min_eigenvalue: e.values[n - 1],
            eigenvalues: e.values,
            numerical_rank: rank,
            kernel_direction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureMoments<T> {
    pub design: MomentDesign,
    /// `m_1(nu)`, `m_2(nu)` and `Sigma^2(nu)`; standard errors split into the
    /// Haar (inner) and chamber (outer) parts.
    pub moments: MomentSummary<T>,
    pub definiteness: DefinitenessReport<T>,
}

impl<T: Real> MeasureMoments<T> {
    pub fn m1(&self) -> &[T] {
        &self.moments.m1
    }

    pub fn sigma2(&self) -> &[Vec<T>] {
        &self.moments.sigma2
    }
}

/// `m_1(nu)` and `Sigma^2(nu)` with the design picked by [`MeasurePlan::auto_design`].
pub fn measure_moments<T: Real>(nu: &BiinvariantMeasure<T>, plan: &MeasurePlan) -> Result<MeasureMoments<T>> {
    measure_moments_with(nu, plan, plan.auto_design(nu))
}

pub fn measure_moments_with<T: Real>(
    nu: &BiinvariantMeasure<T>,
    plan: &MeasurePlan,
    design: MomentDesign,
) -> Result<MeasureMoments<T>> {
    let data = OuterData::build(nu, plan, design)?;
    let moments = summarize_with(nu.field, nu.n, &plan.inner, &|| data.outer())?;
    let definiteness = DefinitenessReport::from_matrix(&moments.sigma2);
    Ok(MeasureMoments {
        design,
        moments,
        definiteness,
    })
}

/// `m_1(nu)` alone, in a single pass over the draws.
pub fn measure_drift_with<T: Real>(
    nu: &BiinvariantMeasure<T>,
    plan: &MeasurePlan,
    design: MomentDesign,
) -> Result<Vec<RealEstimate<T>>> {
    let data = OuterData::build(nu, plan, design)?;
    let n = nu.n;
    let out = evaluate(nu.field, n, &plan.inner, data.outer(), n, |p, h| h.copy_from_slice(p.f))?;
    Ok((0..n).map(|r| out.estimate(r)).collect())
}

/// `nu~(lambda) = int phi_{i rho - lambda} dnu`.
pub fn spherical_transform<T: Real>(
    nu: &BiinvariantMeasure<T>,
    lambda: &SpectralParameter<T>,
    plan: &MeasurePlan,
) -> Result<ComplexEstimate<T>> {
    transform_stencil(nu, &[(T::one(), lambda.clone())], plan)
}

/// `sum_i w_i nu~(lambda_i)` from one set of draws.
pub fn transform_stencil<T: Real>(
    nu: &BiinvariantMeasure<T>,
    stencil: &[(T, SpectralParameter<T>)],
    plan: &MeasurePlan,
) -> Result<ComplexEstimate<T>> {
    let neg: Vec<(T, SpectralParameter<T>)> = stencil.iter().map(|(w, l)| (*w, l.neg())).collect();
    let design = plan.auto_design(nu);
    let data = OuterData::build(nu, plan, design)?;
    stencil_on(nu.field, nu.n, &plan.inner, data.outer(), &neg)
}

/// `nu~` on a grid of parameters, sharing draws.
pub fn spherical_transform_grid<T: Real>(
    nu: &BiinvariantMeasure<T>,
    grid: &[SpectralParameter<T>],
    plan: &MeasurePlan,
) -> Result<Vec<ComplexEstimate<T>>> {
    grid.iter()
        .map(|l| spherical_transform(nu, l, plan))
        .collect()
}

/// Draws `samples` independent chamber points, in order.
pub fn sample_chamber_points<T: Real>(nu: &BiinvariantMeasure<T>, samples: usize, seed: Seed) -> Vec<Vec<T>> {
    let mut rng = seed.rng();
    (0..samples).map(|_| nu.sample_chamber(&mut rng)).collect()
}

// --- JSON format -----------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    field: FieldTag,
    n: usize,
    components: Vec<RawComponent>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    weight: f64,
    law: RawLaw,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawLaw {
    Point(Vec<f64>),
    SortedIid { marginal: RawMarginal, n: usize },
    Scaled { base: Box<RawLaw>, shift: f64 },
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawMarginal {
    Normal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    LogSpaced(Vec<f64>),
}

fn finite<T: Real>(path: &str, v: f64) -> Result<T> {
    if !v.is_finite() {
        return Err(Error::spec(path, format!("must be finite, got {v}")));
    }
    T::from_f64(v).filter(|t| t.is_finite()).ok_or_else(|| Error::spec(path, "not representable"))
}

impl RawMarginal {
    fn convert<T: Real>(self, path: &str) -> Result<Marginal<T>> {
        Ok(match self {
            RawMarginal::Normal { mu, sigma } => {
                if !(sigma >= 0.0) {
                    return Err(Error::spec(format!("{path}.normal.sigma"), "must be nonnegative"));
                }
                Marginal::Normal {
                    mu: finite(&format!("{path}.normal.mu"), mu)?,
                    sigma: finite(&format!("{path}.normal.sigma"), sigma)?,
                }
            }
            RawMarginal::Uniform { lo, hi } => {
                if !(lo <= hi) {
                    return Err(Error::spec(format!("{path}.uniform"), "needs lo <= hi"));
                }
                Marginal::Uniform {
                    lo: finite(&format!("{path}.uniform.lo"), lo)?,
                    hi: finite(&format!("{path}.uniform.hi"), hi)?,
                }
            }
            RawMarginal::LogSpaced(v) => {
                if v.is_empty() {
                    return Err(Error::spec(format!("{path}.log_spaced"), "list is empty"));
                }
                Marginal::LogSpaced(
                    v.iter()
                        .enumerate()
                        .map(|(i, &x)| finite(&format!("{path}.log_spaced[{i}]"), x))
                        .collect::<Result<_>>()?,
                )
            }
        })
    }
}

impl RawLaw {
    fn convert<T: Real>(self, path: &str) -> Result<ChamberLaw<T>> {
        Ok(match self {
            RawLaw::Point(x) => {
                let p = format!("{path}.point");
                let x: Vec<T> = x
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| finite(&format!("{p}[{i}]"), v))
                    .collect::<Result<_>>()?;
                ChamberLaw::Point(WeylChamberPoint::new(x).map_err(|e| Error::spec(p, e.to_string()))?)
            }
            RawLaw::SortedIid { marginal, n } => {
                if n == 0 {
                    return Err(Error::spec(format!("{path}.sorted_iid.n"), "must be positive"));
                }
                ChamberLaw::SortedIid {
                    marginal: marginal.convert(&format!("{path}.sorted_iid.marginal"))?,
                    n,
                }
            }
            RawLaw::Scaled { base, shift } => ChamberLaw::Scaled {
                base: Box::new(base.convert(&format!("{path}.scaled.base"))?),
                shift: finite(&format!("{path}.scaled.shift"), shift)?,
            },
        })
    }
}

impl RawMeasure {
    fn into_measure<T: Real>(self) -> Result<BiinvariantMeasure<T>> {
        let components = self
            .components
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let path = format!("components[{i}]");
                if !c.weight.is_finite() || c.weight <= 0.0 {
                    return Err(Error::spec(format!("{path}.weight"), format!("must be positive and finite, got {}", c.weight)));
                }
                Ok((finite(&format!("{path}.weight"), c.weight)?, c.law.convert(&format!("{path}.law"))?))
            })
            .collect::<Result<Vec<_>>>()?;
        BiinvariantMeasure::new(self.field, self.n, components)
    }
}

/// Parses the JSON measure format.
pub fn parse_measure<T: Real>(doc: &str) -> Result<BiinvariantMeasure<T>> {
    BiinvariantMeasure::from_json(doc)
}
