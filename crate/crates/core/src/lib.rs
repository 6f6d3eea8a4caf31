//! Spherical functions of the Gelfand pair `(GL_n(F), U_n(F))` evaluated as
//! Haar integrals over principal minors, the moment functions built from them,
//! and simulation tools for biinvariant random walks on `GL_n(F)`.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom of this file fix the scalar to `f64`.

mod design;
pub mod clt;
pub mod error;
pub mod field;
pub mod group;
pub mod haar;
pub mod lemmas;
pub mod linalg;
pub mod measures;
pub mod mc;
pub mod osc;
pub mod scalar;
pub mod spherical;
pub mod walk;

pub use clt::{
    clt_curve, clt_ensemble, clt_ensemble_with, gaussian_compare, gaussian_compare_to, CltConfig, CltSample,
    DirectionKs, GaussianReport,
};
pub use error::{Error, Result};
pub use field::FieldTag;
pub use group::{
    chamber_coordinates, det_floor, principal_minor_logs, singular_log_spectrum, unitary_tol, GroupElement,
    PosDefMatrix, UnitaryElement, WeylChamberPoint,
};
pub use haar::{haar_expect, haar_expect_complex, haar_samples, sample_haar, McPlan, Seed};
pub use lemmas::{run_lemma_suite, Fault, LemmaCheck, VerifyConfig, VerifyReport};
pub use linalg::Matrix;
pub use mc::{ComplexEstimate, McEstimate, RealEstimate, Welford};
pub use measures::{
    measure_moments, measure_moments_with, parse_measure, sample_group_element, spherical_transform,
    BiinvariantMeasure, ChamberLaw, DefinitenessReport, Marginal, MeasureMoments, MeasurePlan, MomentDesign,
};
pub use osc::{oscillation_ratio_scan, parse_lambda_grid, OscillationScanReport};
pub use scalar::Real;
pub use spherical::{
    moment_fn, moment_summary, rho, spherical_fn, spherical_fn_grid, DoubleCoset, MomentSummary, MultiIndex,
    SpectralParameter,
};
pub use walk::{run_walk, run_walk_direct, WalkTrajectory};

pub type GroupElementF64 = GroupElement<f64>;
pub type UnitaryElementF64 = UnitaryElement<f64>;
pub type WeylChamberPointF64 = WeylChamberPoint<f64>;
pub type SpectralParameterF64 = SpectralParameter<f64>;
pub type DoubleCosetF64 = DoubleCoset<f64>;
pub type BiinvariantMeasureF64 = BiinvariantMeasure<f64>;
pub type MomentSummaryF64 = MomentSummary<f64>;
pub type MeasureMomentsF64 = MeasureMoments<f64>;
pub type CltSampleF64 = CltSample<f64>;
pub type WalkTrajectoryF64 = WalkTrajectory<f64>;
pub type OscillationScanReportF64 = OscillationScanReport<f64>;
pub type MatrixF64 = Matrix<f64>;
