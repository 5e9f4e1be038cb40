//! Spin squeezing of Λ-type atoms in a driven optical cavity.
//!
//! The crate linearizes the quantum Langevin equations of either the full
//! three-level model ([`lambda3`]) or the effective two-level Raman model
//! ([`efftwo`]) around a steady state, solves for zero-time covariances and
//! noise spectra ([`noise`]), and extracts normalized spin variances in the
//! mean-spin frame ([`spinframe`]). [`studies`] bundles the parameter scans
//! used to explore self-squeezing, squeezing transfer and model agreement.
//!
//! Units: the effective model measures time in units of the ground-state
//! decay rate γ0, the three-level model in whatever frequency unit its
//! parameters are given in (γ = 1 is customary). The cavity field is carried
//! internally as `a = √τ·A2`.

pub mod efftwo;
pub mod error;
pub mod lambda3;
pub(crate) mod linalg;
pub mod noise;
pub mod params;
pub mod spinframe;
pub mod studies;

pub use efftwo::{FluctuationSystem, SteadyState2L};
pub use error::{Error, Result};
pub use lambda3::{AtomicBasis3, OperatorWord, SteadyState3L};
pub use linalg::{reorder, CMatrix};
pub use noise::{CovarianceMatrix, SpectrumMatrix};
pub use params::{Drive, EffectiveParams, InputNoise, ThreeLevelParams};
pub use spinframe::SqueezingReport;
pub use studies::OperatingPoint;

pub use num_complex::Complex64;
