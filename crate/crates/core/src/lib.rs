//! Estimation of monotone non-increasing densities on `[0, L]` or the half
//! line, written as mixtures of uniform kernels `𝟙[0 ≤ x ≤ θ]/θ`.
//!
//! The crate provides
//! - exact step-density arithmetic ([`AtomicMixture`], [`StepDensity`], distances),
//! - Dirichlet-process and finite-mixture priors on the mixing distribution,
//! - posterior samplers for both priors,
//! - the Grenander estimator and its boundary-corrected variant,
//! - posterior summaries and a seeded Monte Carlo harness for contraction-rate studies.
//!
//! Density arithmetic is generic over [`Scalar`] (`f32` or `f64`); the
//! samplers and the harness run in `f64`, see the aliases below.

pub mod distance;
pub mod error;
pub mod experiments;
pub mod grenander;
pub mod mcmc;
pub mod mixture;
pub mod partition;
pub mod priors;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod step;
pub mod summaries;

pub use distance::{distance, kl_divergence, Divergence, Metric};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type AtomicMixture<T = f64> = mixture::AtomicMixture<T>;
pub type StepDensity<T = f64> = step::StepDensity<T>;
pub type GrenanderFit<T = f64> = grenander::GrenanderFit<T>;
pub type PartitionTrace<T = f64> = partition::PartitionTrace<T>;

pub type Mixture64 = mixture::AtomicMixture<f64>;
pub type Mixture32 = mixture::AtomicMixture<f32>;
pub type Step64 = step::StepDensity<f64>;
pub type Step32 = step::StepDensity<f32>;
pub type Grenander64 = grenander::GrenanderFit<f64>;
pub type Grenander32 = grenander::GrenanderFit<f32>;
