//! Seeded Monte Carlo harness: simulate from a known truth over a grid of
//! sample sizes, run the posterior, summarise, fit the log-log slope and
//! write reports.

mod boundary;
mod config;
mod rate;
mod report;
pub mod seeds;
mod truth;

use std::path::PathBuf;

use thiserror::Error;

use crate::mcmc::{run_dp_posterior, run_finite_mixture_posterior, McmcConfig, PosteriorDraws};
use crate::priors::{PriorKind, PriorSpec};

pub use boundary::{
    run_boundary_experiment, BoundaryCell, BoundaryRecord, BoundaryReport, BoundaryVerdict, ErrorSummary,
};
pub use config::{
    BoundSetting, ExperimentConfig, ExperimentSettings, LossKind, McmcSettings, PriorConfig, PriorFamily,
    TruthConfig, TruthFamily, TruthParams, VerdictKind, DEFAULT_N_GRID, DEFAULT_SLOPE_INTERVAL,
};
pub use rate::{
    fit_rate_slope, run_rate_experiment, Failure, RateCell, RateRecord, RateReport, SlopeFit, Verdict,
    TARGET_EXPONENT,
};
pub use report::{emit_report, read_radii_csv, render_svg, write_outputs, Format, RadiusRow, Report};
pub use truth::{TrueDensity, TAIL_QUANTILE};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl ExperimentError {
    /// Process exit code: 2 for configuration errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Runs whichever sampler matches the prior.
pub fn run_posterior(data: &[f64], spec: &PriorSpec, cfg: &McmcConfig) -> crate::Result<PosteriorDraws> {
    match spec.kind {
        PriorKind::Dirichlet { .. } => run_dp_posterior(data, spec, cfg),
        PriorKind::Finite { .. } => run_finite_mixture_posterior(data, spec, cfg),
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, ExperimentError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))
}
