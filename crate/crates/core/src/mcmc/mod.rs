//! Posterior samplers for the mixing distribution.
//!
//! Both priors are conjugate with the uniform kernel: given the observations
//! attached to a kernel, its scale has density `∝ α(θ) θ^{−n_c}` on
//! `[max of the observations, L]`, drawn exactly by [`conjugate_theta_draw`].

mod dp;
mod ess;
mod finite;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::AtomicMixture;
use crate::priors::BaseMeasure;

pub use dp::{run_dp_posterior, DpSampler};
pub use ess::{effective_sample_size, Ess};
pub use finite::{run_finite_mixture_posterior, FiniteMixtureSampler, FiniteState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 5000,
            burn_in: 1000,
            thinning: 2,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidParameter("thinning must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether the state after sweep `it` (0-based) is retained.
    pub fn keeps(&self, it: usize) -> bool {
        it >= self.burn_in && (it - self.burn_in) % self.thinning == 0
    }
}

/// Retained posterior draws of the mixing distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub draws: Vec<AtomicMixture<f64>>,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    /// Per-move acceptance fractions (finite-mixture sampler only).
    pub acceptance_rates: BTreeMap<String, f64>,
    /// Number of occupied clusters (DP) or components (finite mixture) per retained draw.
    pub cluster_count_trace: Vec<usize>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// `f_P(x)` for every draw.
    pub fn values_at(&self, x: f64) -> Vec<f64> {
        self.draws.iter().map(|p| p.eval(x)).collect()
    }
}

/// Exact draw of a kernel scale given `count` attached observations with
/// maximum `cluster_max`: density `∝ θ^{t − count}` on `[cluster_max, L]`
/// (times `e^{−rθ}` on the half line).
pub fn conjugate_theta_draw<R: Rng + ?Sized>(
    cluster_max: f64,
    count: usize,
    base: &BaseMeasure,
    rng: &mut R,
) -> Result<f64> {
    if cluster_max < 0.0 || (count > 0 && !(cluster_max > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "cluster maximum {cluster_max} must be positive"
        )));
    }
    if let Some(l) = base.support() {
        if cluster_max > l {
            return Err(Error::Domain {
                value: cluster_max,
                bound: l,
            });
        }
    }
    Ok(base.scale_posterior(cluster_max, count, rng))
}

pub(crate) fn check_data(data: &[f64], base: &BaseMeasure) -> Result<()> {
    let bound = base.support().unwrap_or(f64::INFINITY);
    match data.iter().find(|&&x| !(x > 0.0) || !(x <= bound) || !x.is_finite()) {
        Some(&bad) => Err(Error::Domain { value: bad, bound }),
        None => Ok(()),
    }
}
