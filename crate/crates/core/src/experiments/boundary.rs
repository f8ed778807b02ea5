use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, McmcSettings, PriorConfig};
use super::rate::{grid_tasks, mean_and_se, save_draws, Failure};
use super::seeds::cell_seeds;
use super::{run_posterior, thread_pool, ExperimentError};
use crate::grenander::{boundary_constant, boundary_modified_eval, grenander_fit};
use crate::summaries::{posterior_median_pointwise, AnalyticDensity};

/// Estimates of `f₀(0)` from one simulated data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRecord {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    /// Raw Grenander `f̂ₙ(0⁺)`.
    pub grenander: f64,
    /// Boundary-corrected `f̃ₙ(0)`.
    pub modified: f64,
    /// Posterior median of `f_P(0)`.
    pub posterior_median: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub mae: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCell {
    pub n: usize,
    /// `cₙ n^{−1/3}`, where the corrected estimator reads off `f̂ₙ`.
    pub shift: f64,
    pub grenander: Option<ErrorSummary>,
    pub modified: Option<ErrorSummary>,
    pub posterior_median: Option<ErrorSummary>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryVerdict {
    /// Posterior-median MAE at the largest `n` below half of that at the smallest.
    pub median_halves: bool,
    /// Same comparison for the raw Grenander estimator.
    pub grenander_halves: bool,
    pub passed: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub scenario: String,
    pub truth: String,
    pub truth_at_zero: f64,
    pub prior: PriorConfig,
    pub mcmc: McmcSettings,
    pub boundary_eps: f64,
    pub master_seed: u64,
    pub cells: Vec<BoundaryCell>,
    pub records: Vec<BoundaryRecord>,
    pub failures: Vec<Failure>,
    pub verdict: BoundaryVerdict,
}

fn summarize(errors: &[f64]) -> Option<ErrorSummary> {
    mean_and_se(errors).map(|(mae, standard_error)| ErrorSummary { mae, standard_error })
}

/// Mean absolute error at `x = 0` of the raw Grenander estimator, its
/// boundary-corrected variant and the posterior median, per sample size.
pub fn run_boundary_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<BoundaryReport, ExperimentError> {
    cfg.validate()?;
    let truth = cfg.true_density()?;
    let spec = cfg.prior_spec()?;
    let support = truth.effective_support();
    let eps = cfg.experiment.boundary_eps;
    let f0 = truth.pdf(0.0);
    let draws_dir = cfg.experiment.save_draws.then(|| cfg.output_dir());

    let tasks = grid_tasks(cfg);
    let outcomes: Vec<Result<(f64, f64, f64), String>> = thread_pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(n, r)| {
                let seeds = cell_seeds(cfg.seed, n, r);
                let data = truth.sample(n, &mut ChaCha8Rng::seed_from_u64(seeds.data));
                let fit = grenander_fit(&data).map_err(|e| e.to_string())?;
                let modified = boundary_modified_eval(&fit, 0.0, n, eps, support).map_err(|e| e.to_string())?;
                let draws = run_posterior(&data, &spec, &cfg.mcmc.with_seed(seeds.chain)).map_err(|e| e.to_string())?;
                if let Some(dir) = &draws_dir {
                    save_draws(dir, n, r, &draws).map_err(|e| e.to_string())?;
                }
                let median = posterior_median_pointwise(&draws, 0.0).map_err(|e| e.to_string())?;
                Ok((fit.at_zero(), modified, median))
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (&(n, r), outcome) in tasks.iter().zip(outcomes) {
        let seed = cell_seeds(cfg.seed, n, r).cell;
        match outcome {
            Ok((grenander, modified, posterior_median)) => records.push(BoundaryRecord {
                n,
                replication: r,
                seed,
                grenander,
                modified,
                posterior_median,
            }),
            Err(error) => failures.push(Failure {
                n,
                replication: r,
                seed,
                error,
            }),
        }
    }

    let cells: Vec<BoundaryCell> = cfg
        .experiment
        .n_grid
        .iter()
        .map(|&n| {
            let at_n: Vec<&BoundaryRecord> = records.iter().filter(|r| r.n == n).collect();
            let errors = |pick: fn(&BoundaryRecord) -> f64| -> Vec<f64> {
                at_n.iter().map(|&r| (pick(r) - f0).abs()).collect()
            };
            BoundaryCell {
                n,
                shift: boundary_constant(n, eps) * (n as f64).powf(-1.0 / 3.0),
                grenander: summarize(&errors(|r| r.grenander)),
                modified: summarize(&errors(|r| r.modified)),
                posterior_median: summarize(&errors(|r| r.posterior_median)),
                failures: failures.iter().filter(|f| f.n == n).count(),
            }
        })
        .collect();

    let halves = |pick: fn(&BoundaryCell) -> Option<ErrorSummary>| -> Option<(bool, f64, f64)> {
        let first = pick(cells.first()?)?.mae;
        let last = pick(cells.last()?)?.mae;
        Some((last < 0.5 * first, first, last))
    };
    let verdict = match (halves(|c| c.posterior_median), halves(|c| c.grenander)) {
        (Some((median_halves, m0, m1)), Some((grenander_halves, g0, g1))) => BoundaryVerdict {
            median_halves,
            grenander_halves,
            passed: median_halves && !grenander_halves && cells.len() >= 2,
            note: format!(
                "posterior median MAE {m0:.4} -> {m1:.4}; raw Grenander MAE {g0:.4} -> {g1:.4}"
            ),
        },
        _ => BoundaryVerdict {
            median_halves: false,
            grenander_halves: false,
            passed: false,
            note: "no estimates at the first or last sample size".into(),
        },
    };

    Ok(BoundaryReport {
        scenario: cfg.scenario.clone(),
        truth: truth.describe(),
        truth_at_zero: f0,
        prior: cfg.prior.clone(),
        mcmc: cfg.mcmc,
        boundary_eps: eps,
        master_seed: cfg.seed,
        cells,
        records,
        failures,
        verdict,
    })
}
