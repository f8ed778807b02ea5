use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, McmcSettings, PriorConfig, VerdictKind};
use super::seeds::cell_seeds;
use super::{run_posterior, thread_pool, ExperimentError};
use crate::error::{Error, Result};
use crate::summaries::{posterior_radius, AnalyticDensity, Loss, LossSample, Reference};

/// Exponent of `(n / log n)` in the contraction rate.
pub const TARGET_EXPONENT: f64 = -1.0 / 3.0;

const CONVENTIONS: &str = "mass level and slope interval are harness conventions; \
the rate constant is unknown, so only slopes are checked, never absolute radii";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub radius: f64,
}

/// A replication aborted by a sampler or summary error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCell {
    pub n: usize,
    pub radii: Vec<f64>,
    /// `None` when every replication at this `n` failed.
    pub mean_radius: Option<f64>,
    pub standard_error: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub slope_interval: Option<[f64; 2]>,
    /// Mean radius non-increasing in `n` up to one standard error of each difference.
    pub monotone_trend: bool,
    pub passed: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub scenario: String,
    pub truth: String,
    pub prior: PriorConfig,
    pub mcmc: McmcSettings,
    pub loss: Loss,
    pub mass: f64,
    pub target_exponent: f64,
    /// Radii are divided by `log(n)^c` before fitting when set.
    pub log_correction: Option<f64>,
    pub master_seed: u64,
    pub cells: Vec<RateCell>,
    pub records: Vec<RateRecord>,
    pub failures: Vec<Failure>,
    pub fit: Option<SlopeFit>,
    pub verdict: Verdict,
    pub conventions: String,
}

impl RateReport {
    /// `(n, mean radius)` after the optional log correction.
    pub fn fit_points(&self) -> Vec<(usize, f64)> {
        self.cells
            .iter()
            .filter_map(|c| Some((c.n, corrected(c.mean_radius?, c.n, self.log_correction))))
            .collect()
    }
}

fn corrected(radius: f64, n: usize, log_correction: Option<f64>) -> f64 {
    match log_correction {
        Some(c) => radius / (n as f64).ln().powf(c),
        None => radius,
    }
}

/// Least squares of `log r` on `log(n / log n)`.
pub fn fit_rate_slope(points: &[(usize, f64)]) -> Result<SlopeFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidParameter("need radii at two or more distinct n".into()));
    }
    if let Some(&(n, r)) = points.iter().find(|&&(n, r)| n < 2 || !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid point (n = {n}, radius = {r})")));
    }
    let xs: Vec<f64> = points
        .iter()
        .map(|&(n, _)| {
            let n = n as f64;
            (n / n.ln()).ln()
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if xs.len() > 2 {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (rss / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope,
        stderr,
        intercept,
    })
}

pub(crate) fn mean_and_se(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Some((mean, (var / m).sqrt()))
}

pub(crate) fn monotone_trend(cells: &[(f64, f64)]) -> bool {
    cells
        .windows(2)
        .all(|w| w[1].0 - w[0].0 <= (w[0].1.powi(2) + w[1].1.powi(2)).sqrt())
}

pub(crate) fn grid_tasks(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.experiment
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.experiment.replications).map(move |r| (n, r)))
        .collect()
}

pub(crate) fn save_draws(dir: &Path, n: usize, r: usize, draws: &crate::mcmc::PosteriorDraws) -> std::result::Result<(), ExperimentError> {
    let dir = dir.join("draws");
    fs::create_dir_all(&dir).map_err(|e| ExperimentError::io(&dir, e))?;
    let path = dir.join(format!("n{n}_rep{r}.jsonl"));
    let mut out = std::io::BufWriter::new(fs::File::create(&path).map_err(|e| ExperimentError::io(&path, e))?);
    for p in &draws.draws {
        serde_json::to_writer(&mut out, p).map_err(|e| ExperimentError::Serialize(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| ExperimentError::io(&path, e))?;
    }
    out.flush().map_err(|e| ExperimentError::io(&path, e))
}

/// Runs every `(n, replication)` cell on `jobs` threads. Output does not
/// depend on `jobs`: each cell has its own seeds and results are merged in
/// grid order.
pub fn run_rate_experiment(cfg: &ExperimentConfig, jobs: usize) -> std::result::Result<RateReport, ExperimentError> {
    cfg.validate()?;
    let truth = cfg.true_density()?;
    let spec = cfg.prior_spec()?;
    let loss = cfg.loss()?;
    let log_correction = cfg.log_correction()?;
    let mass = cfg.experiment.mass;
    let draws_dir = cfg.experiment.save_draws.then(|| cfg.output_dir());

    let tasks = grid_tasks(cfg);
    let outcomes: Vec<std::result::Result<f64, String>> = thread_pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(n, r)| {
                let seeds = cell_seeds(cfg.seed, n, r);
                let data = truth.sample(n, &mut ChaCha8Rng::seed_from_u64(seeds.data));
                let draws = run_posterior(&data, &spec, &cfg.mcmc.with_seed(seeds.chain)).map_err(|e| e.to_string())?;
                if let Some(dir) = &draws_dir {
                    save_draws(dir, n, r, &draws).map_err(|e| e.to_string())?;
                }
                let sample = LossSample::from_draws(&draws, &Reference::Analytic(&truth), loss).map_err(|e| e.to_string())?;
                posterior_radius(&sample, mass).map_err(|e| e.to_string())
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (&(n, r), outcome) in tasks.iter().zip(outcomes) {
        let seed = cell_seeds(cfg.seed, n, r).cell;
        match outcome {
            Ok(radius) => records.push(RateRecord {
                n,
                replication: r,
                seed,
                radius,
            }),
            Err(error) => failures.push(Failure {
                n,
                replication: r,
                seed,
                error,
            }),
        }
    }
    let cells: Vec<RateCell> = cfg
        .experiment
        .n_grid
        .iter()
        .map(|&n| {
            let radii: Vec<f64> = records.iter().filter(|r| r.n == n).map(|r| r.radius).collect();
            let summary = mean_and_se(&radii);
            RateCell {
                n,
                radii,
                mean_radius: summary.map(|s| s.0),
                standard_error: summary.map(|s| s.1),
                failures: failures.iter().filter(|f| f.n == n).count(),
            }
        })
        .collect();

    let mut report = RateReport {
        scenario: cfg.scenario.clone(),
        truth: truth.describe(),
        prior: cfg.prior.clone(),
        mcmc: cfg.mcmc,
        loss,
        mass,
        target_exponent: TARGET_EXPONENT,
        log_correction,
        master_seed: cfg.seed,
        cells,
        records,
        failures,
        fit: None,
        verdict: Verdict {
            kind: cfg.experiment.verdict,
            slope_interval: None,
            monotone_trend: false,
            passed: false,
            note: String::new(),
        },
        conventions: CONVENTIONS.into(),
    };
    report.fit = fit_rate_slope(&report.fit_points()).ok();
    let trend: Vec<(f64, f64)> = report
        .cells
        .iter()
        .filter_map(|c| Some((c.mean_radius?, c.standard_error?)))
        .collect();
    let monotone = trend.len() >= 2 && monotone_trend(&trend);
    report.verdict = match cfg.experiment.verdict {
        VerdictKind::Slope => {
            let [lo, hi] = cfg.experiment.slope_interval;
            let (passed, note) = match report.fit {
                Some(fit) => (
                    (lo..=hi).contains(&fit.slope),
                    format!("fitted slope {:.4} (se {:.4}) against interval [{lo}, {hi}]", fit.slope, fit.stderr),
                ),
                None => (false, "fewer than two sample sizes produced radii".into()),
            };
            Verdict {
                kind: VerdictKind::Slope,
                slope_interval: Some([lo, hi]),
                monotone_trend: monotone,
                passed,
                note,
            }
        }
        VerdictKind::Trend => Verdict {
            kind: VerdictKind::Trend,
            slope_interval: None,
            monotone_trend: monotone,
            passed: monotone,
            note: "consistency only: mean radii must decrease along the grid; no slope verdict".into(),
        },
    };
    Ok(report)
}
