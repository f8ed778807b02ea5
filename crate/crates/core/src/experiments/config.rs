use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::truth::TrueDensity;
use super::ExperimentError;
use crate::mcmc::McmcConfig;
use crate::priors::{BaseMeasure, ComponentCountLaw, PriorSpec};
use crate::summaries::{AnalyticDensity, Loss};

pub const DEFAULT_N_GRID: [usize; 6] = [250, 500, 1000, 2000, 4000, 8000];
pub const DEFAULT_SLOPE_INTERVAL: [f64; 2] = [-0.45, -0.20];

/// A single experiment, read from one JSON document. Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub prior: PriorConfig,
    pub truth: TruthConfig,
    #[serde(default)]
    pub mcmc: McmcSettings,
    #[serde(default)]
    pub experiment: ExperimentSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorFamily {
    Dirichlet,
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub kind: PriorFamily,
    /// Dirichlet-process mass.
    #[serde(rename = "A", default = "one")]
    pub mass: f64,
    #[serde(rename = "t", default = "two")]
    pub exponent: f64,
    /// Support bound of the base measure; omitted (or `"truth"`) means the
    /// truth's support, `null` means the half line.
    #[serde(rename = "L", default = "missing_bound", with = "bound")]
    pub support: BoundSetting,
    #[serde(rename = "K_max", default = "fifty")]
    pub k_max: usize,
    #[serde(default = "one")]
    pub dirichlet_weight: f64,
    #[serde(default = "one")]
    pub tail_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundSetting {
    FromTruth,
    Unbounded,
    Bounded(f64),
}

fn missing_bound() -> BoundSetting {
    BoundSetting::FromTruth
}

mod bound {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::BoundSetting;

    pub fn serialize<S: Serializer>(b: &BoundSetting, s: S) -> Result<S::Ok, S::Error> {
        match b {
            BoundSetting::Bounded(l) => l.serialize(s),
            BoundSetting::Unbounded => s.serialize_none(),
            BoundSetting::FromTruth => s.serialize_str("truth"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Word(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BoundSetting, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            Some(Raw::Number(l)) => Ok(BoundSetting::Bounded(l)),
            Some(Raw::Word(w)) if w == "truth" => Ok(BoundSetting::FromTruth),
            Some(Raw::Word(w)) => Err(serde::de::Error::custom(format!(
                "L must be a number, null or \"truth\", got {w:?}"
            ))),
            None => Ok(BoundSetting::Unbounded),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthFamily {
    Uniform,
    Triangular,
    TruncatedExponential,
    Exponential,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthParams {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub support: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthConfig {
    pub family: TruthFamily,
    #[serde(default)]
    pub params: TruthParams,
    /// Tail constants of `f₀(x) ≤ e^{−β x^τ}`, half-line truths only.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
}

impl TruthConfig {
    pub fn density(&self) -> Result<TrueDensity, ExperimentError> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| ExperimentError::Config(format!("truth.params.{name} is required for {:?}", self.family)))
        };
        let f = match self.family {
            TruthFamily::Uniform => TrueDensity::Uniform {
                support: self.params.support.unwrap_or(1.0),
            },
            TruthFamily::Triangular => TrueDensity::Triangular {
                support: self.params.support.unwrap_or(1.0),
            },
            TruthFamily::TruncatedExponential => TrueDensity::TruncatedExponential {
                support: self.params.support.unwrap_or(1.0),
                rate: need(self.params.rate, "rate")?,
            },
            TruthFamily::Exponential => {
                if self.params.support.is_some() {
                    return Err(ExperimentError::Config("the exponential truth lives on the half line; drop params.L".into()));
                }
                TrueDensity::Exponential {
                    rate: need(self.params.rate, "rate")?,
                }
            }
        };
        f.validate().map_err(ExperimentError::Config)?;
        Ok(f)
    }

    /// `(β, τ)` on the half line, checked against the truth's tail.
    pub fn tail(&self) -> Result<Option<(f64, f64)>, ExperimentError> {
        let f = self.density()?;
        if f.support().is_some() {
            return Ok(None);
        }
        let (beta, tau) = match (self.beta, self.tau) {
            (Some(b), Some(t)) if b > 0.0 && t > 0.0 => (b, t),
            _ => {
                return Err(ExperimentError::Config(
                    "half-line truths need positive truth.beta and truth.tau".into(),
                ))
            }
        };
        if !f.satisfies_tail(beta, tau) {
            return Err(ExperimentError::Config(format!(
                "{} does not satisfy f(x) <= exp(-{beta} x^{tau}) for large x",
                f.describe()
            )));
        }
        Ok(Some((beta, tau)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSettings {
    pub iterations: usize,
    pub burn_in: usize,
    pub thinning: usize,
}

impl Default for McmcSettings {
    fn default() -> Self {
        let d = McmcConfig::default();
        Self {
            iterations: d.iterations,
            burn_in: d.burn_in,
            thinning: d.thinning,
        }
    }
}

impl McmcSettings {
    pub fn with_seed(&self, seed: u64) -> McmcConfig {
        McmcConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thinning: self.thinning,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    L1,
    Hellinger,
    Pointwise,
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    /// Fitted slope must fall in `slope_interval`.
    Slope,
    /// Mean radii must decrease along the grid; no slope verdict.
    Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSettings {
    #[serde(default = "default_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "twenty")]
    pub replications: usize,
    #[serde(default = "default_loss")]
    pub loss: LossKind,
    /// Sup-norm interval; defaults to `[0.1 L, 0.9 L]`.
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Pointwise location; defaults to `L/2`.
    #[serde(default)]
    pub x: Option<f64>,
    /// `ε` in the boundary constant of the corrected Grenander estimator.
    #[serde(default = "default_boundary_eps")]
    pub boundary_eps: f64,
    #[serde(default = "default_verdict")]
    pub verdict: VerdictKind,
    #[serde(default = "default_slope_interval")]
    pub slope_interval: [f64; 2],
    /// Writes every retained draw to `draws/*.jsonl`.
    #[serde(default)]
    pub save_draws: bool,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            n_grid: default_grid(),
            replications: twenty(),
            loss: default_loss(),
            interval: None,
            mass: default_mass(),
            x: None,
            boundary_eps: default_boundary_eps(),
            verdict: default_verdict(),
            slope_interval: default_slope_interval(),
            save_draws: false,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn fifty() -> usize {
    50
}
fn twenty() -> usize {
    20
}
fn default_grid() -> Vec<usize> {
    DEFAULT_N_GRID.to_vec()
}
fn default_loss() -> LossKind {
    LossKind::L1
}
fn default_mass() -> f64 {
    0.9
}
fn default_boundary_eps() -> f64 {
    4.0
}
fn default_verdict() -> VerdictKind {
    VerdictKind::Slope
}
fn default_slope_interval() -> [f64; 2] {
    DEFAULT_SLOPE_INTERVAL
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(&self.scenario))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.scenario.is_empty() {
            return bad("scenario must be non-empty".into());
        }
        let e = &self.experiment;
        if e.n_grid.is_empty() {
            return bad("experiment.n_grid must be non-empty".into());
        }
        if let Some(&n) = e.n_grid.iter().find(|&&n| n < 2) {
            return bad(format!("experiment.n_grid entries must be at least 2, got {n}"));
        }
        if e.replications == 0 {
            return bad("experiment.replications must be at least 1".into());
        }
        if !(e.mass > 0.0 && e.mass <= 1.0) {
            return bad(format!("experiment.mass {} must lie in (0, 1]", e.mass));
        }
        if !(e.boundary_eps > 0.0) {
            return bad("experiment.boundary_eps must be positive".into());
        }
        if e.slope_interval[0] > e.slope_interval[1] {
            return bad("experiment.slope_interval must be ordered".into());
        }
        self.mcmc
            .with_seed(0)
            .validate()
            .map_err(|e| ExperimentError::Config(format!("mcmc: {e}")))?;
        self.truth.tail()?;
        self.prior_spec()?;
        self.loss()?;
        Ok(())
    }

    pub fn true_density(&self) -> Result<TrueDensity, ExperimentError> {
        self.truth.density()
    }

    pub fn prior_spec(&self) -> Result<PriorSpec, ExperimentError> {
        let p = &self.prior;
        let truth = self.true_density()?;
        let support = match p.support {
            BoundSetting::Bounded(l) => Some(l),
            BoundSetting::Unbounded => None,
            BoundSetting::FromTruth => truth.support(),
        };
        let cfg = |e: crate::Error| ExperimentError::Config(format!("prior: {e}"));
        let base = match support {
            Some(l) => {
                if let Some(t) = truth.support() {
                    if t > l {
                        return Err(ExperimentError::Config(format!(
                            "prior.L = {l} is smaller than the truth's support {t}"
                        )));
                    }
                }
                BaseMeasure::bounded(p.exponent, l).map_err(cfg)?
            }
            None => BaseMeasure::unbounded(p.exponent, p.tail_rate).map_err(cfg)?,
        };
        if truth.support().is_none() && support.is_some() {
            return Err(ExperimentError::Config("a half-line truth needs an unbounded prior (L = null)".into()));
        }
        match p.kind {
            PriorFamily::Dirichlet => PriorSpec::dirichlet(base, p.mass).map_err(cfg),
            PriorFamily::Finite => {
                let law = ComponentCountLaw::factorial_decay(p.k_max).map_err(cfg)?;
                PriorSpec::finite(base, law, p.dirichlet_weight).map_err(cfg)
            }
        }
    }

    /// The configured loss with defaults resolved against the truth's support.
    pub fn loss(&self) -> Result<Loss, ExperimentError> {
        let truth = self.true_density()?;
        let l = truth.effective_support();
        let e = &self.experiment;
        let loss = match e.loss {
            LossKind::L1 => Loss::L1,
            LossKind::Hellinger => Loss::Hellinger,
            LossKind::Pointwise => Loss::Pointwise { x: e.x.unwrap_or(l / 2.0) },
            LossKind::Sup => {
                let [a, b] = e.interval.unwrap_or([0.1 * l, 0.9 * l]);
                Loss::Sup { a, b }
            }
        };
        match loss {
            Loss::Pointwise { x } if !(x > 0.0 && x < l) => Err(ExperimentError::Config(format!(
                "experiment.x = {x} must lie inside (0, {l})"
            ))),
            Loss::Sup { a, b } if !(0.0 <= a && a < b && b <= l) => Err(ExperimentError::Config(format!(
                "experiment.interval [{a}, {b}] must satisfy 0 <= a < b <= {l}"
            ))),
            _ => Ok(loss),
        }
    }

    /// Exponent `1/τ` of the extra `log(n)` factor on the half line.
    pub fn log_correction(&self) -> Result<Option<f64>, ExperimentError> {
        Ok(self.truth.tail()?.map(|(_, tau)| 1.0 / tau))
    }
}
