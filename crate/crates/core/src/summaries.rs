//! Posterior summaries: the pointwise posterior median, loss samples against a
//! reference density, radius quantiles and pointwise credible bands.

use serde::{Deserialize, Serialize};

use crate::distance::{check_interval, distance, Metric};
use crate::error::{Error, Result};
use crate::mcmc::PosteriorDraws;
use crate::quadrature::adaptive_simpson;
use crate::scalar::Scalar;
use crate::step::StepDensity;

/// A non-step, non-increasing reference density with closed-form CDF.
pub trait AnalyticDensity: Send + Sync {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    /// Upper end of the support, `None` on the half line.
    fn support(&self) -> Option<f64>;
    /// `sup{x : f(x) > level}`, or 0 when `f(0) ≤ level`.
    fn level_crossing(&self, level: f64) -> f64;
    /// `∫_a^b √f`. Defaults to adaptive Simpson at absolute tolerance 1e-8.
    fn sqrt_integral(&self, a: f64, b: f64) -> f64 {
        adaptive_simpson(&|x| self.pdf(x).max(0.0).sqrt(), a, b, 1e-8)
    }
    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Loss {
    L1,
    Hellinger,
    Pointwise { x: f64 },
    Sup { a: f64, b: f64 },
}

impl Loss {
    pub fn label(&self) -> String {
        match self {
            Loss::L1 => "l1".into(),
            Loss::Hellinger => "hellinger".into(),
            Loss::Pointwise { x } => format!("pointwise({x})"),
            Loss::Sup { a, b } => format!("sup[{a},{b}]"),
        }
    }
}

pub enum Reference<'a> {
    Step(&'a StepDensity<f64>),
    Analytic(&'a dyn AnalyticDensity),
}

impl Reference<'_> {
    fn describe(&self) -> String {
        match self {
            Reference::Step(s) => format!("step density with {} pieces", s.pieces()),
            Reference::Analytic(a) => a.describe(),
        }
    }

    pub fn loss(&self, f: &StepDensity<f64>, loss: Loss) -> Result<f64> {
        match self {
            Reference::Step(g) => match loss {
                Loss::L1 => distance(f, g, Metric::L1),
                Loss::Hellinger => distance(f, g, Metric::Hellinger),
                Loss::Sup { a, b } => distance(f, g, Metric::Sup { a, b }),
                Loss::Pointwise { x } => Ok((f.eval(x) - g.eval(x)).abs()),
            },
            Reference::Analytic(g) => analytic_loss(f, *g, loss),
        }
    }
}

/// Loss between a step density and an analytic density. The L1, sup and
/// pointwise losses are exact; Hellinger uses [`AnalyticDensity::sqrt_integral`].
pub fn analytic_loss(f: &StepDensity<f64>, g: &dyn AnalyticDensity, loss: Loss) -> Result<f64> {
    match loss {
        Loss::Pointwise { x } => Ok((f.eval(x) - g.pdf(x)).abs()),
        Loss::L1 => {
            let mut total = 0.0;
            for (l, r, c) in f.iter_pieces() {
                // g > c on [l, x*) and g ≤ c on (x*, r].
                let cross = g.level_crossing(c).clamp(l, r);
                total += (g.cdf(cross) - g.cdf(l)) - c * (cross - l);
                total += c * (r - cross) - (g.cdf(r) - g.cdf(cross));
            }
            total += 1.0 - g.cdf(f.right_end());
            Ok(total.max(0.0))
        }
        Loss::Hellinger => {
            let mut sq = 0.0;
            for (l, r, c) in f.iter_pieces() {
                let upper = g.support().map_or(r, |s| r.min(s));
                let root = if upper > l { g.sqrt_integral(l, upper) } else { 0.0 };
                sq += (g.cdf(r) - g.cdf(l)) + c * (r - l) - 2.0 * c.sqrt() * root;
            }
            sq += 1.0 - g.cdf(f.right_end());
            Ok((0.5 * sq).max(0.0).sqrt())
        }
        Loss::Sup { a, b } => {
            check_interval(a, b, &[f.support_bound(), g.support()])?;
            let mut sup = (f.eval(a) - g.pdf(a)).abs();
            for (l, r, c) in f.iter_pieces() {
                if r > a && l < b {
                    sup = sup.max((c - g.pdf(l.max(a))).abs());
                    sup = sup.max((c - g.pdf(r.min(b))).abs());
                }
            }
            if f.right_end() < b {
                sup = sup.max(g.pdf(f.right_end().max(a)));
            }
            Ok(sup)
        }
    }
}

/// Per-draw losses against a reference density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSample {
    pub values: Vec<f64>,
    pub loss: Loss,
    pub reference: String,
}

impl LossSample {
    pub fn from_draws(draws: &PosteriorDraws, reference: &Reference<'_>, loss: Loss) -> Result<Self> {
        let values = draws
            .draws
            .iter()
            .map(|p| match loss {
                Loss::Pointwise { x } => {
                    let truth = match reference {
                        Reference::Step(g) => g.eval(x),
                        Reference::Analytic(g) => g.pdf(x),
                    };
                    Ok((p.eval(x) - truth).abs())
                }
                _ => reference.loss(&p.to_step(None)?, loss),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            values,
            loss,
            reference: reference.describe(),
        })
    }
}

/// `inf{t : #{v ≤ t}/N > 1/2}` over the given values.
pub fn median_of<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Empty("draws"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("values must not be NaN"));
    Ok(sorted[sorted.len() / 2])
}

/// Posterior median of `f_P(x)` under the strict `> 1/2` definition.
pub fn posterior_median_pointwise(draws: &PosteriorDraws, x: f64) -> Result<f64> {
    median_of(&draws.values_at(x))
}

/// Smallest value `t` with `#{v ≤ t}/N ≥ p`; `p = 0` gives the minimum.
pub fn quantile_at_least<T: Scalar>(sorted: &[T], p: f64) -> T {
    let n = sorted.len();
    let k = ((p * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[k.min(n) - 1]
}

/// Smallest value `t` with `#{v ≤ t}/N > p`, clamped to the maximum.
pub fn quantile_above<T: Scalar>(sorted: &[T], p: f64) -> T {
    let n = sorted.len();
    let k = ((p * n as f64) + 1e-9).floor() as usize;
    sorted[k.min(n - 1)]
}

/// Smallest radius whose ball holds at least a `mass` fraction of the losses.
pub fn posterior_radius(sample: &LossSample, mass: f64) -> Result<f64> {
    radius_of(&sample.values, mass)
}

pub fn radius_of<T: Scalar>(values: &[T], mass: f64) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Empty("loss sample"));
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(Error::InvalidParameter(format!("mass {mass} must lie in (0, 1]")));
    }
    if values.iter().all(|v| v.is_infinite()) {
        return Err(Error::AllInfinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("losses must not be NaN"));
    Ok(quantile_at_least(&sorted, mass))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub x: f64,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
    pub mean: f64,
}

/// Pointwise equal-tailed band of `f_P(x)` at credibility `level`.
pub fn credible_band(draws: &PosteriorDraws, grid: &[f64], level: f64) -> Result<Vec<BandPoint>> {
    if draws.is_empty() {
        return Err(Error::Empty("draws"));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!("level {level} must lie in [0, 1]")));
    }
    let tail = (1.0 - level) / 2.0;
    grid.iter()
        .map(|&x| {
            let mut values = draws.values_at(x);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(BandPoint {
                x,
                lower: quantile_at_least(&values, tail),
                median: values[values.len() / 2],
                upper: quantile_above(&values, 1.0 - tail),
                mean,
            })
        })
        .collect()
}
