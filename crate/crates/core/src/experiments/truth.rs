use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::summaries::AnalyticDensity;

/// Upper quantile used as the effective support of half-line truths.
pub const TAIL_QUANTILE: f64 = 1.0 - 1e-8;

/// True data-generating density of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrueDensity {
    /// `1/L` on `[0, L]`.
    Uniform { support: f64 },
    /// `2(L − x)/L²` on `[0, L]`.
    Triangular { support: f64 },
    /// `r e^{−rx} / (1 − e^{−rL})` on `[0, L]`.
    TruncatedExponential { support: f64, rate: f64 },
    /// `r e^{−rx}` on the half line.
    Exponential { rate: f64 },
}

impl TrueDensity {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {v}"))
            }
        };
        match *self {
            TrueDensity::Uniform { support } | TrueDensity::Triangular { support } => positive("L", support),
            TrueDensity::TruncatedExponential { support, rate } => {
                positive("L", support)?;
                positive("rate", rate)
            }
            TrueDensity::Exponential { rate } => positive("rate", rate),
        }
    }

    /// Whether `f₀(x) ≤ e^{−β x^τ}` for all large `x`. Bounded truths vanish
    /// beyond `L` and pass trivially.
    pub fn satisfies_tail(&self, beta: f64, tau: f64) -> bool {
        match *self {
            TrueDensity::Exponential { rate } => {
                // r e^{−rx} ≤ e^{−βx^τ} ⇔ ln r − rx + βx^τ ≤ 0 eventually.
                tau < 1.0 || (tau == 1.0 && (beta < rate || (beta == rate && rate <= 1.0)))
            }
            _ => true,
        }
    }

    /// `L`, or the `1 − 10⁻⁸` quantile on the half line.
    pub fn effective_support(&self) -> f64 {
        match *self {
            TrueDensity::Exponential { rate } => -(1.0 - TAIL_QUANTILE).ln() / rate,
            _ => self.support().unwrap(),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            TrueDensity::Uniform { support } => u * support,
            TrueDensity::Triangular { support } => support * (1.0 - (1.0 - u).sqrt()),
            TrueDensity::TruncatedExponential { support, rate } => {
                -(-u * (-(-rate * support).exp_m1())).ln_1p() / rate
            }
            TrueDensity::Exponential { rate } => -(-u).ln_1p() / rate,
        }
    }

    /// `n` draws by inversion; every draw is strictly positive.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                // random() lies in [0, 1); 1 − u lies in (0, 1].
                let u = 1.0 - rng.random::<f64>();
                self.quantile(u).max(f64::MIN_POSITIVE)
            })
            .collect()
    }
}

impl AnalyticDensity for TrueDensity {
    fn pdf(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match *self {
            TrueDensity::Uniform { support } => {
                if x <= support {
                    1.0 / support
                } else {
                    0.0
                }
            }
            TrueDensity::Triangular { support } => (2.0 * (support - x) / (support * support)).max(0.0),
            TrueDensity::TruncatedExponential { support, rate } => {
                if x <= support {
                    rate * (-rate * x).exp() / -(-rate * support).exp_m1()
                } else {
                    0.0
                }
            }
            TrueDensity::Exponential { rate } => rate * (-rate * x).exp(),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            TrueDensity::Uniform { support } => (x / support).min(1.0),
            TrueDensity::Triangular { support } => {
                let y = (x / support).min(1.0);
                y * (2.0 - y)
            }
            TrueDensity::TruncatedExponential { support, rate } => {
                (-rate * x.min(support)).exp_m1() / (-rate * support).exp_m1()
            }
            TrueDensity::Exponential { rate } => -(-rate * x).exp_m1(),
        }
    }

    fn support(&self) -> Option<f64> {
        match *self {
            TrueDensity::Uniform { support }
            | TrueDensity::Triangular { support }
            | TrueDensity::TruncatedExponential { support, .. } => Some(support),
            TrueDensity::Exponential { .. } => None,
        }
    }

    fn level_crossing(&self, level: f64) -> f64 {
        if self.pdf(0.0) <= level {
            return 0.0;
        }
        match *self {
            TrueDensity::Uniform { support } => support,
            TrueDensity::Triangular { support } => support - level * support * support / 2.0,
            TrueDensity::TruncatedExponential { support, rate } => {
                if level <= self.pdf(support) {
                    support
                } else {
                    (self.pdf(0.0) / level).ln() / rate
                }
            }
            TrueDensity::Exponential { rate } => {
                if level <= 0.0 {
                    f64::INFINITY
                } else {
                    (rate / level).ln() / rate
                }
            }
        }
    }

    fn sqrt_integral(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(0.0), b.max(0.0));
        if b <= a {
            return 0.0;
        }
        match *self {
            TrueDensity::Uniform { support } => (b.min(support) - a.min(support)) / support.sqrt(),
            TrueDensity::Triangular { support } => {
                let (a, b) = (a.min(support), b.min(support));
                (2.0f64).sqrt() / support * (2.0 / 3.0) * ((support - a).powf(1.5) - (support - b).powf(1.5))
            }
            TrueDensity::TruncatedExponential { support, rate } => {
                let (a, b) = (a.min(support), b.min(support));
                let c = (rate / -(-rate * support).exp_m1()).sqrt();
                c * 2.0 / rate * ((-rate * a / 2.0).exp() - (-rate * b / 2.0).exp())
            }
            TrueDensity::Exponential { rate } => {
                rate.sqrt() * 2.0 / rate * ((-rate * a / 2.0).exp() - (-rate * b / 2.0).exp())
            }
        }
    }

    fn describe(&self) -> String {
        match *self {
            TrueDensity::Uniform { support } => format!("uniform on [0, {support}]"),
            TrueDensity::Triangular { support } => format!("triangular 2(L - x)/L^2 with L = {support}"),
            TrueDensity::TruncatedExponential { support, rate } => {
                format!("exponential with rate {rate} truncated to [0, {support}]")
            }
            TrueDensity::Exponential { rate } => format!("exponential with rate {rate}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::quadrature::adaptive_simpson;

    fn all() -> Vec<TrueDensity> {
        vec![
            TrueDensity::Uniform { support: 2.0 },
            TrueDensity::Triangular { support: 1.0 },
            TrueDensity::TruncatedExponential { support: 1.5, rate: 2.0 },
            TrueDensity::Exponential { rate: 1.5 },
        ]
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        for f in all() {
            let top = f.effective_support();
            let mass = adaptive_simpson(&|x| f.pdf(x), 0.0, top, 1e-11);
            assert!((mass - 1.0).abs() < 1e-7, "{f:?}: {mass}");
            for &x in &[0.1, 0.4, 0.9] {
                let c = adaptive_simpson(&|t| f.pdf(t), 0.0, x, 1e-12);
                assert!((c - f.cdf(x)).abs() < 1e-9, "{f:?} cdf at {x}");
                let s = adaptive_simpson(&|t| f.pdf(t).sqrt(), 0.05, x, 1e-12);
                assert!((s - f.sqrt_integral(0.05, x)).abs() < 1e-8, "{f:?} sqrt integral at {x}");
                assert!((f.cdf(f.quantile(f.cdf(x))) - f.cdf(x)).abs() < 1e-12);
                let level = f.pdf(x);
                let cross = f.level_crossing(level * 0.999_999);
                assert!(cross >= x - 1e-6, "{f:?} crossing {cross} < {x}");
            }
        }
    }

    #[test]
    fn samples_are_positive_and_in_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for f in all() {
            let xs = f.sample(2000, &mut rng);
            assert!(xs.iter().all(|&x| x > 0.0 && f.support().is_none_or(|l| x <= l)));
        }
    }

    #[test]
    fn tail_condition() {
        let f = TrueDensity::Exponential { rate: 2.0 };
        assert!(f.satisfies_tail(1.0, 1.0));
        assert!(f.satisfies_tail(5.0, 0.5));
        assert!(!f.satisfies_tail(3.0, 1.0));
        assert!(!f.satisfies_tail(0.1, 2.0));
        assert!(TrueDensity::Triangular { support: 1.0 }.satisfies_tail(9.0, 9.0));
    }
}
