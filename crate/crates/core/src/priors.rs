//! Priors on the mixing distribution: a Dirichlet process (type 1) and a
//! finite mixture with a random number of components (type 2), both built on
//! the power-law base measure `α(θ) ∝ θ^t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::mixture::AtomicMixture;
use crate::sampling::{truncated_log_gamma, truncated_power};

/// Base measure `α` of the kernel scales.
///
/// On `[0, L]` the density is `(t+1) θ^t / L^{t+1}`; on the half line it is
/// exponentially tilted, `α(θ) ∝ θ^t e^{−rθ}` (a Gamma(t+1, r) law).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseMeasure {
    exponent: f64,
    support: Option<f64>,
    tail_rate: f64,
}

impl BaseMeasure {
    pub fn bounded(exponent: f64, support: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidParameter(format!("base exponent {exponent} must be positive")));
        }
        if !(support > 0.0) || !support.is_finite() {
            return Err(Error::InvalidParameter(format!("support bound {support} must be positive")));
        }
        Ok(Self {
            exponent,
            support: Some(support),
            tail_rate: 0.0,
        })
    }

    pub fn unbounded(exponent: f64, tail_rate: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidParameter(format!("base exponent {exponent} must be positive")));
        }
        if !(tail_rate > 0.0) || !tail_rate.is_finite() {
            return Err(Error::InvalidParameter(format!("tail rate {tail_rate} must be positive")));
        }
        Ok(Self {
            exponent,
            support: None,
            tail_rate,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    pub fn tail_rate(&self) -> f64 {
        self.tail_rate
    }

    pub fn ln_density(&self, theta: f64) -> f64 {
        let t = self.exponent;
        if !(theta > 0.0) {
            return f64::NEG_INFINITY;
        }
        match self.support {
            Some(l) if theta > l => f64::NEG_INFINITY,
            Some(l) => (t + 1.0).ln() + t * theta.ln() - (t + 1.0) * l.ln(),
            None => {
                let r = self.tail_rate;
                (t + 1.0) * r.ln() + t * theta.ln() - r * theta - ln_gamma(t + 1.0)
            }
        }
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        match self.support {
            Some(l) => (theta / l).min(1.0).powf(self.exponent + 1.0),
            None if theta <= 0.0 => 0.0,
            None => gamma_lr(self.exponent + 1.0, self.tail_rate * theta),
        }
    }

    pub fn mean(&self) -> f64 {
        let t = self.exponent;
        match self.support {
            Some(l) => (t + 1.0) / (t + 2.0) * l,
            None => (t + 1.0) / self.tail_rate,
        }
    }

    /// `∫ α(θ) 𝟙[x ≤ θ] / θ dθ`, the prior predictive density at `x`.
    pub fn kernel_marginal(&self, x: f64) -> f64 {
        let t = self.exponent;
        let x = x.max(0.0);
        match self.support {
            Some(l) if x >= l => 0.0,
            Some(l) => (t + 1.0) / (t * l) * (1.0 - (x / l).powf(t)),
            None if x == 0.0 => self.tail_rate / t,
            None => self.tail_rate * gamma_ur(t, self.tail_rate * x) / t,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.support {
            Some(l) => truncated_power(self.exponent + 1.0, 0.0, l, rng),
            None => Gamma::new(self.exponent + 1.0, 1.0 / self.tail_rate)
                .expect("valid gamma parameters")
                .sample(rng)
                .max(f64::MIN_POSITIVE),
        }
    }

    /// Draws from `α` restricted to `[lo, L]`.
    pub fn sample_above<R: Rng + ?Sized>(&self, lo: f64, rng: &mut R) -> f64 {
        self.scale_posterior(lo, 0, rng)
    }

    /// Draws from the density proportional to `α(θ) θ^{−count}` on `[lo, L]`:
    /// the full conditional of a kernel scale holding `count` observations
    /// whose maximum is `lo`.
    pub fn scale_posterior<R: Rng + ?Sized>(&self, lo: f64, count: usize, rng: &mut R) -> f64 {
        let shape = self.exponent - count as f64 + 1.0;
        match self.support {
            Some(l) => truncated_power(shape, lo.max(0.0), l, rng),
            None if lo <= 0.0 && count == 0 => self.sample(rng),
            None => truncated_log_gamma(shape, self.tail_rate, lo.ln(), rng),
        }
    }
}

/// Law `Q` of the number of components, stored as probabilities of `K = 1..=K_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCountLaw {
    probs: Vec<f64>,
}

impl ComponentCountLaw {
    /// `Q(K) ∝ exp(−K log K)` on `1..=k_max`.
    pub fn factorial_decay(k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::InvalidParameter("K_max must be at least 1".into()));
        }
        Self::from_weights((1..=k_max).map(|k| (-(k as f64) * (k as f64).ln()).exp()).collect())
    }

    /// All mass on a single `K`.
    pub fn degenerate(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        let mut w = vec![0.0; k];
        w[k - 1] = 1.0;
        Self::from_weights(w)
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("component weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("component weights sum to zero".into()));
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn k_max(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, k: usize) -> f64 {
        if k == 0 || k > self.probs.len() {
            0.0
        } else {
            self.probs[k - 1]
        }
    }

    pub fn ln_prob(&self, k: usize) -> f64 {
        self.prob(k).ln()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i + 1;
            }
        }
        // Rounding left u above the last partial sum.
        self.probs.iter().rposition(|&p| p > 0.0).unwrap() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorKind {
    /// `P ~ DP(A, α)`.
    Dirichlet { mass: f64 },
    /// `K ~ Q`, atoms i.i.d. from `α`, weights symmetric Dirichlet(a).
    Finite {
        count_law: ComponentCountLaw,
        dirichlet_weight: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub base: BaseMeasure,
    pub kind: PriorKind,
}

impl PriorSpec {
    pub fn dirichlet(base: BaseMeasure, mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidParameter(format!("DP mass {mass} must be positive")));
        }
        Ok(Self {
            base,
            kind: PriorKind::Dirichlet { mass },
        })
    }

    pub fn finite(base: BaseMeasure, count_law: ComponentCountLaw, dirichlet_weight: f64) -> Result<Self> {
        if !(dirichlet_weight > 0.0) || !dirichlet_weight.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Dirichlet weight {dirichlet_weight} must be positive"
            )));
        }
        Ok(Self {
            base,
            kind: PriorKind::Finite {
                count_law,
                dirichlet_weight,
            },
        })
    }
}

/// Outcome of one prior condition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub passed: bool,
    pub applicable: bool,
    pub detail: String,
    /// Fitted constants, e.g. `("c1", 1.001)`.
    pub constants: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, condition: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn constant(&self, condition: &str, name: &str) -> Option<f64> {
        self.check(condition)?
            .constants
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

pub const BASE_CONDITION: &str = "base_measure";
pub const COUNT_CONDITION: &str = "component_count";
pub const WEIGHT_CONDITION: &str = "dirichlet_weights";

/// Checks the sufficient conditions for the contraction results.
///
/// 1. `t > 1`, with `α(θ)/θ^t` bounded near 0 (true for both built-in families).
/// 2. `e^{−C₁ K log K} ≥ Q(K) ≥ e^{−C₂ K log K}` on `2..=K_max`; reports the
///    largest admissible `C₁` and the smallest admissible `C₂`.
/// 3. `π_{p,K}(p) ≥ K^{−K} c^K Π pᵢ^{aᵢ}`; for the symmetric Dirichlet(a) it
///    holds with `aᵢ = max(a, 1)` and the reported `c`.
pub fn validate_prior_conditions(spec: &PriorSpec) -> ValidationReport {
    let t = spec.base.exponent();
    let base = ConditionCheck {
        condition: BASE_CONDITION.into(),
        passed: t > 1.0,
        applicable: true,
        detail: if t > 1.0 {
            format!("t = {t} > 1; α(θ)/θ^t is bounded as θ → 0")
        } else {
            format!("t = {t} does not exceed 1")
        },
        constants: vec![("t".into(), t)],
    };
    let mut checks = vec![base];
    match &spec.kind {
        PriorKind::Dirichlet { .. } => {
            for name in [COUNT_CONDITION, WEIGHT_CONDITION] {
                checks.push(ConditionCheck {
                    condition: name.into(),
                    passed: true,
                    applicable: false,
                    detail: "not applicable to the Dirichlet process prior".into(),
                    constants: vec![],
                });
            }
        }
        PriorKind::Finite {
            count_law,
            dirichlet_weight,
        } => {
            checks.push(check_count_law(count_law));
            checks.push(check_weights(*dirichlet_weight, count_law.k_max()));
        }
    }
    ValidationReport { checks }
}

fn check_count_law(q: &ComponentCountLaw) -> ConditionCheck {
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    for k in 2..=q.k_max() {
        let kf = k as f64;
        let ratio = -q.ln_prob(k) / (kf * kf.ln());
        c1 = c1.min(ratio);
        c2 = c2.max(ratio);
    }
    if q.k_max() < 2 {
        return ConditionCheck {
            condition: COUNT_CONDITION.into(),
            passed: false,
            applicable: true,
            detail: "K_max < 2 leaves nothing to bound".into(),
            constants: vec![],
        };
    }
    let passed = c1.is_finite() && c2.is_finite() && c1 > 0.0;
    ConditionCheck {
        condition: COUNT_CONDITION.into(),
        passed,
        applicable: true,
        detail: format!("sandwich holds for any C1 <= {c1:.6} and C2 >= {c2:.6} on K <= {}", q.k_max()),
        constants: vec![("c1".into(), c1), ("c2".into(), c2)],
    }
}

fn check_weights(a: f64, k_max: usize) -> ConditionCheck {
    let mut ln_c = f64::INFINITY;
    for k in 1..=k_max {
        let kf = k as f64;
        let ln_norm = ln_gamma(kf * a) - kf * ln_gamma(a);
        ln_c = ln_c.min((kf * kf.ln() + ln_norm) / kf);
    }
    let c = ln_c.exp();
    ConditionCheck {
        condition: WEIGHT_CONDITION.into(),
        passed: c > 0.0 && c.is_finite(),
        applicable: true,
        detail: format!("holds with exponents a_i = {} and c = {c:.6}", a.max(1.0)),
        constants: vec![("c".into(), c), ("a_i".into(), a.max(1.0))],
    }
}

/// Draws a mixing distribution from the prior.
///
/// Dirichlet-process draws use stick breaking with `truncation` atoms, the
/// remaining stick folded into the last weight.
pub fn sample_prior(spec: &PriorSpec, truncation: usize, seed: u64) -> Result<AtomicMixture<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_prior_with(spec, truncation, &mut rng)
}

pub fn sample_prior_with<R: Rng + ?Sized>(
    spec: &PriorSpec,
    truncation: usize,
    rng: &mut R,
) -> Result<AtomicMixture<f64>> {
    let base = &spec.base;
    match &spec.kind {
        PriorKind::Dirichlet { mass } => {
            if truncation == 0 {
                return Err(Error::InvalidParameter("truncation must be at least 1".into()));
            }
            let mut pairs = Vec::with_capacity(truncation);
            let mut rest = 1.0;
            for _ in 0..truncation - 1 {
                // Beta(1, A) by inversion.
                let u: f64 = rng.random();
                let v = 1.0 - (1.0 - u).powf(1.0 / mass);
                let w = v * rest;
                rest -= w;
                pairs.push((base.sample(rng), w));
            }
            pairs.push((base.sample(rng), rest.max(0.0)));
            AtomicMixture::from_unsorted(pairs)
        }
        PriorKind::Finite {
            count_law,
            dirichlet_weight,
        } => {
            let k = count_law.sample(rng);
            let weights = dirichlet(*dirichlet_weight, k, rng);
            let pairs = weights.into_iter().map(|w| (base.sample(rng), w)).collect();
            AtomicMixture::from_unsorted(pairs)
        }
    }
}

/// Symmetric Dirichlet draw via normalized Gamma variates.
pub(crate) fn dirichlet<R: Rng + ?Sized>(a: f64, k: usize, rng: &mut R) -> Vec<f64> {
    dirichlet_with(&vec![a; k], rng)
}

pub(crate) fn dirichlet_with<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = alphas
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
            .collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return draws.into_iter().map(|g| g / total).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> BaseMeasure {
        BaseMeasure::bounded(2.0, 1.0).unwrap()
    }

    #[test]
    fn dp_with_t2_passes() {
        let spec = PriorSpec::dirichlet(base(), 1.0).unwrap();
        let report = validate_prior_conditions(&spec);
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn small_exponent_fails_base_condition() {
        let spec = PriorSpec::dirichlet(BaseMeasure::bounded(0.5, 1.0).unwrap(), 1.0).unwrap();
        let report = validate_prior_conditions(&spec);
        assert!(!report.check(BASE_CONDITION).unwrap().passed);
        assert!(!report.all_passed());
    }

    #[test]
    fn factorial_decay_sandwich() {
        let q = ComponentCountLaw::factorial_decay(50).unwrap();
        let spec = PriorSpec::finite(base(), q, 1.0).unwrap();
        let report = validate_prior_conditions(&spec);
        assert!(report.all_passed(), "{report:?}");
        let c1 = report.constant(COUNT_CONDITION, "c1").unwrap();
        let c2 = report.constant(COUNT_CONDITION, "c2").unwrap();
        // Normalization lifts the tightest C1 slightly above 1, so C1 = 1 is admissible.
        assert!(c1 >= 1.0 && c1 < 1.01, "c1 = {c1}");
        assert!(c2 >= 1.0 && c2 >= c1, "c2 = {c2}");
        // Uniform weights on the simplex: c = 1 works since (K-1)! >= K^-K.
        assert!(report.constant(WEIGHT_CONDITION, "c").unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn kernel_marginal_integrates_to_one() {
        let b = base();
        let v = crate::quadrature::adaptive_simpson(&|x| b.kernel_marginal(x), 0.0, 1.0, 1e-10);
        assert!((v - 1.0).abs() < 1e-8);
        let b = BaseMeasure::unbounded(2.0, 3.0).unwrap();
        let v = crate::quadrature::adaptive_simpson(&|x| b.kernel_marginal(x), 0.0, 30.0, 1e-10);
        assert!((v - 1.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn degenerate_count_gives_single_uniform() {
        let spec = PriorSpec::finite(base(), ComponentCountLaw::degenerate(1).unwrap(), 1.0).unwrap();
        for seed in 0..20 {
            let p = sample_prior(&spec, 1, seed).unwrap();
            assert_eq!(p.len(), 1);
            assert_eq!(p.weights(), &[1.0]);
            let x1 = p.atoms()[0];
            assert!((p.eval(x1 / 2.0) - 1.0 / x1).abs() < 1e-12);
        }
    }

    #[test]
    fn draws_satisfy_invariants() {
        let specs = [
            PriorSpec::dirichlet(base(), 2.0).unwrap(),
            PriorSpec::finite(base(), ComponentCountLaw::factorial_decay(200).unwrap(), 1.0).unwrap(),
        ];
        for spec in &specs {
            for seed in 0..200 {
                let p = sample_prior(spec, 100, seed).unwrap();
                p.check_bound(1.0).unwrap();
                let s = p.to_step(Some(1.0)).unwrap();
                assert!((s.total_mass() - 1.0).abs() < 1e-10);
            }
        }
        assert!(sample_prior(&specs[0], 0, 1).is_err());
    }
}
