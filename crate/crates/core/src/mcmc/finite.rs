use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use super::{check_data, McmcConfig, PosteriorDraws};
use crate::error::{Error, Result};
use crate::mixture::AtomicMixture;
use crate::priors::{dirichlet, dirichlet_with, BaseMeasure, ComponentCountLaw, PriorKind, PriorSpec};

/// Current labelled components of the finite mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteState {
    pub thetas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FiniteState {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn to_mixture(&self) -> Result<AtomicMixture<f64>> {
        AtomicMixture::from_unsorted(self.thetas.iter().copied().zip(self.weights.iter().copied()).collect())
    }
}

/// Reversible-jump sampler for the finite-mixture prior.
///
/// A sweep allocates observations to components, redraws the weights from
/// their Dirichlet conditional and every scale from its conjugate
/// conditional, then attempts one birth or death. Births draw the new scale
/// from `α` restricted to `[min(data), L]` and its weight from Beta(1, K);
/// deaths pick uniformly among components whose removal still leaves every
/// observation covered by some scale.
#[derive(Debug, Clone)]
pub struct FiniteMixtureSampler {
    base: BaseMeasure,
    count_law: ComponentCountLaw,
    weight_param: f64,
    data: Vec<f64>,
    data_min: f64,
    data_max: f64,
    state: FiniteState,
    attempts: BTreeMap<&'static str, (u64, u64)>,
}

impl FiniteMixtureSampler {
    pub fn new<R: Rng + ?Sized>(data: Vec<f64>, spec: &PriorSpec, rng: &mut R) -> Result<Self> {
        let (count_law, weight_param) = finite_parts(spec)?;
        check_data(&data, &spec.base)?;
        let k = count_law.sample(rng);
        let state = FiniteState {
            thetas: (0..k).map(|_| spec.base.sample(rng)).collect(),
            weights: dirichlet(weight_param, k, rng),
        };
        let mut sampler = Self {
            base: spec.base,
            count_law,
            weight_param,
            data: Vec::new(),
            data_min: 0.0,
            data_max: 0.0,
            state,
            attempts: BTreeMap::new(),
        };
        sampler.set_data(data);
        if !sampler.data.is_empty() {
            let (idx, _) = sampler
                .state
                .thetas
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &t)| if t > best.1 { (i, t) } else { best });
            if sampler.state.thetas[idx] < sampler.data_max {
                sampler.state.thetas[idx] = sampler.base.sample_above(sampler.data_max, rng);
            }
        }
        Ok(sampler)
    }

    /// Starts from an exact prior draw of the components, then `n`
    /// observations from the induced density.
    pub fn from_prior<R: Rng + ?Sized>(n: usize, spec: &PriorSpec, rng: &mut R) -> Result<Self> {
        let mut sampler = Self::new(Vec::new(), spec, rng)?;
        sampler.regenerate_data(n, rng)?;
        Ok(sampler)
    }

    fn set_data(&mut self, mut data: Vec<f64>) {
        data.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.data_min = data.first().copied().unwrap_or(0.0);
        self.data_max = data.last().copied().unwrap_or(0.0);
        self.data = data;
    }

    /// Replaces the data by `n` draws from the current mixture.
    pub fn regenerate_data<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<()> {
        let data = self.state.to_mixture()?.sample_with(n, rng);
        self.set_data(data);
        Ok(())
    }

    pub fn state(&self) -> &FiniteState {
        &self.state
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn acceptance_rates(&self) -> BTreeMap<String, f64> {
        self.attempts
            .iter()
            .map(|(k, &(acc, tot))| (k.to_string(), if tot == 0 { 0.0 } else { acc as f64 / tot as f64 }))
            .collect()
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.within_model(rng);
        self.birth_death(rng);
    }

    fn within_model<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let k = self.state.len();
        let mut counts = vec![0usize; k];
        let mut maxima = vec![0.0f64; k];
        let mut cumulative = Vec::with_capacity(k);
        for &x in &self.data {
            cumulative.clear();
            let mut total = 0.0;
            for (&t, &w) in self.state.thetas.iter().zip(&self.state.weights) {
                if x <= t {
                    total += w / t;
                }
                cumulative.push(total);
            }
            let u = rng.random::<f64>() * total;
            let c = cumulative.partition_point(|&acc| acc <= u).min(k - 1);
            counts[c] += 1;
            maxima[c] = maxima[c].max(x);
        }
        let alphas: Vec<f64> = counts.iter().map(|&n| self.weight_param + n as f64).collect();
        self.state.weights = dirichlet_with(&alphas, rng);
        for c in 0..k {
            self.state.thetas[c] = self.base.scale_posterior(maxima[c], counts[c], rng);
        }
    }

    fn log_likelihood(&self, state: &FiniteState) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let mut comps: Vec<(f64, f64)> = state.thetas.iter().copied().zip(state.weights.iter().copied()).collect();
        comps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // Suffix sums of w/θ give f_P on each gap between sorted scales.
        let mut suffix = vec![0.0; comps.len() + 1];
        for j in (0..comps.len()).rev() {
            suffix[j] = suffix[j + 1] + comps[j].1 / comps[j].0;
        }
        let mut j = 0;
        let mut total = 0.0;
        for &x in &self.data {
            while j < comps.len() && comps[j].0 < x {
                j += 1;
            }
            let f = suffix[j];
            if f <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += f.ln();
        }
        total
    }

    fn removable(&self, state: &FiniteState) -> Vec<usize> {
        if self.data.is_empty() {
            return (0..state.len()).collect();
        }
        let covering = state.thetas.iter().filter(|&&t| t >= self.data_max).count();
        (0..state.len())
            .filter(|&j| covering >= 2 || state.thetas[j] < self.data_max)
            .collect()
    }

    fn birth_prob(&self, k: usize) -> f64 {
        let k_max = self.count_law.k_max();
        if k >= k_max {
            0.0
        } else if k <= 1 {
            1.0
        } else {
            0.5
        }
    }

    fn death_prob(&self, k: usize) -> f64 {
        if k <= 1 {
            0.0
        } else if k >= self.count_law.k_max() {
            1.0
        } else {
            0.5
        }
    }

    /// Log acceptance ratio for a birth from `k` components to `k + 1`,
    /// adding a scale with weight `w`.
    fn log_birth_ratio(&self, k: usize, w: f64, delta_loglik: f64, removable_after: usize) -> f64 {
        let a = self.weight_param;
        let kf = k as f64;
        // α/q is the constant mass of α on [min(data), L].
        let ln_restriction = (1.0 - self.base.cdf(self.data_min)).ln();
        delta_loglik + self.count_law.ln_prob(k + 1) - self.count_law.ln_prob(k)
            + ln_restriction
            + ln_gamma((kf + 1.0) * a)
            - ln_gamma(kf * a)
            - ln_gamma(a)
            + (a - 1.0) * w.ln()
            + kf * (a - 1.0) * (1.0 - w).ln()
            + self.death_prob(k + 1).ln()
            - self.birth_prob(k).ln()
            - (removable_after as f64).ln()
            + (kf + 1.0).ln()
            - kf.ln()
    }

    fn birth_death<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let k = self.state.len();
        let u: f64 = rng.random();
        if u < self.birth_prob(k) {
            let theta = self.base.sample_above(self.data_min, rng);
            let w = 1.0 - (1.0 - rng.random::<f64>()).powf(1.0 / k as f64);
            let mut proposal = self.state.clone();
            for p in &mut proposal.weights {
                *p *= 1.0 - w;
            }
            proposal.thetas.push(theta);
            proposal.weights.push(w);
            let delta = self.log_likelihood(&proposal) - self.log_likelihood(&self.state);
            let removable = self.removable(&proposal).len();
            let log_ratio = self.log_birth_ratio(k, w, delta, removable);
            let accepted = rng.random::<f64>().ln() < log_ratio;
            if accepted {
                self.state = proposal;
            }
            self.record("birth", accepted);
        } else if self.death_prob(k) > 0.0 {
            let candidates = self.removable(&self.state);
            if candidates.is_empty() {
                self.record("death", false);
                return;
            }
            let j = candidates[rng.random_range(0..candidates.len())];
            let (theta, w) = (self.state.thetas[j], self.state.weights[j]);
            if theta < self.data_min {
                // A birth never proposes below the sample minimum.
                self.record("death", false);
                return;
            }
            let mut proposal = self.state.clone();
            proposal.thetas.remove(j);
            proposal.weights.remove(j);
            for p in &mut proposal.weights {
                *p /= 1.0 - w;
            }
            let delta = self.log_likelihood(&self.state) - self.log_likelihood(&proposal);
            let log_ratio = -self.log_birth_ratio(k - 1, w, delta, candidates.len());
            let accepted = rng.random::<f64>().ln() < log_ratio;
            if accepted {
                self.state = proposal;
            }
            self.record("death", accepted);
        }
    }

    fn record(&mut self, move_name: &'static str, accepted: bool) {
        let entry = self.attempts.entry(move_name).or_insert((0, 0));
        entry.1 += 1;
        if accepted {
            entry.0 += 1;
        }
    }
}

fn finite_parts(spec: &PriorSpec) -> Result<(ComponentCountLaw, f64)> {
    match &spec.kind {
        PriorKind::Finite {
            count_law,
            dirichlet_weight,
        } => Ok((count_law.clone(), *dirichlet_weight)),
        _ => Err(Error::InvalidParameter(
            "the reversible-jump sampler needs a finite-mixture prior".into(),
        )),
    }
}

/// Runs the reversible-jump sampler; the cluster trace records `K`.
pub fn run_finite_mixture_posterior(
    data: &[f64],
    spec: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sampler = FiniteMixtureSampler::new(data.to_vec(), spec, &mut rng)?;
    let mut draws = Vec::new();
    let mut trace = Vec::new();
    for it in 0..cfg.iterations {
        sampler.sweep(&mut rng);
        if cfg.keeps(it) {
            draws.push(sampler.state().to_mixture()?);
            trace.push(sampler.state().len());
        }
    }
    Ok(PosteriorDraws {
        draws,
        burn_in: cfg.burn_in,
        thinning: cfg.thinning,
        seed: cfg.seed,
        acceptance_rates: sampler.acceptance_rates(),
        cluster_count_trace: trace,
    })
}
