use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_data, McmcConfig, PosteriorDraws};
use crate::error::{Error, Result};
use crate::mixture::AtomicMixture;
use crate::priors::{BaseMeasure, PriorKind, PriorSpec};

/// Marginal Chinese-restaurant Gibbs sampler for the Dirichlet-process prior.
///
/// Each sweep reassigns every observation in turn: an occupied cluster `c`
/// with `x ≤ θ_c` gets weight `n_c / θ_c`, a fresh cluster gets
/// `A ∫ α(θ) 𝟙[x ≤ θ] / θ dθ` and its scale is drawn from the one-point
/// conditional. After the reassignments every scale is redrawn from its
/// conjugate full conditional.
#[derive(Debug, Clone)]
pub struct DpSampler {
    base: BaseMeasure,
    mass: f64,
    data: Vec<f64>,
    new_cluster_weight: Vec<f64>,
    assign: Vec<usize>,
    counts: Vec<usize>,
    thetas: Vec<f64>,
    scratch: Vec<f64>,
}

impl DpSampler {
    pub fn new<R: Rng + ?Sized>(data: Vec<f64>, spec: &PriorSpec, rng: &mut R) -> Result<Self> {
        let mass = dp_mass(spec)?;
        check_data(&data, &spec.base)?;
        let mut sampler = Self {
            base: spec.base,
            mass,
            new_cluster_weight: Vec::new(),
            assign: vec![0; data.len()],
            counts: Vec::new(),
            thetas: Vec::new(),
            scratch: Vec::new(),
            data,
        };
        sampler.refresh_weights();
        if !sampler.data.is_empty() {
            let max = sampler.data.iter().fold(0.0f64, |m, &x| m.max(x));
            sampler.counts.push(sampler.data.len());
            sampler.thetas.push(sampler.base.scale_posterior(max, sampler.data.len(), rng));
        }
        Ok(sampler)
    }

    /// Draws a clustering, scales and `n` observations jointly from the prior.
    pub fn from_prior<R: Rng + ?Sized>(n: usize, spec: &PriorSpec, rng: &mut R) -> Result<Self> {
        let mass = dp_mass(spec)?;
        let mut sampler = Self {
            base: spec.base,
            mass,
            new_cluster_weight: Vec::new(),
            assign: Vec::with_capacity(n),
            counts: Vec::new(),
            thetas: Vec::new(),
            scratch: Vec::new(),
            data: Vec::with_capacity(n),
        };
        for i in 0..n {
            let u: f64 = rng.random::<f64>() * (i as f64 + mass);
            let mut acc = 0.0;
            let mut chosen = None;
            for (c, &count) in sampler.counts.iter().enumerate() {
                acc += count as f64;
                if u < acc {
                    chosen = Some(c);
                    break;
                }
            }
            let c = chosen.unwrap_or_else(|| {
                sampler.counts.push(0);
                sampler.thetas.push(sampler.base.sample(rng));
                sampler.counts.len() - 1
            });
            sampler.counts[c] += 1;
            sampler.assign.push(c);
            let u: f64 = rng.random();
            sampler.data.push(sampler.thetas[c] * (1.0 - u));
        }
        sampler.refresh_weights();
        Ok(sampler)
    }

    fn refresh_weights(&mut self) {
        self.new_cluster_weight = self
            .data
            .iter()
            .map(|&x| self.mass * self.base.kernel_marginal(x))
            .collect();
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn cluster_count(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Occupied clusters as `(θ, n_c)`.
    pub fn clusters(&self) -> Vec<(f64, usize)> {
        self.thetas
            .iter()
            .zip(&self.counts)
            .filter(|(_, &n)| n > 0)
            .map(|(&t, &n)| (t, n))
            .collect()
    }

    /// Redraws every observation from the kernel of its current cluster.
    pub fn regenerate_data<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for i in 0..self.data.len() {
            let u: f64 = rng.random();
            self.data[i] = self.thetas[self.assign[i]] * (1.0 - u);
        }
        self.refresh_weights();
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.data.len();
        for i in 0..n {
            let x = self.data[i];
            let old = self.assign[i];
            self.counts[old] -= 1;

            self.scratch.clear();
            let mut total = 0.0;
            for (&count, &theta) in self.counts.iter().zip(&self.thetas) {
                let w = if count > 0 && x <= theta { count as f64 / theta } else { 0.0 };
                total += w;
                self.scratch.push(total);
            }
            let fresh = self.new_cluster_weight[i];
            let u = rng.random::<f64>() * (total + fresh);
            let c = if u < total {
                self.scratch.partition_point(|&acc| acc <= u)
            } else {
                let theta = self.base.scale_posterior(x, 1, rng);
                match self.counts.iter().position(|&c| c == 0) {
                    Some(slot) => {
                        self.thetas[slot] = theta;
                        slot
                    }
                    None => {
                        self.counts.push(0);
                        self.thetas.push(theta);
                        self.counts.len() - 1
                    }
                }
            };
            self.counts[c] += 1;
            self.assign[i] = c;
        }
        self.compact();
        self.redraw_scales(rng);
    }

    fn compact(&mut self) {
        if self.counts.iter().all(|&c| c > 0) {
            return;
        }
        let mut relabel = vec![usize::MAX; self.counts.len()];
        let mut counts = Vec::with_capacity(self.counts.len());
        let mut thetas = Vec::with_capacity(self.counts.len());
        for (c, (&count, &theta)) in self.counts.iter().zip(&self.thetas).enumerate() {
            if count > 0 {
                relabel[c] = counts.len();
                counts.push(count);
                thetas.push(theta);
            }
        }
        for a in &mut self.assign {
            *a = relabel[*a];
        }
        self.counts = counts;
        self.thetas = thetas;
    }

    fn redraw_scales<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut maxima = vec![0.0f64; self.counts.len()];
        for (&x, &c) in self.data.iter().zip(&self.assign) {
            maxima[c] = maxima[c].max(x);
        }
        for c in 0..self.counts.len() {
            self.thetas[c] = self.base.scale_posterior(maxima[c], self.counts[c], rng);
        }
    }

    /// Converts the current clustering into a mixing distribution: cluster
    /// `c` gets weight `n_c / (n + A)` and a fresh base-measure atom carries
    /// the remaining `A / (n + A)`.
    pub fn snapshot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<AtomicMixture<f64>> {
        let denom = self.data.len() as f64 + self.mass;
        let mut pairs: Vec<(f64, f64)> = self
            .clusters()
            .into_iter()
            .map(|(theta, n)| (theta, n as f64 / denom))
            .collect();
        pairs.push((self.base.sample(rng), self.mass / denom));
        AtomicMixture::from_unsorted(pairs)
    }
}

fn dp_mass(spec: &PriorSpec) -> Result<f64> {
    match spec.kind {
        PriorKind::Dirichlet { mass } => Ok(mass),
        _ => Err(Error::InvalidParameter(
            "the CRP sampler needs a Dirichlet-process prior".into(),
        )),
    }
}

/// Runs the DP posterior sampler and keeps every `thinning`-th draw after burn-in.
pub fn run_dp_posterior(data: &[f64], spec: &PriorSpec, cfg: &McmcConfig) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sampler = DpSampler::new(data.to_vec(), spec, &mut rng)?;
    let mut draws = Vec::new();
    let mut trace = Vec::new();
    for it in 0..cfg.iterations {
        sampler.sweep(&mut rng);
        if cfg.keeps(it) {
            draws.push(sampler.snapshot(&mut rng)?);
            trace.push(sampler.cluster_count());
        }
    }
    Ok(PosteriorDraws {
        draws,
        burn_in: cfg.burn_in,
        thinning: cfg.thinning,
        seed: cfg.seed,
        acceptance_rates: BTreeMap::new(),
        cluster_count_trace: trace,
    })
}
