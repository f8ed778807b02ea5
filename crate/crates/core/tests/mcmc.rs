mod common;

use common::{ks_critical_1pct, ks_statistic, mcmc_mean_and_se, mean_and_se};
use monodens::mcmc::{run_dp_posterior, run_finite_mixture_posterior, DpSampler, FiniteMixtureSampler, McmcConfig};
use monodens::priors::{sample_prior, BaseMeasure, ComponentCountLaw, PriorSpec};
use monodens::summaries::posterior_median_pointwise;
use monodens::{distance, AtomicMixture, Metric, StepDensity};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn base() -> BaseMeasure {
    BaseMeasure::bounded(2.0, 1.0).unwrap()
}

fn dp() -> PriorSpec {
    PriorSpec::dirichlet(base(), 1.0).unwrap()
}

fn finite() -> PriorSpec {
    PriorSpec::finite(base(), ComponentCountLaw::factorial_decay(20).unwrap(), 1.0).unwrap()
}

fn cfg(iterations: usize, burn_in: usize, seed: u64) -> McmcConfig {
    McmcConfig {
        iterations,
        burn_in,
        thinning: 1,
        seed,
    }
}

/// |a − b| within `k` combined standard errors.
fn close(a: (f64, f64), b: (f64, f64), k: f64) -> bool {
    (a.0 - b.0).abs() <= k * (a.1 * a.1 + b.1 * b.1).sqrt()
}

#[test]
fn empty_data_reproduces_the_prior_predictive() {
    // With no data, E f_P(x) is the kernel marginal ∫ α(θ) 𝟙[x ≤ θ]/θ dθ for both priors.
    let dp_draws = run_dp_posterior(&[], &dp(), &cfg(20_000, 0, 1)).unwrap();
    let fm_draws = run_finite_mixture_posterior(&[], &finite(), &cfg(20_000, 1000, 2)).unwrap();
    for x in [0.1, 0.5, 0.9] {
        let exact = base().kernel_marginal(x);
        for (name, draws) in [("dp", &dp_draws), ("finite", &fm_draws)] {
            let (m, se) = mcmc_mean_and_se(&draws.values_at(x));
            assert!((m - exact).abs() < 4.0 * se, "{name} at {x}: {m} vs {exact} (se {se})");
        }
    }
    // The component count follows its prior law.
    let law = ComponentCountLaw::factorial_decay(20).unwrap();
    let ks: Vec<f64> = fm_draws.cluster_count_trace.iter().map(|&k| k as f64).collect();
    let (m, se) = mcmc_mean_and_se(&ks);
    assert!((m - law.mean()).abs() < 4.0 * se, "E K {m} vs {} (se {se})", law.mean());
}

#[test]
fn finite_mixture_count_marginal_matches_the_prior_law() {
    // Chi-square on a heavily thinned trace (thinning 25 makes draws nearly independent).
    let law = ComponentCountLaw::factorial_decay(20).unwrap();
    let draws = run_finite_mixture_posterior(
        &[],
        &finite(),
        &McmcConfig {
            iterations: 101_000,
            burn_in: 1000,
            thinning: 25,
            seed: 3,
        },
    )
    .unwrap();
    let n = draws.cluster_count_trace.len() as f64;
    let mut counts = [0usize; 5];
    for &k in &draws.cluster_count_trace {
        counts[(k - 1).min(4)] += 1;
    }
    let probs: Vec<f64> = (1..=4)
        .map(|k| law.prob(k))
        .chain(std::iter::once((5..=20).map(|k| law.prob(k)).sum()))
        .collect();
    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| (c as f64 - n * p).powi(2) / (n * p))
        .sum();
    // 0.999 quantile of chi-square with 4 degrees of freedom.
    assert!(chi2 < 18.47, "chi2 = {chi2}, counts {counts:?}, probs {probs:?}");
}

#[test]
fn dp_successive_conditional_simulation() {
    // Alternating posterior sweeps with data regeneration leaves the joint prior
    // invariant; compare against independent prior draws.
    let n = 6;
    let spec = dp();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut independent_k = Vec::new();
    let mut independent_max = Vec::new();
    for _ in 0..20_000 {
        let s = DpSampler::from_prior(n, &spec, &mut rng).unwrap();
        independent_k.push(s.cluster_count() as f64);
        independent_max.push(s.clusters().iter().map(|c| c.0).fold(0.0, f64::max));
    }
    let mut sampler = DpSampler::from_prior(n, &spec, &mut rng).unwrap();
    let mut chain_k = Vec::new();
    let mut chain_max = Vec::new();
    for _ in 0..20_000 {
        sampler.sweep(&mut rng);
        sampler.regenerate_data(&mut rng);
        chain_k.push(sampler.cluster_count() as f64);
        chain_max.push(sampler.clusters().iter().map(|c| c.0).fold(0.0, f64::max));
    }
    // Expected number of CRP tables: Σ A/(A + i).
    let exact_k: f64 = (0..n).map(|i| 1.0 / (1.0 + i as f64)).sum();
    let ik = mean_and_se(&independent_k);
    assert!((ik.0 - exact_k).abs() < 4.0 * ik.1);
    assert!(close(mcmc_mean_and_se(&chain_k), ik, 4.0), "{:?} vs {ik:?}", mcmc_mean_and_se(&chain_k));
    assert!(close(mcmc_mean_and_se(&chain_max), mean_and_se(&independent_max), 4.0));
}

#[test]
fn finite_successive_conditional_simulation() {
    let n = 5;
    let spec = finite();
    let law = ComponentCountLaw::factorial_decay(20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sampler = FiniteMixtureSampler::from_prior(n, &spec, &mut rng).unwrap();
    let mut ks = Vec::new();
    let mut f_mid = Vec::new();
    let mut max_theta = Vec::new();
    for _ in 0..40_000 {
        sampler.sweep(&mut rng);
        sampler.regenerate_data(n, &mut rng).unwrap();
        ks.push(sampler.state().len() as f64);
        f_mid.push(sampler.state().to_mixture().unwrap().eval(0.5));
        max_theta.push(sampler.state().thetas.iter().copied().fold(0.0, f64::max));
    }
    let independent_max: Vec<f64> = (0..20_000)
        .map(|s| sample_prior(&spec, 1, 10_000 + s).unwrap().max_atom())
        .collect();
    let k = mcmc_mean_and_se(&ks);
    assert!((k.0 - law.mean()).abs() < 4.0 * k.1, "E K {k:?} vs {}", law.mean());
    let f = mcmc_mean_and_se(&f_mid);
    let exact = base().kernel_marginal(0.5);
    assert!((f.0 - exact).abs() < 4.0 * f.1, "E f(0.5) {f:?} vs {exact}");
    assert!(close(mcmc_mean_and_se(&max_theta), mean_and_se(&independent_max), 4.0));
}

#[test]
fn dp_prior_draws_match_stick_breaking_moments() {
    // E Σ w² = 1/(1 + A) and E f_P(x) = kernel marginal, up to truncation.
    let spec = PriorSpec::dirichlet(base(), 2.0).unwrap();
    let draws: Vec<AtomicMixture> = (0..20_000).map(|s| sample_prior(&spec, 200, s).unwrap()).collect();
    let sq: Vec<f64> = draws.iter().map(|p| p.weights().iter().map(|w| w * w).sum()).collect();
    let (m, se) = mean_and_se(&sq);
    assert!((m - 1.0 / 3.0).abs() < 4.0 * se, "{m} (se {se})");
    let f: Vec<f64> = draws.iter().map(|p| p.eval(0.3)).collect();
    let (m, se) = mean_and_se(&f);
    assert!((m - base().kernel_marginal(0.3)).abs() < 4.0 * se);
}

#[test]
fn dp_truncation_keeps_the_moments() {
    // The leftover stick after T atoms has mean (A/(1+A))^T ≈ 2e-9 here, so a
    // truncated draw keeps E Σ w² = 1/(1 + A).
    let spec = PriorSpec::dirichlet(base(), 1.0).unwrap();
    let draws: Vec<AtomicMixture> = (0..20_000).map(|s| sample_prior(&spec, 30, 50_000 + s).unwrap()).collect();
    assert!(draws.iter().all(|p| p.len() <= 30 && (p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12));
    let sq: Vec<f64> = draws.iter().map(|p| p.weights().iter().map(|w| w * w).sum()).collect();
    let (m, se) = mean_and_se(&sq);
    assert!((m - 0.5).abs() < 4.0 * se, "{m} (se {se})");
}

#[test]
fn single_component_prior_atom_follows_the_base_measure() {
    let spec = PriorSpec::finite(base(), ComponentCountLaw::degenerate(1).unwrap(), 1.0).unwrap();
    let atoms: Vec<f64> = (0..5000)
        .map(|s| {
            let p = sample_prior(&spec, 1, s).unwrap();
            assert_eq!(p.len(), 1);
            p.atoms()[0]
        })
        .collect();
    let b = base();
    assert!(ks_statistic(&atoms, |t| b.cdf(t)) < ks_critical_1pct(atoms.len()));
}

#[test]
fn posterior_concentrates_on_uniform_data() {
    let truth = StepDensity::uniform(1.0).unwrap();
    let data = AtomicMixture::point(1.0).unwrap().sample_iid(2000, 11);
    let config = McmcConfig {
        iterations: 3000,
        burn_in: 1000,
        thinning: 2,
        seed: 12,
    };
    for draws in [
        run_dp_posterior(&data, &dp(), &config).unwrap(),
        run_finite_mixture_posterior(&data, &finite(), &config).unwrap(),
    ] {
        let mut l1: Vec<f64> = draws
            .draws
            .iter()
            .map(|p| distance(&p.to_step(Some(1.0)).unwrap(), &truth, Metric::L1).unwrap())
            .collect();
        l1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(l1[l1.len() / 2] < 0.15, "median L1 {}", l1[l1.len() / 2]);
    }
}

#[test]
fn posterior_median_recovers_a_uniform_height() {
    // Uniform[0, 0.8] has height 1.25 at 0.4.
    let data: Vec<f64> = AtomicMixture::point(0.8).unwrap().sample_iid(2000, 21);
    let config = McmcConfig {
        iterations: 3000,
        burn_in: 1000,
        thinning: 2,
        seed: 22,
    };
    let draws = run_dp_posterior(&data, &dp(), &config).unwrap();
    let m = posterior_median_pointwise(&draws, 0.4).unwrap();
    assert!((m - 1.25).abs() < 0.15, "{m}");
}

#[test]
fn samplers_are_deterministic_given_the_seed() {
    let data = AtomicMixture::point(1.0).unwrap().sample_iid(100, 31);
    let c = cfg(300, 100, 32);
    assert_eq!(run_dp_posterior(&data, &dp(), &c).unwrap(), run_dp_posterior(&data, &dp(), &c).unwrap());
    assert_eq!(
        run_finite_mixture_posterior(&data, &finite(), &c).unwrap(),
        run_finite_mixture_posterior(&data, &finite(), &c).unwrap()
    );
}

#[test]
fn samplers_reject_out_of_support_data() {
    let c = cfg(10, 1, 0);
    assert!(run_dp_posterior(&[0.5, 1.5], &dp(), &c).is_err());
    assert!(run_finite_mixture_posterior(&[0.0, 0.5], &finite(), &c).is_err());
    assert!(run_dp_posterior(&[0.5], &finite(), &c).is_err());
}
