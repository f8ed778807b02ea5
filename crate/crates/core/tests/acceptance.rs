//! End-to-end acceptance suite. Every criterion is one test that prints a
//! single `criterion N ...: PASS|FAIL` line before asserting.
//!
//! The Monte Carlo criteria run the shipped configs in `configs/` at full
//! default scale and write their reports under the cargo target temp dir.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use common::{brute_force_lcm_slopes, direct_mixture_eval, mcmc_mean_and_se, mean_and_se};
use monodens::experiments::{
    fit_rate_slope, run_boundary_experiment, run_rate_experiment, write_outputs, ExperimentConfig, Report,
};
use monodens::grenander::grenander_fit;
use monodens::mcmc::{conjugate_theta_draw, run_dp_posterior, run_finite_mixture_posterior, McmcConfig};
use monodens::partition::{adaptive_kl_partition, k0, kl_against_step};
use monodens::priors::{BaseMeasure, ComponentCountLaw, PriorSpec};
use monodens::{distance, kl_divergence, AtomicMixture, Metric, StepDensity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report_line(id: u32, name: &str, passed: bool, detail: &str, started: Instant) {
    println!(
        "criterion {id} {name}: {} ({detail}; {:.1} s)",
        if passed { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::from_path(&path).unwrap()
}

fn out_dir(scenario: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(scenario)
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_grenander = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(1..=12);
        // Coarse grid so ties occur.
        let data: Vec<f64> = (0..n).map(|_| rng.random_range(1..=40) as f64 / 40.0).collect();
        let fit = grenander_fit(&data).unwrap();
        for (l, r, slope) in brute_force_lcm_slopes(&data) {
            worst_grenander = worst_grenander.max((fit.eval(0.5 * (l + r)) - slope).abs());
        }
    }
    let mut worst_eval = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(1..=10);
        let atoms: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..2.0)).collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let p = AtomicMixture::from_unsorted(atoms.iter().copied().zip(weights.iter().copied()).collect()).unwrap();
        let x = rng.random_range(0.0..2.2);
        worst_eval = worst_eval.max((p.eval(x) - direct_mixture_eval(&atoms, &weights, x)).abs());
    }
    let u1 = StepDensity::uniform(1.0).unwrap();
    let u2 = StepDensity::uniform(2.0).unwrap();
    let l1: f64 = distance(&u1, &u2, Metric::L1).unwrap();
    let h: f64 = distance(&u1, &u2, Metric::Hellinger).unwrap();
    let kl: f64 = kl_divergence(&u1, &u2).kl;
    // h² = ½[(1 − 1/√2)² + ½] = 1 − 1/√2.
    let closed = (l1 - 1.0).abs() < 1e-9
        && (h - (1.0 - 0.5f64.sqrt()).sqrt()).abs() < 1e-9
        && (h - 0.54120).abs() < 1e-5
        && (kl - 2f64.ln()).abs() < 1e-9;
    let elapsed = started.elapsed().as_secs_f64();
    let passed = worst_grenander < 1e-9 && worst_eval < 1e-9 && closed && elapsed < 10.0;
    report_line(
        1,
        "oracle equivalence",
        passed,
        &format!("grenander err {worst_grenander:.1e}, eval err {worst_eval:.1e}, L1 {l1}, h {h:.6}, KL {kl:.6}"),
        started,
    );
    assert!(passed);
}

#[test]
fn criterion_2_piecewise_constant_approximation() {
    let started = Instant::now();
    let f = |x: f64| 2.0 * (1.0 - x);
    let bound_const = k0() * 2f64.powf(2.0 / 3.0);
    let mut within_bound = true;
    let mut pts = Vec::new();
    let mut detail = String::new();
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let (p, trace) = adaptive_kl_partition(f, eps, 1.0, 2.0).unwrap();
        let kl = kl_against_step(&f, &p.to_step(Some(1.0)).unwrap(), 1.0, 1e-13);
        within_bound &= (trace.piece_count as f64) <= bound_const / eps;
        detail.push_str(&format!("eps {eps}: {} pieces, KL {kl:.3e}; ", trace.piece_count));
        pts.push((eps.ln(), kl.ln()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let passed = within_bound && (slope - 2.0).abs() <= 0.3 && started.elapsed().as_secs_f64() < 30.0;
    report_line(2, "piecewise-constant approximation", passed, &format!("{detail}KL slope {slope:.3}"), started);
    assert!(passed);
}

#[test]
fn criterion_3_mcmc_correctness() {
    let started = Instant::now();
    let base = BaseMeasure::bounded(2.0, 1.0).unwrap();
    let mut ok = true;
    let mut detail = String::new();

    // Prior reproduction: with empty data, E f_P(x) equals the kernel marginal.
    let cfg = |seed| McmcConfig {
        iterations: 20_000,
        burn_in: 1000,
        thinning: 1,
        seed,
    };
    let dp = PriorSpec::dirichlet(base, 1.0).unwrap();
    let finite = PriorSpec::finite(base, ComponentCountLaw::factorial_decay(20).unwrap(), 1.0).unwrap();
    let dp_draws = run_dp_posterior(&[], &dp, &cfg(1)).unwrap();
    let fm_draws = run_finite_mixture_posterior(&[], &finite, &cfg(2)).unwrap();
    for x in [0.1, 0.5, 0.9] {
        let exact = base.kernel_marginal(x);
        for (name, draws) in [("dp", &dp_draws), ("finite", &fm_draws)] {
            let (m, se) = mcmc_mean_and_se(&draws.values_at(x));
            let z = (m - exact) / se;
            ok &= z.abs() < 4.0;
            detail.push_str(&format!("{name} f({x}) z={z:.2}; "));
        }
    }
    let law = ComponentCountLaw::factorial_decay(20).unwrap();
    let ks: Vec<f64> = fm_draws.cluster_count_trace.iter().map(|&k| k as f64).collect();
    let (m, se) = mcmc_mean_and_se(&ks);
    let z = (m - law.mean()) / se;
    ok &= z.abs() < 4.0;
    detail.push_str(&format!("E K z={z:.2}; "));

    // Conjugate draw: density ∝ 1/θ on [0.7, 1] has mean 0.3 / ln(10/7).
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| conjugate_theta_draw(0.7, 3, &base, &mut rng).unwrap())
        .collect();
    let (m, se) = mean_and_se(&draws);
    let exact = 0.3 / (10.0f64 / 7.0).ln();
    let z = (m - exact) / se;
    ok &= z.abs() < 3.0 && (exact - 0.8412).abs() < 1e-4;
    detail.push_str(&format!("conjugate mean {m:.5} vs {exact:.5} z={z:.2}"));

    let passed = ok && started.elapsed().as_secs_f64() < 120.0;
    report_line(3, "mcmc correctness", passed, &detail, started);
    assert!(passed);
}

fn run_rate(name: &str) -> (Report, f64) {
    let started = Instant::now();
    let mut cfg = config(name);
    cfg.output_dir = Some(out_dir(&cfg.scenario));
    let report = Report::Rate(run_rate_experiment(&cfg, jobs()).unwrap());
    write_outputs(&report, &cfg.output_dir()).unwrap();
    (report, started.elapsed().as_secs_f64())
}

fn rate_summary(report: &Report) -> String {
    match report {
        Report::Rate(r) => {
            let radii: Vec<String> = r
                .cells
                .iter()
                .map(|c| format!("{}:{:.4}", c.n, c.mean_radius.unwrap_or(f64::NAN)))
                .collect();
            format!("{}; mean radii {}; failures {}", r.verdict.note, radii.join(" "), r.failures.len())
        }
        Report::Boundary(b) => b.verdict.note.clone(),
    }
}

#[test]
fn criterion_4_global_l1_rate() {
    let started = Instant::now();
    let (report, secs) = run_rate("global_l1.json");
    let passed = report.passed() && secs <= 2.0 * 3600.0;
    report_line(4, "global L1 rate", passed, &rate_summary(&report), started);
    assert!(passed);
}

#[test]
fn criterion_5_boundary_estimators() {
    let started = Instant::now();
    let mut cfg = config("boundary_at_zero.json");
    cfg.output_dir = Some(out_dir(&cfg.scenario));
    let report = run_boundary_experiment(&cfg, jobs()).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let passed = report.verdict.median_halves && !report.verdict.grenander_halves && secs <= 3600.0;
    let detail = report.verdict.note.clone();
    write_outputs(&Report::Boundary(report), &cfg.output_dir()).unwrap();
    report_line(5, "boundary estimators at zero", passed, &detail, started);
    assert!(passed);
}

#[test]
fn criterion_6_pointwise_and_sup_rates() {
    let started = Instant::now();
    let (pointwise, t1) = run_rate("pointwise_midpoint.json");
    let (sup, t2) = run_rate("sup_subinterval.json");
    let (whole, t3) = run_rate("sup_whole_interval.json");
    let trend = match &whole {
        Report::Rate(r) => r.verdict.monotone_trend,
        _ => false,
    };
    let passed = pointwise.passed() && sup.passed() && trend && t1.max(t2).max(t3) <= 2.0 * 3600.0;
    let detail = format!(
        "pointwise: {} | sup [0.1, 0.9]: {} | whole-interval sup trend {}: {}",
        rate_summary(&pointwise),
        rate_summary(&sup),
        if trend { "decreasing" } else { "not decreasing" },
        rate_summary(&whole)
    );
    report_line(6, "pointwise and sup-norm rates", passed, &detail, started);
    assert!(passed);
}

#[test]
fn criterion_7_half_line_rate() {
    let started = Instant::now();
    let (report, secs) = run_rate("half_line_exponential.json");
    let passed = report.passed() && secs <= 2.0 * 3600.0;
    // Slope before the log correction, for diagnosis only.
    let raw = match &report {
        Report::Rate(r) => {
            let pts: Vec<(usize, f64)> = r.cells.iter().filter_map(|c| Some((c.n, c.mean_radius?))).collect();
            fit_rate_slope(&pts).map(|f| f.slope).unwrap_or(f64::NAN)
        }
        _ => f64::NAN,
    };
    let detail = format!("{}; uncorrected slope {raw:.4}", rate_summary(&report));
    report_line(7, "half-line exponential rate", passed, &detail, started);
    assert!(passed);
}

#[test]
fn criterion_8_determinism() {
    let started = Instant::now();
    let mut identical = true;
    for (name, boundary) in [("global_l1.json", false), ("boundary_at_zero.json", true)] {
        let mut cfg = config(name);
        cfg.experiment.n_grid = vec![250, 500];
        cfg.experiment.replications = 3;
        let mut outputs = Vec::new();
        for jobs in [1, 3] {
            let dir = out_dir(&format!("determinism_{}_{jobs}", cfg.scenario));
            let report = if boundary {
                Report::Boundary(run_boundary_experiment(&cfg, jobs).unwrap())
            } else {
                Report::Rate(run_rate_experiment(&cfg, jobs).unwrap())
            };
            write_outputs(&report, &dir).unwrap();
            outputs.push((
                std::fs::read(dir.join("report.json")).unwrap(),
                std::fs::read(dir.join("radii.csv")).unwrap(),
            ));
        }
        identical &= outputs[0] == outputs[1];
    }
    report_line(8, "determinism", identical, "rate and boundary reports with 1 and 3 threads", started);
    assert!(identical);
}
