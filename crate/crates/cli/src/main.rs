//! Command-line front end: single fits, the Grenander baseline, the
//! piecewise-constant approximation and the Monte Carlo experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monodens::experiments::{
    run_boundary_experiment, run_posterior, run_rate_experiment, write_outputs, emit_report, ExperimentConfig,
    ExperimentError, Format, LossKind, Report, TrueDensity,
};
use monodens::grenander::{boundary_modified_eval, grenander_fit};
use monodens::mcmc::{effective_sample_size, McmcConfig};
use monodens::partition::{adaptive_kl_partition, kl_against_step, piece_bound};
use monodens::priors::{validate_prior_conditions, BaseMeasure, ComponentCountLaw, PriorSpec};
use monodens::summaries::{credible_band, AnalyticDensity};
use serde_json::json;

#[derive(Parser)]
#[command(name = "monodens", version, about = "Monotone density estimation with mixtures of uniforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Posterior summaries for one data set.
    Fit(FitArgs),
    /// Grenander estimator of one data set.
    Grenander(GrenanderArgs),
    /// Piecewise-constant KL approximation of a known density.
    Approximate(ApproximateArgs),
    /// Contraction-rate experiment from a JSON config.
    Rate(RunArgs),
    /// Boundary experiment: estimators of f(0) across sample sizes.
    Boundary(RunArgs),
    /// Rate experiment with the loss forced to the sup norm.
    Supnorm(RunArgs),
    /// Re-renders the plot of an existing report.json.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorChoice {
    Dirichlet,
    Finite,
}

#[derive(Args)]
struct FitArgs {
    /// Whitespace-separated positive observations; `#` starts a comment.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "dirichlet")]
    prior: PriorChoice,
    /// Dirichlet-process mass.
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Exponent of the base measure.
    #[arg(long, default_value_t = 2.0)]
    exponent: f64,
    /// Support bound of the base measure; omit for the half line.
    #[arg(long)]
    support: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    tail_rate: f64,
    #[arg(long, default_value_t = 50)]
    k_max: usize,
    #[arg(long, default_value_t = 1.0)]
    dirichlet_weight: f64,
    #[arg(long, default_value_t = 5000)]
    iterations: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 2)]
    thinning: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of evaluation points for the band.
    #[arg(long, default_value_t = 41)]
    grid_points: usize,
    #[arg(long, default_value_t = 0.9)]
    level: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GrenanderArgs {
    #[arg(long)]
    data: PathBuf,
    /// `ε` of the boundary-corrected estimator; requires --support.
    #[arg(long)]
    boundary_eps: Option<f64>,
    #[arg(long)]
    support: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Uniform,
    Triangular,
    TruncatedExponential,
}

#[derive(Args)]
struct ApproximateArgs {
    #[arg(long, value_enum, default_value = "triangular")]
    family: Family,
    #[arg(long, default_value_t = 1.0)]
    support: f64,
    /// Rate of the truncated exponential.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the config's output_dir.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    report: PathBuf,
    /// Defaults to plot.svg next to the report.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Runtime(String),
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e.exit_code() {
            2 => CliError::Input(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<monodens::Error> for CliError {
    fn from(e: monodens::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Grenander(a) => grenander(a),
        Command::Approximate(a) => approximate(a),
        Command::Rate(a) => experiment(a, Mode::Rate),
        Command::Boundary(a) => experiment(a, Mode::Boundary),
        Command::Supnorm(a) => experiment(a, Mode::Supnorm),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read_data(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut data = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| CliError::Input(format!("{}: cannot parse {tok:?}", path.display())))?;
            data.push(v);
        }
    }
    if data.is_empty() {
        return Err(CliError::Input(format!("{}: no observations", path.display())));
    }
    Ok(data)
}

fn write_json(value: &serde_json::Value, output: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let data = read_data(&a.data)?;
    let input = |e: monodens::Error| CliError::Input(e.to_string());
    let base = match a.support {
        Some(l) => BaseMeasure::bounded(a.exponent, l),
        None => BaseMeasure::unbounded(a.exponent, a.tail_rate),
    }
    .map_err(input)?;
    let spec = match a.prior {
        PriorChoice::Dirichlet => PriorSpec::dirichlet(base, a.mass),
        PriorChoice::Finite => {
            PriorSpec::finite(base, ComponentCountLaw::factorial_decay(a.k_max).map_err(input)?, a.dirichlet_weight)
        }
    }
    .map_err(input)?;
    let cfg = McmcConfig {
        iterations: a.iterations,
        burn_in: a.burn_in,
        thinning: a.thinning,
        seed: a.seed,
    };
    cfg.validate().map_err(input)?;
    if a.grid_points < 2 {
        return Err(CliError::Input("--grid-points must be at least 2".into()));
    }
    let draws = run_posterior(&data, &spec, &cfg)?;
    let top = a.support.unwrap_or_else(|| data.iter().fold(0.0f64, |m, &x| m.max(x)));
    let grid: Vec<f64> = (0..a.grid_points)
        .map(|i| top * i as f64 / (a.grid_points - 1) as f64)
        .collect();
    let band = credible_band(&draws, &grid, a.level)?;
    let mid = draws.values_at(top / 2.0);
    let ess = effective_sample_size(&mid).ok();
    let trace = &draws.cluster_count_trace;
    let mean_clusters = trace.iter().sum::<usize>() as f64 / trace.len().max(1) as f64;
    let value = json!({
        "n": data.len(),
        "draws": draws.len(),
        "prior_conditions": validate_prior_conditions(&spec),
        "mean_cluster_count": mean_clusters,
        "acceptance_rates": draws.acceptance_rates,
        "ess_at_midpoint": ess,
        "level": a.level,
        "band": band,
    });
    write_json(&value, a.output.as_deref())
}

fn grenander(a: GrenanderArgs) -> Result<(), CliError> {
    let data = read_data(&a.data)?;
    let fit = grenander_fit(&data).map_err(|e| CliError::Input(e.to_string()))?;
    let modified = match (a.boundary_eps, a.support) {
        (Some(eps), Some(l)) => Some(boundary_modified_eval(&fit, 0.0, data.len(), eps, l)?),
        (None, None) => None,
        _ => return Err(CliError::Input("--boundary-eps and --support go together".into())),
    };
    let value = json!({
        "n": data.len(),
        "knots": fit.density().knots(),
        "heights": fit.density().heights(),
        "at_zero": fit.at_zero(),
        "modified_at_zero": modified,
    });
    write_json(&value, a.output.as_deref())
}

fn approximate(a: ApproximateArgs) -> Result<(), CliError> {
    let truth = match a.family {
        Family::Uniform => TrueDensity::Uniform { support: a.support },
        Family::Triangular => TrueDensity::Triangular { support: a.support },
        Family::TruncatedExponential => TrueDensity::TruncatedExponential {
            support: a.support,
            rate: a.rate,
        },
    };
    truth.validate().map_err(CliError::Input)?;
    let f = |x: f64| truth.pdf(x);
    let bound = f(0.0);
    let (mixture, trace) =
        adaptive_kl_partition(f, a.eps, a.support, bound).map_err(|e| CliError::Input(e.to_string()))?;
    let step = mixture.to_step(Some(a.support))?;
    let value = json!({
        "density": truth.describe(),
        "eps": a.eps,
        "piece_count": trace.piece_count,
        "piece_bound": piece_bound(a.eps, a.support, bound),
        "kl": kl_against_step(&f, &step, a.support, 1e-12),
        "trace": trace,
        "atoms": mixture.atoms(),
        "weights": mixture.weights(),
    });
    write_json(&value, a.output.as_deref())
}

enum Mode {
    Rate,
    Boundary,
    Supnorm,
}

fn experiment(a: RunArgs, mode: Mode) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::from_path(&a.config)?;
    if let Some(out) = a.output {
        cfg.output_dir = Some(out);
    }
    let report = match mode {
        Mode::Rate => Report::Rate(run_rate_experiment(&cfg, a.jobs)?),
        Mode::Supnorm => {
            cfg.experiment.loss = LossKind::Sup;
            cfg.validate()?;
            Report::Rate(run_rate_experiment(&cfg, a.jobs)?)
        }
        Mode::Boundary => Report::Boundary(run_boundary_experiment(&cfg, a.jobs)?),
    };
    let dir = cfg.output_dir();
    write_outputs(&report, &dir)?;
    let note = match &report {
        Report::Rate(r) => r.verdict.note.clone(),
        Report::Boundary(b) => b.verdict.note.clone(),
    };
    eprintln!(
        "{}: {} ({note}); outputs in {}",
        report.scenario(),
        if report.passed() { "PASS" } else { "FAIL" },
        dir.display()
    );
    Ok(())
}

fn plot(a: PlotArgs) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(&a.report).map_err(|e| CliError::Input(format!("{}: {e}", a.report.display())))?;
    let report: Report = serde_json::from_str(&text).map_err(|e| CliError::Input(e.to_string()))?;
    let out = a
        .output
        .unwrap_or_else(|| a.report.with_file_name("plot.svg"));
    emit_report(&report, Format::Svg, &out)?;
    Ok(())
}
