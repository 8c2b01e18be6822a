use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use poisson_ustat::applications::{KernelSpec, KERNELS};
use poisson_ustat::bounds::{
    geometric_bound, local_bound, wasserstein_bound, BoundMode, BoundReport,
};
use poisson_ustat::harness::{
    formula_moments, ols_fit, rate_experiment, ratefit_csv, read_ratefit_csv, write_ratefit_csv,
    write_records_csv, write_report_json, ExperimentConfig,
};
use poisson_ustat::point_process::{sample, PointConfiguration, Window};
use poisson_ustat::ustat::evaluate;
use poisson_ustat::Error;

#[derive(Parser)]
#[command(
    name = "pustat",
    version,
    about = "U-statistics of Poisson processes: moments, bounds, rate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kernel name; overrides the configuration.
    #[arg(long)]
    kernel: Option<String>,
    /// Comma-separated intensities; overrides the configuration.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Master seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Replicates per intensity; overrides the configuration.
    #[arg(long)]
    replicates: Option<usize>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List registered kernels.
    Kernels,
    /// Sample one configuration of the process and write it as CSV.
    Sample(Common),
    /// Evaluate the U-statistic on a configuration CSV.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Configuration CSV as written by `sample`.
        #[arg(long)]
        points: PathBuf,
    },
    /// Formula mean and variance per intensity.
    Variance(Common),
    /// Wasserstein bound report per intensity.
    Bound {
        #[command(flatten)]
        common: Common,
        /// general, geometric or local; defaults from the kernel's flags.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Simulation experiments.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Summarize a rate-fit CSV.
    Report {
        /// CSV with header lambda,d_w,d_k,bound,ratio.
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Replicates per intensity, distances, bounds and a log-log slope fit.
    Rate(Common),
}

fn build_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut config = match (&common.config, &common.kernel) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::new(KernelSpec::named(name), vec![1.0], 2000, 0),
        (None, None) => return Err(Error::Config("give --config or --kernel".into())),
    };
    if let (Some(_), Some(name)) = (&common.config, &common.kernel) {
        config.kernel = KernelSpec {
            name: name.clone(),
            ..config.kernel
        };
        config.window = None;
    }
    if let Some(l) = &common.lambda {
        config.lambdas = l.clone();
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(r) = common.replicates {
        config.replicates = r;
    }
    config.validate()?;
    Ok(config)
}

fn window_note(window: &Window) {
    if let Window::Lines(w) = window {
        eprintln!(
            "note: line measure is dphi dp on [0, pi) x [-{r}, {r}], total mass 2*pi*{r}",
            r = w.radius
        );
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_mode(mode: &str) -> Result<BoundMode, Error> {
    serde_json::from_value(serde_json::Value::String(mode.to_string()))
        .map_err(|_| Error::Config(format!("unknown bound mode {mode}")))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Kernels => {
            for (name, about) in KERNELS {
                println!("{name:20} {about}");
            }
        }
        Command::Sample(common) => {
            let config = build_config(&common)?;
            let intensity = config.intensity(config.lambdas[0])?;
            window_note(intensity.window());
            let points = sample(&intensity, config.seed)?;
            match &common.out {
                Some(path) => points.save(path)?,
                None => {
                    let mut buf = Vec::new();
                    points
                        .write_csv(&mut buf)
                        .map_err(|e| Error::Config(e.to_string()))?;
                    print!("{}", String::from_utf8_lossy(&buf));
                }
            }
        }
        Command::Eval { common, points } => {
            let config = build_config(&common)?;
            let kernel = config.kernel()?;
            let points = PointConfiguration::load(&points)?;
            println!(
                "{}",
                poisson_ustat::point_process::fmt_f64(evaluate(&kernel, &points))
            );
        }
        Command::Variance(common) => {
            let config = build_config(&common)?;
            let kernel = config.kernel()?;
            window_note(&config.window()?);
            let mut text = String::from("lambda,mean,mean_se,variance,variance_se\n");
            for (l, &lambda) in config.lambdas.iter().enumerate() {
                let (m, v) = formula_moments(
                    &kernel,
                    &config.intensity(lambda)?,
                    &config.integrator.child(&[l as u64]),
                )?;
                text += &format!("{lambda},{},{},{},{}\n", m.value, m.se, v.value, v.se);
            }
            emit(&text, common.out.as_deref())?;
        }
        Command::Bound { common, mode } => {
            let config = build_config(&common)?;
            let kernel = config.kernel()?;
            window_note(&config.window()?);
            let mode = match mode {
                Some(m) => parse_mode(&m)?,
                None => config.bound_mode(&kernel),
            };
            let mut reports: Vec<BoundReport> = Vec::new();
            for &lambda in &config.lambdas {
                let intensity = config.intensity(lambda)?;
                let it = &config.integrator;
                reports.push(match mode {
                    BoundMode::General => wasserstein_bound(&kernel, &intensity, it)?,
                    BoundMode::Geometric => geometric_bound(&kernel, &intensity, it)?,
                    BoundMode::Local => local_bound(&kernel, &intensity, config.c_k, it)?,
                });
            }
            match (&common.out, reports.as_slice()) {
                (Some(path), [single]) => write_report_json(single, path)?,
                _ => {
                    let text =
                        serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n";
                    emit(&text, common.out.as_deref())?;
                }
            }
        }
        Command::Experiment(Experiment::Rate(common)) => {
            let config = build_config(&common)?;
            window_note(&config.window()?);
            let fit = rate_experiment(&config)?;
            if let Some(path) = &config.outputs.records {
                write_records_csv(&fit.batch.records, path)?;
            }
            match common.out.as_ref().or(config.outputs.ratefit.as_ref()) {
                Some(path) => write_ratefit_csv(&fit.points, path)?,
                None => print!("{}", ratefit_csv(&fit.points)),
            }
            eprintln!(
                "slope {:.4} (se {:.4}), mode {:?}, {} replicates per lambda",
                fit.fit.slope, fit.fit.slope_se, fit.mode, fit.replicates
            );
        }
        Command::Report { input } => {
            let points = read_ratefit_csv(&input)?;
            println!(
                "{:>10} {:>12} {:>12} {:>12} {:>10}  dominated",
                "lambda", "d_w", "d_k", "bound", "ratio"
            );
            for p in &points {
                println!(
                    "{:>10} {:>12.6} {:>12.6} {:>12.6} {:>10.3}  {}",
                    p.lambda,
                    p.d_w,
                    p.d_k,
                    p.bound,
                    p.ratio,
                    if p.d_w <= p.bound { "yes" } else { "no" }
                );
            }
            let x: Vec<f64> = points.iter().map(|p| p.lambda.ln()).collect();
            let y: Vec<f64> = points.iter().map(|p| p.d_w.ln()).collect();
            match ols_fit(&x, &y) {
                Ok(f) => println!(
                    "log-log slope of d_w: {:.4} (se {:.4})",
                    f.slope, f.slope_se
                ),
                Err(e) => println!("{e}"),
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DegenerateVariance { .. }
        | Error::DegenerateFunctional { .. }
        | Error::AssumptionViolation(_) => 3,
        Error::Config(_)
        | Error::InvalidWindow(_)
        | Error::InvalidIntensity(_)
        | Error::InvalidKernel(_)
        | Error::NotLocal(_)
        | Error::FitRefused(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
