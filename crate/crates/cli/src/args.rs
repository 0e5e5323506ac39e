//! Command-line grammar and validation.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsense::gaussian::Su11Config;
use qsense::scenarios::{Probe, SweepAxis};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Two outcomes with P(1) = x.
    Bernoulli,
    /// Photon counts with mean x.
    Poisson,
    /// Successes in --trials attempts with probability x.
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    Coherent,
    Noon,
    Fock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    NIn,
    Gamma,
}

#[derive(Debug, Parser)]
#[command(
    name = "qsense",
    version,
    about = "Precision bounds, optical-probe simulations and estimator checks for quantum metrology"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for Monte-Carlo runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write a gnuplot script next to the CSV (sweep only).
    #[arg(long, global = true)]
    gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classical Fisher information and Cramér-Rao bound of a model.
    Fisher(FisherArgs),
    /// Quantum Fisher information of a probe under a phase shift, by two methods.
    Qfi(ProbeArgs),
    /// Phase bound for a probe in one interferometer arm.
    Mzi(MziArgs),
    /// NOON state with loss on both arms.
    NoonLoss(NoonLossArgs),
    /// Absorption estimation with a squeezed probe.
    Su11(Su11Args),
    /// Absorption estimation along n_in or gamma.
    Sweep(SweepArgs),
    /// Monte-Carlo maximum-likelihood runs against the Cramér-Rao bound.
    Mc(McArgs),
}

#[derive(Debug, Args)]
struct FisherArgs {
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Parameter value.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Number of binomial trials.
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long, default_value_t = 1)]
    n_measurements: u64,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[arg(long, value_enum)]
    probe: Option<ProbeKind>,
    /// Mean photon number of a coherent probe.
    #[arg(long, allow_hyphen_values = true)]
    mean_photons: Option<f64>,
    /// Photon number of a NOON or Fock probe.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
struct MziArgs {
    #[command(flatten)]
    probe: ProbeArgs,
    #[arg(long, default_value_t = 1)]
    n_measurements: u64,
}

#[derive(Debug, Args)]
struct NoonLossArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
struct Su11Args {
    /// Mean photons per mode of the squeezed probe.
    #[arg(long, allow_hyphen_values = true)]
    n_in: Option<f64>,
    /// Absorption of the sample.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    n_measurements: u64,
    /// Mode passing through the sample (0 or 1).
    #[arg(long, default_value_t = 0)]
    lossy_mode: usize,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
    /// Comma-separated values; defaults to 25 log-spaced n_in in [0.1, 100]
    /// or 25 linear gamma in [0.01, 0.99].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    points: Option<Vec<f64>>,
    #[command(flatten)]
    fixed: Su11Args,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// True parameter value.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Samples per trial.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Number of binomial trials per sample.
    #[arg(long = "binomial-trials")]
    binomial_trials: Option<u32>,
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub job: Job,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub gnuplot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Bernoulli,
    Poisson,
    Binomial { trials: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Fisher { model: Model, x: f64, n_measurements: u64 },
    Qfi { probe: Probe },
    Mzi { probe: Probe, n_measurements: u64 },
    NoonLoss { n: usize, gamma: f64 },
    Su11(Su11Config),
    Sweep { axis: SweepAxis, points: Vec<f64>, fixed: Su11Config },
    Mc { model: Model, x: f64, samples: u64, trials: usize },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("missing required flag {flag}")))
}

fn check(ok: bool, flag: &str, value: impl std::fmt::Display, domain: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(usage(format!("{flag} must be in {domain}, got {value}")))
    }
}

fn check_gamma(gamma: Option<f64>, open: bool) -> Result<(), CliError> {
    if let Some(g) = gamma {
        if open {
            check(g > 0.0 && g < 1.0, "--gamma", g, "(0, 1)")?;
        } else {
            check((0.0..=1.0).contains(&g), "--gamma", g, "[0, 1]")?;
        }
    }
    Ok(())
}

fn check_n_in(n_in: Option<f64>) -> Result<(), CliError> {
    if let Some(n) = n_in {
        check(n > 0.0 && n.is_finite(), "--n-in", n, "(0, inf)")?;
    }
    Ok(())
}

fn check_measurements(n: u64) -> Result<(), CliError> {
    check(n >= 1, "--n-measurements", n, "[1, inf)")
}

fn model(kind: ModelKind, trials: Option<u32>, trials_flag: &str) -> Result<Model, CliError> {
    Ok(match kind {
        ModelKind::Bernoulli => Model::Bernoulli,
        ModelKind::Poisson => Model::Poisson,
        ModelKind::Binomial => {
            let trials = required(trials, trials_flag)?;
            check(trials >= 1, trials_flag, trials, "[1, inf)")?;
            Model::Binomial { trials }
        }
    })
}

fn check_model_x(model: &Model, x: f64) -> Result<(), CliError> {
    match model {
        Model::Poisson => check(x >= 0.0 && x.is_finite(), "--x", x, "[0, inf)"),
        _ => check((0.0..=1.0).contains(&x), "--x", x, "[0, 1]"),
    }
}

fn probe(args: ProbeArgs) -> Result<Probe, CliError> {
    Ok(match required(args.probe, "--probe")? {
        ProbeKind::Coherent => {
            let m = required(args.mean_photons, "--mean-photons")?;
            check(m >= 0.0 && m.is_finite(), "--mean-photons", m, "[0, inf)")?;
            Probe::Coherent { mean_photons: m }
        }
        ProbeKind::Noon => {
            let n = required(args.n, "--n")?;
            check(n >= 1, "--n", n, "[1, inf)")?;
            Probe::Noon { n }
        }
        ProbeKind::Fock => Probe::Fock {
            n: required(args.n, "--n")?,
        },
    })
}

fn su11_config(args: &Su11Args, open_gamma: bool) -> Result<(Option<f64>, Option<f64>), CliError> {
    check_gamma(args.gamma, open_gamma)?;
    check_n_in(args.n_in)?;
    check_measurements(args.n_measurements)?;
    check(args.lossy_mode <= 1, "--lossy-mode", args.lossy_mode, "{0, 1}")?;
    Ok((args.n_in, args.gamma))
}

/// Parses and validates `argv` (including the program name).
///
/// Range checks run before presence checks, so an out-of-range value is
/// reported even when other flags are missing.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let job = match cli.command {
        Command::Fisher(a) => {
            let kind = required(a.model, "--model")?;
            let model = model(kind, a.trials, "--trials")?;
            let x = required(a.x, "--x")?;
            check_model_x(&model, x)?;
            check_measurements(a.n_measurements)?;
            Job::Fisher {
                model,
                x,
                n_measurements: a.n_measurements,
            }
        }
        Command::Qfi(a) => Job::Qfi { probe: probe(a)? },
        Command::Mzi(a) => {
            check_measurements(a.n_measurements)?;
            Job::Mzi {
                probe: probe(a.probe)?,
                n_measurements: a.n_measurements,
            }
        }
        Command::NoonLoss(a) => {
            if let Some(g) = a.gamma {
                check((0.0..1.0).contains(&g), "--gamma", g, "[0, 1)")?;
            }
            let n = required(a.n, "--n")?;
            check(n >= 2, "--n", n, "[2, inf)")?;
            Job::NoonLoss {
                n,
                gamma: required(a.gamma, "--gamma")?,
            }
        }
        Command::Su11(a) => {
            let (n_in, gamma) = su11_config(&a, true)?;
            Job::Su11(Su11Config {
                n_in: required(n_in, "--n-in")?,
                gamma: required(gamma, "--gamma")?,
                n_measurements: a.n_measurements,
                lossy_mode: a.lossy_mode,
            })
        }
        Command::Sweep(a) => {
            let (n_in, gamma) = su11_config(&a.fixed, true)?;
            let axis = match required(a.axis, "--axis")? {
                AxisArg::NIn => SweepAxis::NIn,
                AxisArg::Gamma => SweepAxis::Gamma,
            };
            let points = a.points.unwrap_or_else(|| axis.default_points());
            if points.is_empty() {
                return Err(usage("--points must list at least one value"));
            }
            for &p in &points {
                match axis {
                    SweepAxis::NIn => check_n_in(Some(p)).map_err(|_| usage(format!("--points must be in (0, inf), got {p}")))?,
                    SweepAxis::Gamma => check_gamma(Some(p), true).map_err(|_| usage(format!("--points must be in (0, 1), got {p}")))?,
                }
            }
            let fixed = match axis {
                SweepAxis::NIn => Su11Config::new(points[0], required(gamma, "--gamma")?),
                SweepAxis::Gamma => Su11Config::new(required(n_in, "--n-in")?, points[0]),
            };
            Job::Sweep {
                axis,
                points,
                fixed: Su11Config {
                    n_measurements: a.fixed.n_measurements,
                    lossy_mode: a.fixed.lossy_mode,
                    ..fixed
                },
            }
        }
        Command::Mc(a) => {
            let kind = required(a.model, "--model")?;
            let model = model(kind, a.binomial_trials, "--binomial-trials")?;
            let x = required(a.x, "--x")?;
            check_model_x(&model, x)?;
            check(a.samples >= 1, "--samples", a.samples, "[1, inf)")?;
            check(a.trials >= 100, "--trials", a.trials, "[100, inf)")?;
            Job::Mc {
                model,
                x,
                samples: a.samples,
                trials: a.trials,
            }
        }
    };
    if cli.gnuplot {
        if !matches!(job, Job::Sweep { .. }) {
            return Err(usage("--gnuplot is only available for sweep"));
        }
        if cli.output.is_none() || cli.format != Format::Csv {
            return Err(usage("--gnuplot needs --output and --format csv"));
        }
    }
    Ok(RunConfig {
        job,
        output_path: cli.output,
        format: cli.format,
        seed: cli.seed,
        gnuplot: cli.gnuplot,
    })
}
