//! `qsense` command-line front end: argument handling, dispatch to the core
//! library, and CSV/JSON emission.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::Path;

use qsense::estimator::crb_saturation;
use qsense::fisher::{fisher_information, BernoulliModel, BinomialModel, ParametricModel, PoissonCounting};
use qsense::fock::{qfi_pure_overlap, PhaseFamily};
use qsense::scenarios::{run_mzi_phase, run_noon_loss, run_su11, sweep, AbsorptionReport, Probe, SweepAxis};
use qsense::{cramer_rao_bound, DifferentiationConfig};

pub mod args;
pub mod records;

pub use args::{parse_args, Format, Job, Model, RunConfig};
pub use records::{format_sig, Table, Value};

/// Column order of absorption rows, shared by `su11` and `sweep`.
pub const ABSORPTION_COLUMNS: [&str; 8] = [
    "n_in",
    "gamma",
    "n_measurements",
    "delta_gamma_eq8",
    "delta_gamma_qfi",
    "delta_gamma_standard",
    "adv_db_power",
    "adv_db_amplitude",
];

#[derive(Debug)]
pub enum CliError {
    Clap(clap::Error),
    Usage(String),
    Compute(qsense::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Usage(_) => 2,
            CliError::Compute(qsense::Error::Domain { .. }) => 2,
            CliError::Compute(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Compute(e) => write!(f, "error: {e}"),
            CliError::Io(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<qsense::Error> for CliError {
    fn from(e: qsense::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Result of a run: the data, and the gnuplot script if one was requested.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub gnuplot: Option<String>,
}

fn model_name(model: &Model) -> &'static str {
    match model {
        Model::Bernoulli => "bernoulli",
        Model::Poisson => "poisson",
        Model::Binomial { .. } => "binomial",
    }
}

fn with_model<R>(model: &Model, x: f64, f: impl FnOnce(&dyn ParametricModel) -> R) -> R {
    match model {
        Model::Bernoulli => f(&BernoulliModel),
        Model::Poisson => f(&PoissonCounting::mean((2.0 * x).max(10.0))),
        Model::Binomial { trials } => f(&BinomialModel::new(*trials, 0.0, 1.0)),
    }
}

fn probe_fields(probe: &Probe) -> Vec<(&'static str, Value)> {
    let n = match *probe {
        Probe::Noon { n } | Probe::Fock { n } => Value::Int(n as u64),
        Probe::Coherent { .. } => Value::Float(f64::NAN),
    };
    vec![("probe", probe.name().into()), ("n", n)]
}

fn absorption_row(r: &AbsorptionReport) -> Vec<Value> {
    vec![
        r.n_in.into(),
        r.gamma.into(),
        r.n_measurements.into(),
        r.delta_gamma_eq8.into(),
        r.delta_gamma_qfi.into(),
        r.delta_gamma_standard.into(),
        r.advantage_db_power.into(),
        r.advantage_db_amplitude.into(),
    ]
}

fn gnuplot_script(csv_name: &str, axis: SweepAxis) -> String {
    let (column, label, log_x) = match axis {
        SweepAxis::NIn => (1, "n_in", "set logscale x\n"),
        SweepAxis::Gamma => (2, "gamma", ""),
    };
    format!(
        "set datafile separator ','\n\
         {log_x}set logscale y\n\
         set xlabel '{label}'\n\
         set ylabel 'Delta gamma'\n\
         set key top right\n\
         plot '{csv_name}' using {column}:4 skip 1 with linespoints title 'squeezed probe', \\\n\
         \x20    '' using {column}:5 skip 1 with lines title 'quantum limit', \\\n\
         \x20    '' using {column}:6 skip 1 with lines title 'coherent probe'\n"
    )
}

/// Runs a validated configuration and returns its output table.
pub fn execute(config: &RunConfig) -> Result<Output, CliError> {
    let mut gnuplot = None;
    let table = match &config.job {
        Job::Fisher { model, x, n_measurements } => {
            let fisher = with_model(model, *x, |m| fisher_information(m, *x, &DifferentiationConfig::default()))?;
            let bound = cramer_rao_bound(fisher, *n_measurements)?;
            Table::single(vec![
                ("model", model_name(model).into()),
                ("x", (*x).into()),
                ("n_measurements", (*n_measurements).into()),
                ("fisher", fisher.into()),
                ("bound", bound.bound.into()),
            ])
        }
        Job::Qfi { probe } => {
            let report = run_mzi_phase(*probe, 1)?;
            let state = probe.prepare()?;
            let family = PhaseFamily::new(state.space(), 0)?;
            let overlap = qfi_pure_overlap(&family, &state, 0.0, &DifferentiationConfig::unitary())?;
            let mut fields = probe_fields(probe);
            fields.extend([
                ("mean_photons", report.mean_photons.into()),
                ("qfi_variance", report.qfi.into()),
                ("qfi_overlap", overlap.into()),
            ]);
            Table::single(fields)
        }
        Job::Mzi { probe, n_measurements } => {
            let r = run_mzi_phase(*probe, *n_measurements)?;
            let mut fields = probe_fields(probe);
            fields.extend([
                ("mean_photons", r.mean_photons.into()),
                ("n_measurements", r.n_measurements.into()),
                ("qfi", r.qfi.into()),
                ("delta_n", r.delta_n.into()),
                ("delta_theta_bound", r.delta_theta_bound.into()),
                ("limit_label", r.limit_label.as_str().into()),
            ]);
            Table::single(fields)
        }
        Job::NoonLoss { n, gamma } => {
            let r = run_noon_loss(*n, *gamma)?;
            let second = r
                .one_loss_branches
                .iter()
                .map(|b| b.schmidt_coefficients.get(1).copied().unwrap_or(0.0))
                .fold(0.0, f64::max);
            Table::single(vec![
                ("n", r.n.into()),
                ("gamma", r.gamma.into()),
                ("total_probability", r.total_probability.into()),
                ("no_loss_probability", r.no_loss_probability.into()),
                ("one_loss_probability", r.one_loss_probability.into()),
                ("one_loss_branches", r.one_loss_branches.len().into()),
                ("max_second_schmidt", second.into()),
                ("weights_equal", r.weights_equal.into()),
                ("entanglement_destroyed", r.entanglement_destroyed.into()),
            ])
        }
        Job::Su11(c) => {
            let r = run_su11(c)?;
            let mut t = Table::new(ABSORPTION_COLUMNS.to_vec());
            t.push(absorption_row(&r));
            t.single = true;
            t
        }
        Job::Sweep { axis, points, fixed } => {
            let rows = sweep(*axis, points, fixed)?;
            let mut t = Table::new(ABSORPTION_COLUMNS.to_vec());
            for r in &rows {
                t.push(absorption_row(r));
            }
            if config.gnuplot {
                let path = config.output_path.as_deref().expect("validated: --gnuplot needs --output");
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                gnuplot = Some(gnuplot_script(&name, *axis));
            }
            t
        }
        Job::Mc { model, x, samples, trials } => {
            let r = with_model(model, *x, |m| crb_saturation(m, *x, *samples, *trials, config.seed))?;
            Table::single(vec![
                ("model", model_name(model).into()),
                ("x_true", r.x_true.into()),
                ("n_samples", r.n_samples.into()),
                ("trials", r.trials.into()),
                ("seed", r.seed.into()),
                ("empirical_mean", r.empirical_mean.into()),
                ("empirical_variance", r.empirical_variance.into()),
                ("crb_variance", r.crb_variance.into()),
                ("ratio", r.ratio.into()),
                ("bias_standard_errors", r.bias_standard_errors.into()),
                ("boundary_hits", r.boundary_hits.into()),
                ("non_asymptotic", r.non_asymptotic.into()),
            ])
        }
    };
    Ok(Output { table, gnuplot })
}

/// Replaces `path` with `bytes` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn render(config: &RunConfig, output: &Output) -> String {
    match config.format {
        Format::Csv => output.table.to_csv(),
        Format::Json => output.table.to_json(),
    }
}

/// Writes the rendered output to the configured destination.
pub fn emit(config: &RunConfig, output: &Output) -> Result<(), CliError> {
    let text = render(config, output);
    match &config.output_path {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            if let Some(script) = &output.gnuplot {
                write_atomic(&path.with_extension("gp"), script.as_bytes())?;
            }
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Worker threads requested through `QSENSE_THREADS`; `0` or unset means
/// rayon's default.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var("QSENSE_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("QSENSE_THREADS must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn run_inner(argv: Vec<OsString>) -> Result<(), CliError> {
    let config = parse_args(argv)?;
    let threads = thread_count()?;
    let output = if threads == 0 {
        execute(&config)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
        pool.install(|| execute(&config))?
    };
    emit(&config, &output)
}

/// Entry point: runs `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match run_inner(argv.into_iter().map(Into::into).collect()) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
        Err(e) => {
            eprintln!("qsense: {e}");
            e.exit_code()
        }
    }
}
