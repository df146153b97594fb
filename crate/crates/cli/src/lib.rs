//! Command-line front end for `ldpfair`.
//!
//! Exit codes: 0 success, 1 invalid arguments or input, 2 unknown
//! scenario, 3 assumption violation under `--require-assumptions`, 4 a
//! property suite found a violation (`verify`).

pub mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use ldpfair::distribution::{parse_distribution, JointDistribution};
use ldpfair::metrics::fairness_report;
use ldpfair::model::{baseline_predictor, ldp_predictor_closed_form};
use ldpfair::rr::RRParams;
use ldpfair::scenarios::{all_scenarios, builtin_scenario, SYNTHETIC_EPS_GRID};
use ldpfair::sim::{run_experiment, ExperimentConfig, SimError};
use ldpfair::theory::theorem_verdict;
use ldpfair::verify::{run_builtin_suites, run_suites};

use report::AnalyticPoint;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("unknown scenario {0:?} (see `ldpfair scenarios list`)")]
    UnknownScenario(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("{0} property violation(s)")]
    Verify(usize),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 1,
            CliError::UnknownScenario(_) => 2,
            CliError::Assumption(_) => 3,
            CliError::Verify(_) => 4,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::UnknownScenario(u) => CliError::UnknownScenario(u.0),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ldpfair",
    version,
    about = "Fairness of majority-vote classifiers under randomized response on the sensitive attribute"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Builtin scenario registry.
    Scenarios {
        #[command(subcommand)]
        action: ScenariosAction,
    },
    /// Closed-form baseline and LDP metrics for a list of ε.
    Analyze(AnalyzeArgs),
    /// Same as `analyze` on a dense log-spaced grid.
    Sweep(AnalyzeArgs),
    /// Per-x flip thresholds of the LDP predictions.
    Thresholds {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Uniform-discrimination, reliable-Y and independence checks.
    Assumptions {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo replication with train/test splits.
    Simulate(SimulateArgs),
    /// Theorem property suites over builtins and random distributions.
    Verify {
        /// Random distributions per suite.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum ScenariosAction {
    List {
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct Source {
    /// Builtin scenario name.
    #[arg(long, conflicts_with = "dist")]
    scenario: Option<String>,
    /// Distribution document (JSON).
    #[arg(long)]
    dist: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Grid {
    /// Comma-separated privacy levels.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["eps_min", "eps_max", "points"])]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    grid: Grid,
    /// Add per-group acceptance and true-positive rates.
    #[arg(long)]
    per_group: bool,
    /// Exit 3 when uniform discrimination does not hold.
    #[arg(long)]
    require_assumptions: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    /// Experiment config document (JSON); flags override its fields.
    #[arg(long, conflicts_with_all = ["scenario", "dist"])]
    config: Option<PathBuf>,
    #[command(flatten)]
    grid: Grid,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    require_assumptions: bool,
    #[command(flatten)]
    output: Output,
}

struct Loaded {
    name: String,
    dist: JointDistribution,
    default_grid: Vec<f64>,
}

fn load(source: &Source) -> Result<Loaded, CliError> {
    match (&source.scenario, &source.dist) {
        (Some(name), _) => {
            let s = builtin_scenario(name).map_err(|e| CliError::UnknownScenario(e.0))?;
            let default_grid = s.default_eps_grid();
            Ok(Loaded {
                name: s.name.to_string(),
                dist: s.dist,
                default_grid,
            })
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let dist = parse_distribution(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Ok(Loaded {
                name: path.display().to_string(),
                dist,
                default_grid: SYNTHETIC_EPS_GRID.to_vec(),
            })
        }
        (None, None) => Err(CliError::Usage("one of --scenario or --dist is required".into())),
    }
}

fn check_eps(grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Usage("empty epsilon list".into()));
    }
    match grid.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        Some(e) => Err(CliError::Usage(format!("epsilon must be positive and finite, got {e}"))),
        None => Ok(()),
    }
}

/// `points` values log-spaced over `[min, max]`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![min];
    }
    let (lo, hi) = (min.ln(), max.ln());
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

const SWEEP_DEFAULT: (f64, f64, usize) = (0.05, 16.0, 100);

fn resolve_grid(grid: &Grid, fallback: Option<Vec<f64>>) -> Result<Option<Vec<f64>>, CliError> {
    let eps = if let Some(list) = &grid.eps {
        Some(list.clone())
    } else if grid.eps_min.is_some() || grid.eps_max.is_some() || grid.points.is_some() {
        let (dmin, dmax, dpoints) = SWEEP_DEFAULT;
        let min = grid.eps_min.unwrap_or(dmin);
        let max = grid.eps_max.unwrap_or(dmax);
        if !(min > 0.0 && max >= min && max.is_finite()) {
            return Err(CliError::Usage(format!("need 0 < --eps-min <= --eps-max, got {min}, {max}")));
        }
        Some(log_grid(min, max, grid.points.unwrap_or(dpoints)))
    } else {
        fallback
    };
    if let Some(g) = &eps {
        check_eps(g)?;
    }
    Ok(eps)
}

fn require_uniform(dist: &JointDistribution, name: &str) -> Result<(), CliError> {
    let doc = report::assumptions_doc(dist);
    if let Some(w) = doc.uniform_discrimination.witnesses {
        return Err(CliError::Assumption(format!(
            "{name}: uniform discrimination fails (Gamma favours group 1 at x={}, group 0 at x={})",
            w.favours_1, w.favours_0
        )));
    }
    Ok(())
}

fn analytic_report(
    loaded: &Loaded,
    grid: &[f64],
    per_group: bool,
) -> Result<report::AnalyzeReport, CliError> {
    let dist = &loaded.dist;
    let base_table = baseline_predictor(dist);
    let baseline = fairness_report(&base_table, dist).map_err(|e| CliError::Input(e.to_string()))?;
    let points = grid
        .iter()
        .map(|&epsilon| {
            let params = RRParams::from_epsilon(epsilon).map_err(|e| CliError::Usage(e.to_string()))?;
            let table = ldp_predictor_closed_form(dist, &params);
            let report = fairness_report(&table, dist).map_err(|e| CliError::Input(e.to_string()))?;
            let verdict = theorem_verdict(dist, &params).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(AnalyticPoint {
                epsilon,
                table,
                report,
                verdict,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(report::analyze_report(&loaded.name, dist, &base_table, &baseline, &points, per_group))
}

/// Output goes to a buffer first so a failing command writes nothing.
fn emit(
    output: &Output,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write, Format) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write(&mut buf, output.format)?;
    match &output.out {
        Some(path) => fs::write(path, &buf)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => Ok(stdout.write_all(&buf)?),
    }
}

fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Scenarios { action: ScenariosAction::List { output } } => {
            let doc = report::scenario_list(&all_scenarios());
            emit(&output, stdout, |w, f| match f {
                Format::Json => Ok(report::write_json(w, &doc)?),
                Format::Csv => Ok(report::write_scenarios_csv(w, &doc)?),
            })
        }
        Command::Analyze(args) => analyze(args, None, stdout),
        Command::Sweep(args) => {
            let (min, max, points) = SWEEP_DEFAULT;
            analyze(args, Some(log_grid(min, max, points)), stdout)
        }
        Command::Thresholds { source, output } => {
            let loaded = load(&source)?;
            let doc = report::thresholds_report(&loaded.name, &loaded.dist);
            emit(&output, stdout, |w, f| match f {
                Format::Json => Ok(report::write_json(w, &doc)?),
                Format::Csv => Ok(report::write_thresholds_csv(w, &doc)?),
            })
        }
        Command::Assumptions { source, output } => {
            let loaded = load(&source)?;
            let doc = report::AssumptionsReport {
                scenario: loaded.name.clone(),
                x_domain: loaded.dist.x_domain().to_vec(),
                assumptions: report::assumptions_doc(&loaded.dist),
            };
            emit(&output, stdout, |w, f| match f {
                Format::Json => Ok(report::write_json(w, &doc)?),
                Format::Csv => Ok(report::write_assumptions_csv(w, &doc)?),
            })
        }
        Command::Simulate(args) => simulate(args, stdout),
        Command::Verify { n, seed, output } => {
            let random = run_suites(n, seed);
            let builtin = run_builtin_suites();
            let doc = report::verify_report(n, seed, &random, &builtin);
            emit(&output, stdout, |w, f| match f {
                Format::Json => Ok(report::write_json(w, &doc)?),
                Format::Csv => Ok(report::write_verify_csv(w, &doc)?),
            })?;
            match doc.violations {
                0 => Ok(()),
                v => Err(CliError::Verify(v)),
            }
        }
    }
}

fn analyze(args: AnalyzeArgs, dense: Option<Vec<f64>>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&args.source)?;
    if args.require_assumptions {
        require_uniform(&loaded.dist, &loaded.name)?;
    }
    let fallback = dense.unwrap_or_else(|| loaded.default_grid.clone());
    let grid = resolve_grid(&args.grid, Some(fallback))?.expect("fallback provided");
    let doc = analytic_report(&loaded, &grid, args.per_group)?;
    emit(&args.output, stdout, |w, f| match f {
        Format::Json => Ok(report::write_json(w, &doc)?),
        Format::Csv => Ok(report::write_analyze_csv(w, &doc)?),
    })
}

fn simulate(args: SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => {
            if args.source.scenario.is_none() && args.source.dist.is_none() {
                return Err(CliError::Usage("one of --scenario, --dist or --config is required".into()));
            }
            ExperimentConfig {
                scenario: args.source.scenario.clone(),
                dist: args.source.dist.clone(),
                ..ExperimentConfig::for_scenario("")
            }
        }
    };
    if let Some(grid) = resolve_grid(&args.grid, None)? {
        config.eps_grid = Some(grid);
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(f) = args.train_fraction {
        config.train_fraction = f;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    let (name, dist, grid) = config.resolve()?;
    if args.require_assumptions {
        require_uniform(&dist, &name)?;
    }
    let result = run_experiment(&config)?;
    let doc = report::simulate_report(&result);
    let loaded = Loaded {
        name,
        dist,
        default_grid: Vec::new(),
    };
    emit(&args.output, stdout, |w, f| match f {
        Format::Json => Ok(report::write_json(w, &doc)?),
        Format::Csv => {
            let analytic = analytic_report(&loaded, &grid, false)?;
            Ok(report::write_simulate_csv(w, &doc, &analytic)?)
        }
    })
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Errors go to `stderr`.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
