use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prqs_core::analytic::{asymptotic_point, infinite_n_point, privacy_exact, AnalyticPoint};
use prqs_core::estimators::{run_check, CheckMode, SignedDataset};
use prqs_core::numerics::QuadratureSpec;
use prqs_core::simulate::{EmpiricalSummary, ProtocolConfig, TrialResult};
use serde::Serialize;

use prqs_lab::config::{self, ConfigOverrides};
use prqs_lab::error::{EXIT_ABORT, EXIT_OK};
use prqs_lab::format::{sig, sig_opt};
use prqs_lab::sweep::{self, Axis, SweepMethod, SweepSpec};
use prqs_lab::{data, runner, LabError, TOOL_VERSION};

const TOOL: &str = "prqs";
const TRIALS_SCHEMA: &str = "# prqs trials schema=1";

#[derive(Parser)]
#[command(
    name = "prqs",
    version,
    about = "Private remote phase sensing with BPSK coherent probes"
)]
struct Cli {
    /// Worker threads (0 = one per core). Falls back to PRQS_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate figures of merit at a single parameter point.
    Point {
        #[command(flatten)]
        config: ConfigArgs,
        /// Evaluation routes (comma separated).
        #[arg(long = "method", value_enum, value_delimiter = ',', default_values_t = [MethodArg::Exact])]
        methods: Vec<MethodArg>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Scan one parameter and write a CSV table.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Explicit grid values (comma separated, strictly increasing).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required_unless_present_any = ["log_grid", "linear_grid"])]
        grid: Vec<f64>,
        /// LO,HI,COUNT evenly spaced in log10.
        #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with_all = ["grid", "linear_grid"])]
        log_grid: Option<Vec<String>>,
        /// LO,HI,COUNT evenly spaced.
        #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with = "grid")]
        linear_grid: Option<Vec<String>>,
        #[arg(long = "method", value_enum, value_delimiter = ',', default_values_t = [MethodArg::Exact])]
        methods: Vec<MethodArg>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run a Monte Carlo experiment and write per-trial CSV plus a JSON summary.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Per-trial CSV.
        #[arg(long)]
        output: PathBuf,
        /// JSON summary (default: the CSV path with a .json extension).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run the CHECK phase on stored sign-corrected outcomes.
    Check {
        /// CSV with columns re,im.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, conflicts_with = "alpha2", required_unless_present = "alpha2")]
        alpha: Option<f64>,
        #[arg(long)]
        alpha2: Option<f64>,
        /// Rounds in the estimation phase (default: number of samples).
        #[arg(long)]
        n_rounds: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::InfiniteN)]
        mode: ModeArg,
    },
    /// Write the mean-photon-number and transmissivity scans at N = 100.
    Fig2 {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON file with any subset of the protocol fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "alpha2")]
    alpha: Option<f64>,
    /// Mean photon number, an alternative to --alpha.
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    n_rounds: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    phi_true: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_trials: Option<u64>,
    #[arg(long, value_enum)]
    check_mode: Option<ModeArg>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ProtocolConfig, LabError> {
        let flags = ConfigOverrides {
            alpha: self.alpha,
            alpha2: self.alpha2,
            eta: self.eta,
            n_rounds: self.n_rounds,
            phi_true: self.phi_true,
            epsilon: self.epsilon,
            delta: self.delta,
            seed: self.seed,
            n_trials: self.n_trials,
            check_mode: self.check_mode.map(CheckMode::from),
        };
        config::resolve(self.config.as_deref(), &flags)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    #[value(name = "exact")]
    Exact,
    #[value(name = "asymptotic")]
    Asymptotic,
    #[value(name = "infinite_n")]
    InfiniteN,
    #[value(name = "monte_carlo")]
    MonteCarlo,
}

impl From<MethodArg> for SweepMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => SweepMethod::Exact,
            MethodArg::Asymptotic => SweepMethod::Asymptotic,
            MethodArg::InfiniteN => SweepMethod::InfiniteN,
            MethodArg::MonteCarlo => SweepMethod::MonteCarlo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    #[value(name = "alpha2")]
    Alpha2,
    #[value(name = "eta")]
    Eta,
    #[value(name = "n_rounds")]
    NRounds,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Alpha2 => Axis::Alpha2,
            AxisArg::Eta => Axis::Eta,
            AxisArg::NRounds => Axis::NRounds,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "finite_n")]
    FiniteN,
    #[value(name = "infinite_n")]
    InfiniteN,
}

impl From<ModeArg> for CheckMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FiniteN => CheckMode::FiniteN,
            ModeArg::InfiniteN => CheckMode::InfiniteN,
        }
    }
}

#[derive(Serialize)]
struct PointReport<'a> {
    tool: &'a str,
    version: &'a str,
    config: ProtocolConfig,
    alpha2: f64,
    helstrom_error_prob: f64,
    results: Vec<AnalyticPoint>,
    monte_carlo: Option<EmpiricalSummary>,
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    tool: &'a str,
    version: &'a str,
    config: ProtocolConfig,
    summary: EmpiricalSummary,
}

#[derive(Serialize)]
struct CheckReport<'a> {
    tool: &'a str,
    version: &'a str,
    n_samples: usize,
    n_rounds: u64,
    alpha: f64,
    eta_hat_clipped: f64,
    #[serde(flatten)]
    decision: prqs_core::estimators::CheckDecision,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("prqs: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32, LabError> {
    let threads = runner::resolve_threads(cli.threads)?;
    let pool = runner::build_pool(threads)?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> Result<i32, LabError> {
    let spec = QuadratureSpec::default();
    match command {
        Command::Point {
            config,
            methods,
            output,
        } => {
            let config = config.resolve()?;
            cmd_point(&config, &methods, output.as_deref(), &spec)
        }
        Command::Sweep {
            config,
            axis,
            grid,
            log_grid,
            linear_grid,
            methods,
            output,
        } => {
            let fixed = config.resolve()?;
            let grid = if let Some(g) = log_grid {
                let (lo, hi, n) = parse_grid_triple(&g, "--log-grid")?;
                if !(lo > 0.0) {
                    return Err(LabError::Usage(
                        "--log-grid needs a positive lower end".into(),
                    ));
                }
                sweep::log_grid(lo, hi, n)
            } else if let Some(g) = linear_grid {
                let (lo, hi, n) = parse_grid_triple(&g, "--linear-grid")?;
                sweep::linear_grid(lo, hi, n)
            } else {
                grid
            };
            let sweep = SweepSpec {
                axis: axis.into(),
                grid,
                fixed,
                methods: methods.into_iter().map(SweepMethod::from).collect(),
            };
            write_sweep(&sweep, &output, &spec)?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            config,
            output,
            summary,
        } => {
            let config = config.resolve()?;
            let summary = summary.unwrap_or_else(|| output.with_extension("json"));
            cmd_simulate(&config, &output, &summary, &spec)
        }
        Command::Check {
            data,
            alpha,
            alpha2,
            n_rounds,
            epsilon,
            delta,
            mode,
        } => {
            let alpha = match (alpha, alpha2) {
                (Some(a), _) => a,
                (None, Some(a2)) if a2 >= 0.0 => a2.sqrt(),
                (None, Some(a2)) => {
                    return Err(LabError::Usage(format!(
                        "alpha2 must be non-negative, got {a2}"
                    )))
                }
                (None, None) => unreachable!("clap requires an amplitude"),
            };
            cmd_check(&data, alpha, n_rounds, epsilon, delta, mode.into(), &spec)
        }
        Command::Fig2 { out_dir } => {
            fs::create_dir_all(&out_dir).map_err(|e| LabError::io(&out_dir, e))?;
            write_sweep(
                &sweep::fig2_alpha2_spec(),
                &out_dir.join("fig2_alpha2.csv"),
                &spec,
            )?;
            write_sweep(
                &sweep::fig2_eta_spec(),
                &out_dir.join("fig2_eta.csv"),
                &spec,
            )?;
            Ok(EXIT_OK)
        }
    }
}

fn parse_grid_triple(parts: &[String], flag: &str) -> Result<(f64, f64, usize), LabError> {
    let bad = || LabError::Usage(format!("{flag} expects LO,HI,COUNT"));
    let [lo, hi, n] = parts else {
        return Err(bad());
    };
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
        n.trim().parse().map_err(|_| bad())?,
    ))
}

fn create(path: &Path) -> Result<BufWriter<File>, LabError> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| LabError::io(path, e))?,
    ))
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), LabError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| LabError::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| LabError::io("<stdout>", e)),
    }
}

fn cmd_point(
    config: &ProtocolConfig,
    methods: &[MethodArg],
    output: Option<&Path>,
    spec: &QuadratureSpec,
) -> Result<i32, LabError> {
    let point = config.channel_point()?;
    let mut results = Vec::new();
    let mut monte_carlo = None;
    for m in methods {
        match m {
            MethodArg::Exact => results.push(privacy_exact(&point, spec)?),
            MethodArg::Asymptotic => results.push(asymptotic_point(&point)?),
            MethodArg::InfiniteN => results.push(infinite_n_point(&point)),
            MethodArg::MonteCarlo => monte_carlo = Some(runner::run_experiment(config, spec)?.1),
        }
    }
    let report = PointReport {
        tool: TOOL,
        version: TOOL_VERSION,
        config: *config,
        alpha2: config.alpha * config.alpha,
        helstrom_error_prob: prqs_core::analytic::helstrom_error_prob(&point),
        results,
        monte_carlo,
    };
    write_json(&report, output)?;
    Ok(EXIT_OK)
}

fn write_sweep(sweep: &SweepSpec, output: &Path, spec: &QuadratureSpec) -> Result<(), LabError> {
    let rows = sweep.evaluate(spec)?;
    sweep::write_csv(create(output)?, &rows).map_err(|e| LabError::io(output, e))
}

fn cmd_simulate(
    config: &ProtocolConfig,
    output: &Path,
    summary_path: &Path,
    spec: &QuadratureSpec,
) -> Result<i32, LabError> {
    let (trials, summary) = runner::run_experiment(config, spec)?;
    write_trials(output, &trials).map_err(|e| LabError::io(output, e))?;
    let report = SimulateReport {
        tool: TOOL,
        version: TOOL_VERSION,
        config: *config,
        summary,
    };
    write_json(&report, Some(summary_path))?;
    Ok(EXIT_OK)
}

fn write_trials(path: &Path, trials: &[TrialResult]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{TRIALS_SCHEMA}")?;
    writeln!(out, "trial,phi_hat_alice,phi_hat_eve,eta_hat,check_passed")?;
    for (i, t) in trials.iter().enumerate() {
        let passed = t.check.map(|c| c.passed.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{i},{},{},{},{passed}",
            sig(t.phi_hat_alice),
            sig(t.phi_hat_eve),
            sig_opt(t.eta_hat),
        )?;
    }
    out.flush()
}

fn cmd_check(
    path: &Path,
    alpha: f64,
    n_rounds: Option<u64>,
    epsilon: f64,
    delta: f64,
    mode: CheckMode,
    spec: &QuadratureSpec,
) -> Result<i32, LabError> {
    let samples = data::read_samples(path)?;
    let n_samples = samples.len();
    let n_rounds = n_rounds.unwrap_or(n_samples as u64);
    let dataset = SignedDataset::new(samples, alpha)?;
    let decision = run_check(&dataset, n_rounds, epsilon, delta, mode, spec)?;
    let report = CheckReport {
        tool: TOOL,
        version: TOOL_VERSION,
        n_samples,
        n_rounds,
        alpha,
        eta_hat_clipped: decision.eta_hat_clipped(),
        decision,
    };
    write_json(&report, None)?;
    Ok(if decision.passed { EXIT_OK } else { EXIT_ABORT })
}
