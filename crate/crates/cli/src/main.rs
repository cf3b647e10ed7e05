//! `reactor`: command-line driver for the recycle reactor simulator.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 domain or numeric failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use recycle_reactor::analysis::lyapunov::LyapunovMethod;
use recycle_reactor::{KineticsForm, Method};

#[derive(Debug, Parser)]
#[command(
    name = "reactor",
    version,
    about = "Tubular reactor with recycle: orbits, Lyapunov exponents, bursts, sweeps"
)]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, env = "REACTOR_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Model parameters, integrator and initial condition. Flags override
/// values from `--config`, which override the built-in reference values.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// key = value file (a run manifest also works).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub da: Option<f64>,
    /// Reaction order.
    #[arg(long = "n", allow_hyphen_values = true)]
    pub order: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Recycle ratio.
    #[arg(long = "f", allow_hyphen_values = true)]
    pub recycle: Option<f64>,
    /// standard | as_printed
    #[arg(long)]
    pub kinetics_form: Option<KineticsForm>,
    /// Integration scheme: euler | rk4 | rk38
    #[arg(long)]
    pub integrator: Option<Method>,
    /// Integration steps per pass.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Integration scheme: euler | rk4 | rk38
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub passes: usize,
    #[arg(long, default_value_t = 0)]
    pub transient: usize,
    #[arg(long, default_value = "orbit.csv")]
    pub out: PathBuf,
    /// Also write the axial profile of the pass after the recorded series.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Estimator: variational | benettin
    #[arg(long, default_value_t = LyapunovMethod::Variational)]
    pub method: LyapunovMethod,
    #[arg(long, default_value_t = 20_000)]
    pub passes: usize,
    #[arg(long, default_value_t = 2000)]
    pub transient: usize,
    /// Shadow-orbit separation for the two-trajectory estimator.
    #[arg(long, default_value_t = 1e-9)]
    pub d0: f64,
    /// Convergence CSV `n,running_lambda`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BurstArgs {
    /// Fixed threshold instead of median + k·MAD.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long, default_value_t = 6.0)]
    pub mad_multiplier: f64,
    #[arg(long, default_value_t = 5)]
    pub merge_gap: usize,
}

#[derive(Debug, Args)]
pub struct BurstsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long, default_value_t = 50_000)]
    pub passes: usize,
    #[arg(long, default_value_t = 2000)]
    pub transient: usize,
    #[command(flatten)]
    pub detector: BurstArgs,
    /// Analyse an existing outlet CSV instead of simulating.
    #[arg(long)]
    pub from_csv: Option<PathBuf>,
    #[arg(long, default_value = "bursts.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long, default_value_t = 20_000)]
    pub passes: usize,
    #[arg(long, default_value_t = 2000)]
    pub transient: usize,
    /// Map of consecutive burst peaks instead of all samples.
    #[arg(long)]
    pub peaks: bool,
    #[command(flatten)]
    pub detector: BurstArgs,
    #[arg(long)]
    pub from_csv: Option<PathBuf>,
    #[arg(long, default_value = "delay_map.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub method: Option<Method>,
    /// Plan file; flags given explicitly override it.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub param: Option<String>,
    /// lo:hi:count
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    #[arg(long)]
    pub transient: Option<usize>,
    #[arg(long)]
    pub record: Option<usize>,
    /// Start every point from the initial condition.
    #[arg(long)]
    pub cold: bool,
    #[arg(long)]
    pub chunk_size: Option<usize>,
    /// Also estimate λ at every point.
    #[arg(long)]
    pub lyapunov: bool,
    #[arg(long)]
    pub lyapunov_passes: Option<usize>,
    /// Also classify the regime at every point.
    #[arg(long)]
    pub regime: bool,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
    #[arg(long, default_value = "sweep_lambda.csv")]
    pub lambda_out: PathBuf,
    #[arg(long, default_value = "sweep_summary.csv")]
    pub summary_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub method: Option<Method>,
    /// Pass budget.
    #[arg(long, default_value_t = 10_000)]
    pub passes: usize,
    /// Windowed exponents CSV `window_start,lambda`.
    #[arg(long)]
    pub windows_out: Option<PathBuf>,
    /// Report as a single CSV row instead of key = value lines.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct BracketArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long, default_value = "theta_h")]
    pub param: String,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 2000)]
    pub transient: usize,
    /// Passes per λ evaluation.
    #[arg(long, default_value_t = 5000)]
    pub passes: usize,
    /// Bisection log CSV `lo,hi,mid,chaotic`.
    #[arg(long)]
    pub log_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Outlet time series.
    Simulate(SimulateArgs),
    /// Largest Lyapunov exponent.
    Lyapunov(LyapunovArgs),
    /// Burst detection and inter-burst interval statistics.
    Bursts(BurstsArgs),
    /// Delay map of the outlet temperature or of burst peaks.
    Poincare(PoincareArgs),
    /// One-parameter sweep (bifurcation data, λ curve, regime map).
    Sweep(SweepArgs),
    /// Regime classification.
    Classify(ClassifyArgs),
    /// Bisection of a chaotic/non-chaotic boundary.
    Bracket(BracketArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let argv: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a, argv),
        Command::Lyapunov(a) => commands::lyapunov(a, argv),
        Command::Bursts(a) => commands::bursts(a, argv),
        Command::Poincare(a) => commands::poincare(a, argv),
        Command::Sweep(a) => commands::sweep(a, argv),
        Command::Classify(a) => commands::classify(a),
        Command::Bracket(a) => commands::bracket(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
