use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use robustq_cli::commands::{self, CurveGrid};
use robustq_cli::config::{Config, ModeConfig};
use robustq_cli::error::CliError;
use robustq_cli::{output, verify};

#[derive(Parser)]
#[command(name = "robustq", version, about = "Optimal payoffs under alpha-robust utility with an intractable claim")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration: solution.csv, profile.csv, meta.json.
    Solve(RunArgs),
    /// One payoff profile per value of a parameter, plus index.json.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// NAME=v1,v2,... (pairs such as gamma take v1:v2).
        #[arg(long)]
        sweep: String,
    },
    /// Sample the endowment-multiplier curve into curve.csv.
    BudgetCurve {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated multipliers.
        #[arg(long, value_delimiter = ',', conflicts_with = "xs")]
        lambdas: Option<Vec<f64>>,
        /// Comma-separated endowments, each inverted for its multiplier.
        #[arg(long, value_delimiter = ',')]
        xs: Option<Vec<f64>>,
        /// Default grid size around the configured multiplier.
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Seeded oracle cross-checks; exit 4 on failure.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 5, 6, 7])]
        sizes: Vec<usize>,
        /// Tolerance of the exact-arithmetic checks.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// Relative tolerance of the direct-solver comparison.
        #[arg(long, default_value_t = 1e-3)]
        direct_tolerance: f64,
        /// Also write verify.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pricing-kernel quantiles for a list of market prices of risk.
    KernelQuantile {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        thetas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 999)]
        points: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid nodes; overrides numerics.grid_n.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    ActiveSet,
    Penalized,
}

impl RunArgs {
    /// Config with command-line overrides applied, and the output directory.
    fn effective(&self) -> Result<(Config, PathBuf), CliError> {
        let mut config = Config::load(&self.config)?;
        if let Some(n) = self.grid {
            config.numerics.grid_n = n;
        }
        if let Some(mode) = self.mode {
            config.numerics.mode = match mode {
                Mode::ActiveSet => ModeConfig::ActiveSet,
                Mode::Penalized => ModeConfig::Penalized,
            };
        }
        if let Some(out) = &self.out {
            config.output.directory = out.clone();
        }
        config.model()?;
        let dir = config.output.directory.clone();
        Ok((config, dir))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => {
            let (config, out) = args.effective()?;
            commands::run_solve(&config, &out, args.seed)
        }
        Command::Sweep { run, sweep } => {
            let (config, out) = run.effective()?;
            commands::run_sweep(&config, &sweep, &out)
        }
        Command::BudgetCurve { run, lambdas, xs, points } => {
            let (config, out) = run.effective()?;
            let grid = match (lambdas, xs) {
                (Some(l), _) => CurveGrid::Lambdas(l),
                (None, Some(x)) => CurveGrid::Endowments(x),
                (None, None) => CurveGrid::Around { points },
            };
            commands::run_budget_curve(&config, grid, &out)
        }
        Command::Verify { seed, sizes, tolerance, direct_tolerance, out } => {
            let opts = verify::VerifyOptions { seed, tolerance, direct_tolerance, ..Default::default() };
            let report = verify::run(&sizes, opts)?;
            let text = serde_json::to_string_pretty(&report)?;
            println!("{text}");
            if let Some(dir) = out {
                output::write_json(&dir.join("verify.json"), &report)?;
            }
            match &report.first_failure {
                None => Ok(()),
                Some(c) => Err(CliError::Verify(format!("{} (size {:?}): {}", c.name, c.size, c.detail))),
            }
        }
        Command::KernelQuantile { config, out, thetas, points } => {
            let config = match config {
                Some(path) => Config::load(&path)?,
                None => Config::parse(DEFAULT_CONFIG)?,
            };
            let thetas = thetas.unwrap_or_else(|| vec![0.1, config.market.theta, 0.4]);
            let dir = out.unwrap_or_else(|| config.output.directory.clone());
            commands::write_kernel_quantiles(&Path::new(&dir).join("kernel_quantile.csv"), &config, &thetas, points)
        }
    }
}

/// Market defaults for commands that need no investor.
const DEFAULT_CONFIG: &str = r#"
alpha = 0.25
x = 7.66
[claim]
kind = "uniform"
y = 2.0
[utility]
c = [950.0, 950.0]
gamma = [0.010, 0.012]
"#;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
