mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subspace_holonomy::lambda::LambdaCase;

/// Process-level failure, mapped to the documented exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad or inconsistent configuration, or a violated precondition.
    Config(String),
    InPhase(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::InPhase(_) => 2,
            Failure::Config(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::InPhase(m) | Failure::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "holonomy", version, about = "Holonomic/dynamical decomposition of subspace evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy, Default)]
struct GridFlags {
    /// Number of time steps (overrides the config grid).
    #[arg(long)]
    steps: Option<usize>,
    /// Final time τ (overrides the config grid).
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    I,
    Ii,
    Iii,
}

impl From<CaseArg> for LambdaCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::I => LambdaCase::I,
            CaseArg::Ii => LambdaCase::Ii,
            CaseArg::Iii => LambdaCase::Iii,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write the report as JSON.
    Decompose {
        #[arg(long)]
        config: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Compare a Λ-system case against its closed form.
    Demo {
        #[arg(long, value_enum)]
        case: CaseArg,
        /// Detuning δ.
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        /// Rabi amplitude Ω₀.
        #[arg(long)]
        omega0: Option<f64>,
        /// Mixing angle η (case iii).
        #[arg(long)]
        eta: Option<f64>,
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Classify the evolution; exit 0 if separable, 1 if not.
    Separability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Write A(t), K(t), W(t) and O(0,t) per grid point as CSV.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Rerun under a random closed gauge and check covariance.
    GaugeCheck {
        #[arg(long)]
        config: PathBuf,
        /// Seed of the gauge path (the config seed still drives random systems).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        grid: GridFlags,
    },
}

fn overrides(grid: GridFlags, seed: Option<u64>) -> config::Overrides {
    config::Overrides {
        steps: grid.steps,
        tau: grid.tau,
        seed,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Decompose {
            config,
            out,
            seed,
            grid,
        } => commands::decompose(&config, out.as_deref(), overrides(grid, seed)),
        Command::Demo {
            case,
            delta,
            omega0,
            eta,
            grid,
        } => commands::demo(
            case.into(),
            commands::DemoOverrides {
                delta,
                omega0,
                eta,
                steps: grid.steps,
                tau: grid.tau,
            },
        ),
        Command::Separability { config, seed, grid } => {
            commands::separability(&config, overrides(grid, seed))
        }
        Command::Export {
            config,
            out,
            seed,
            grid,
        } => commands::export(&config, &out, overrides(grid, seed)),
        Command::GaugeCheck { config, seed, grid } => {
            commands::gauge_check(&config, seed, overrides(grid, None))
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
