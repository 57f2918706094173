use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semel_cli::{config::Task, run, ExperimentConfig, RunError};

/// Experiment runner for semilinear elliptic equations with measure data.
#[derive(Parser)]
#[command(name = "semel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the TOML experiment config
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Grid size (overrides the config)
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the fixed-point equation and write the solution grid
    Solve(Common),
    /// Solve and run the full verification report
    Verify(Common),
    /// Monte Carlo Feynman-Kac cross-check at a point
    Fk(Common),
    /// Mollified-Dirac sweep with limit diagnostics
    Sweep(Common),
    /// Split the measure into diffuse and concentrated parts
    Decompose(Common),
    /// Total-variation norm and the resolvent ladder
    Tvnorm(Common),
}

impl Command {
    fn task(&self) -> Task {
        match self {
            Command::Solve(_) => Task::Solve,
            Command::Verify(_) => Task::Verify,
            Command::Fk(_) => Task::Fk,
            Command::Sweep(_) => Task::Sweep,
            Command::Decompose(_) => Task::Decompose,
            Command::Tvnorm(_) => Task::Tvnorm,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Solve(c)
            | Command::Verify(c)
            | Command::Fk(c)
            | Command::Sweep(c)
            | Command::Decompose(c)
            | Command::Tvnorm(c) => c,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let task = cli.command.task();
    let common = cli.command.common();

    let text = match std::fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: cannot read {}: {e}", common.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match ExperimentConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = common.seed {
        cfg.options.seed = seed;
    }
    if let Some(grid) = common.grid {
        cfg.domain.grid_size = grid;
        if let Err(e) = cfg.validate() {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    }
    let out_dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));

    match run(task, cfg, &out_dir) {
        Ok(output) => {
            println!("{}", output.summary);
            println!(
                "report: {}\ngrid:   {}",
                output.report_path.display(),
                output.grid_path.display()
            );
            ExitCode::SUCCESS
        }
        Err(e @ RunError::Config(_))
        | Err(e @ RunError::NonConvergence(_))
        | Err(e @ RunError::CheckerViolation(_))
        | Err(e @ RunError::Internal(_)) => {
            eprintln!("{e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(5))
        }
    }
}
