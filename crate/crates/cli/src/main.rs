use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinreduce_cli::commands::{self, CliError, Outcome};
use spinreduce_cli::config::{self, ConfigError, Format, RunConfig};
use spinreduce_cli::output;

/// Reduced spin dynamics of a two-vector antiferromagnet.
#[derive(Parser)]
#[command(name = "spinreduce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `outputs.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict outputs to these formats; overrides `outputs.formats`.
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate from the configured initial state.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Integrate the six-dimensional (m, l) system instead of the reduced one.
        #[arg(long)]
        full: bool,
    },
    /// Fixed points, separatrices and the phase-portrait drawing.
    Portrait {
        #[command(flatten)]
        common: Common,
        /// Newton seeds per axis; overrides `portrait.grid_n`.
        #[arg(long)]
        grid_n: Option<usize>,
    },
    /// Lift a reduced trajectory table back to (m, l).
    Lift {
        #[command(flatten)]
        common: Common,
        /// Reduced trajectory CSV with columns t, u, p_u, v.
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Run the invariant suite and write a pass/fail report.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Fixed-point table only.
    FixedPoints {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid_n: Option<usize>,
    },
}

fn load(common: &Common) -> Result<RunConfig, ConfigError> {
    let mut cfg = config::load(&common.config)?;
    if let Some(dir) = &common.out {
        if dir.as_os_str().is_empty() {
            return Err(ConfigError::new("--out", "must not be empty"));
        }
        cfg.outputs.directory = dir.clone();
    }
    if !common.format.is_empty() {
        cfg.outputs.formats = common.format.clone();
    }
    Ok(cfg)
}

fn grid(cfg: &RunConfig, grid_n: Option<usize>) -> Result<usize, ConfigError> {
    match grid_n {
        Some(0) => Err(ConfigError::new("--grid-n", "must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(cfg.portrait.grid_n),
    }
}

/// Caps the rayon pool from `SPINREDUCE_THREADS` (0 or unset = automatic).
fn configure_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("SPINREDUCE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| ConfigError::new("SPINREDUCE_THREADS", format!("expected a non-negative integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::new("SPINREDUCE_THREADS", e.to_string()))
}

fn run(cli: Cli) -> Result<(RunConfig, Outcome), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { common, full } => {
            let cfg = load(&common)?;
            let out = commands::simulate(&cfg, full)?;
            Ok((cfg, out))
        }
        Command::Portrait { common, grid_n } => {
            let cfg = load(&common)?;
            let n = grid(&cfg, grid_n)?;
            let out = commands::portrait(&cfg, n)?;
            Ok((cfg, out))
        }
        Command::FixedPoints { common, grid_n } => {
            let cfg = load(&common)?;
            let n = grid(&cfg, grid_n)?;
            let out = commands::fixed_points(&cfg, n)?;
            Ok((cfg, out))
        }
        Command::Lift { common, trajectory } => {
            let cfg = load(&common)?;
            let out = commands::lift(&cfg, &trajectory)?;
            Ok((cfg, out))
        }
        Command::Check { common } => {
            let cfg = load(&common)?;
            let out = commands::check(&cfg)?;
            Ok((cfg, out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, outcome) = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let dir = &cfg.outputs.directory;
    match output::write_all(dir, &outcome.artifacts) {
        Ok(paths) => {
            // A closed pipe on stdout is not a failure of the run.
            let mut so = std::io::stdout().lock();
            let _ = so.write_all(outcome.summary.as_bytes());
            for p in paths {
                let _ = writeln!(so, "wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: writing to {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    if outcome.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
