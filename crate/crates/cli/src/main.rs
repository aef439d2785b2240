//! `friedrichs <command> [--config file.json] [--dotted.path value ...]`

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, Failure};

#[derive(Parser)]
#[command(
    name = "friedrichs",
    version,
    about = "Scattering laboratory for the rank-one Friedrichs model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration; defaults are used for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Field overrides such as `--grid.N 1024` or `--potential.amplitude=2`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// S on the grid as CSV, plus the winding and the Plemelj checks.
    Scattering(Common),
    /// Eigenvalues and exceptional points as JSON.
    Eigenvalues(Common),
    /// Winding against eigenvalue count; exit 0 only when they match.
    Levinson(Common),
    /// Stationary against time-dependent wave operator, and the residual.
    #[command(name = "waveop-verify")]
    WaveopVerify(Common),
    /// Edge determinants of the boundary symbol and the square winding.
    #[command(name = "boundary-symbol")]
    BoundarySymbol(Common),
    /// Eigenvalue count and winding over a list of couplings.
    Sweep(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, run): (&str, Common, fn(&Context) -> commands::Outcome) = match cli.command {
        Command::Scattering(c) => ("scattering", c, commands::scattering),
        Command::Eigenvalues(c) => ("eigenvalues", c, commands::eigenvalues),
        Command::Levinson(c) => ("levinson", c, commands::levinson),
        Command::WaveopVerify(c) => ("waveop-verify", c, commands::waveop_verify),
        Command::BoundarySymbol(c) => ("boundary-symbol", c, commands::boundary),
        Command::Sweep(c) => ("sweep", c, commands::sweep),
    };
    let env_dir = std::env::var(config::OUTPUT_DIR_ENV).ok();
    let result = config::load(common.config.as_deref(), &common.overrides, env_dir)
        .map_err(|e| Failure::Config(e.to_string()))
        .and_then(|cfg| Context::new(cfg, name))
        .and_then(|ctx| run(&ctx).map(|ok| (ok, ctx)));
    match result {
        Ok((true, ctx)) => {
            eprintln!("{name}: ok, outputs in {}", ctx.out.display());
            ExitCode::SUCCESS
        }
        Ok((false, ctx)) => {
            eprintln!("{name}: check failed, see {}", ctx.out.display());
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("{name}: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("{name}: {msg}");
            ExitCode::from(2)
        }
    }
}
