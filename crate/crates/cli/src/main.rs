use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use acoustiq::ModelKind;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "acoustiq", version, about = "Acoustically controlled cavity-mediated qubit coupling")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run configuration (JSON, or a manifest from an earlier run).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Overrides the model selected in the config.
    #[arg(long, global = true)]
    pub model: Option<ModelKind>,

    /// Reserved; no code path is stochastic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve one configuration and write its trajectory.
    Simulate,
    /// Sweep the drive frequency and write population maps.
    Sweep,
    /// Print dispersive couplings and secular couplings.
    Effective,
    /// Write the sideband comb of one modulated qubit.
    Spectrum,
    /// Acoustic wave parameters for a target D/M.
    DriveDesign,
    /// Optimal D/M for sideband orders 1 to 3.
    Optimize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.common.seed.is_some() {
        log::info!("--seed has no effect: every code path is deterministic");
    }
    let result = match cli.command {
        Command::Simulate => commands::simulate(&cli.common),
        Command::Sweep => commands::sweep(&cli.common),
        Command::Effective => commands::effective(&cli.common),
        Command::Spectrum => commands::spectrum(&cli.common),
        Command::DriveDesign => commands::drive_design(&cli.common),
        Command::Optimize => commands::optimize(&cli.common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
