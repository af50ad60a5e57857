use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hypercross::commands::{
    cmd_conditions, cmd_grid_info, cmd_lp_check, cmd_rates, cmd_sharpness,
    resolve_out_dir,
};
use hypercross::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "hypercross", version, about = "Sparse-grid quasi-interpolation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker pool size (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output directory (HYPERCROSS_OUT overrides).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence sweep with rate fit.
    Rates,
    /// Operator condition table.
    Conditions,
    /// Littlewood-Paley equivalence ratios.
    LpCheck,
    /// Lower-bound witness table.
    Sharpness,
    /// Grid sizes and combination plans.
    GridInfo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config <path> is required");
            return ExitCode::from(2);
        }
    };
    let cfg = match ExperimentConfig::load(&config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = resolve_out_dir(&cfg, cli.out.as_deref());
    let result = match cli.command {
        Command::Rates => cmd_rates(&cfg, &out, cli.jobs),
        Command::Conditions => cmd_conditions(&cfg, &out, cli.jobs),
        Command::LpCheck => cmd_lp_check(&cfg, &out, cli.jobs),
        Command::Sharpness => cmd_sharpness(&cfg, &out, cli.jobs),
        Command::GridInfo => cmd_grid_info(&cfg, &out, cli.jobs),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
