use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

use commands::CliError;

/// UAV air-to-ground waveform and spectrum analysis.
#[derive(Debug, Parser)]
#[command(name = "uaswave", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean SINR and ICI share for every velocity and candidate spacing.
    SweepSinr(Common),
    /// Optimal subcarrier spacing per velocity, with per-candidate objective values.
    Optimize(Common),
    /// Fleet projections, optional dataset fit, densities and bandwidth figures.
    Forecast(Common),
    /// UAV densities per altitude class.
    Density(Common),
    /// CNPC bandwidth and required spectral efficiency.
    Bandwidth(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Monte Carlo seed, overriding `monte_carlo.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Use the Monte Carlo SINR estimate instead of the analytic model.
    #[arg(long)]
    mc: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::SweepSinr(c) => ("sweep-sinr", c),
        Command::Optimize(c) => ("optimize", c),
        Command::Forecast(c) => ("forecast", c),
        Command::Density(c) => ("density", c),
        Command::Bandwidth(c) => ("bandwidth", c),
    };
    match run(name, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(name: &str, common: &Common) -> Result<(), CliError> {
    let ctx = commands::Context::load(name, common.config.as_deref(), common.seed, common.mc)?;
    let out: &Path = &common.out;
    match name {
        "sweep-sinr" => commands::sweep_sinr(&ctx, out),
        "optimize" => commands::optimize(&ctx, out),
        "forecast" => commands::forecast(&ctx, out),
        "density" => commands::density(&ctx, out),
        "bandwidth" => commands::bandwidth(&ctx, out),
        _ => unreachable!("clap only yields known subcommands"),
    }
}
