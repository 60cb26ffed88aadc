// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use artistic_cli::{run_with_jobs, Command};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Copy the top-metal layer into its own layout.
    Extract,
    /// Generate logo art on the top metal and export GDSII and SVG.
    Art,
    /// Merge the art layout into the chip.
    Merge,
    /// Rasterize per-layer coverage tiles into the tiles directory.
    Render,
    /// Composite spilled tiles into the final PNG and PDF.
    Compose,
    /// Run every stage in memory.
    Pipeline,
}

#[derive(Debug, Parser)]
#[command(
    name = "artistic",
    version,
    about = "Top-metal chip art and tiled layout rendering"
)]
struct Args {
    command: Cmd,
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, short)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp_millis()
        .init();
    let command = match args.command {
        Cmd::Extract => Command::Extract,
        Cmd::Art => Command::Art,
        Cmd::Merge => Command::Merge,
        Cmd::Render => Command::Render,
        Cmd::Compose => Command::Compose,
        Cmd::Pipeline => Command::Pipeline,
    };
    match run_with_jobs(command, &args.config, args.jobs) {
        Ok(report) => {
            for a in &report.artifacts {
                log::info!("wrote {}", a.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
