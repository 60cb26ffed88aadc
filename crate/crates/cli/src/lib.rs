// SPDX-License-Identifier: Apache-2.0

//! Config loading and stage orchestration behind the `artistic` binary.

pub mod config;
pub mod pipeline;

pub use config::{load_config, parse_config, LoadedConfig, PipelineConfig};
pub use pipeline::{run_command, scratch_dir, CliError, Command, ErrorClass, RunReport};

/// Runs `command` on a dedicated pool of `jobs` worker threads (all logical
/// cores when `None`).
#[cfg(feature = "parallel")]
pub fn run_with_jobs(
    command: Command,
    config: &std::path::Path,
    jobs: Option<usize>,
) -> Result<RunReport, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| CliError {
        stage: "threads",
        class: ErrorClass::Io,
        message: e.to_string(),
    })?;
    pool.install(|| run_command(command, config))
}

/// Sequential build: `jobs` is accepted and ignored.
#[cfg(not(feature = "parallel"))]
pub fn run_with_jobs(
    command: Command,
    config: &std::path::Path,
    _jobs: Option<usize>,
) -> Result<RunReport, CliError> {
    run_command(command, config)
}
