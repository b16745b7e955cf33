//! Command-line driver for the enantiomer-specific pumping simulator.
//!
//! Reads a TOML run configuration (or a built-in preset), dispatches one of
//! the `dark`, `evolve`, `steady`, `sweep` and `detect` subcommands, and
//! writes CSV or JSON. Output is deterministic for a given configuration.

use std::path::{Path, PathBuf};

use clap::Parser;

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod table;

pub use commands::{Command, Format, Output};
pub use config::{Resolved, RunConfig};
pub use error::CliError;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "esp",
    version,
    about = "Enantiomer-specific pumping of chiral molecules"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// Run configuration (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in configuration: fig2a..fig2f, fig3, indanol-meta.
    #[arg(long)]
    pub preset: Option<String>,

    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format; `detect` defaults to json, everything else to csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for parameter sweeps [default: available processors].
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,

    /// Sweep axis (kappa, n, delta, delta_e); overrides the configured one.
    #[arg(long)]
    pub axis: Option<config::AxisSel>,
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    match (&cli.config, &cli.preset) {
        (Some(path), _) => RunConfig::load(path),
        (None, Some(name)) => {
            let text = presets::preset(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset \"{name}\"; available: {}",
                    presets::names().collect::<Vec<_>>().join(", ")
                ))
            })?;
            RunConfig::parse(text)
        }
        (None, None) => Err(CliError::Config(
            "one of --config or --preset is required".into(),
        )),
    }
}

/// Resolves the configuration and runs the command on a pool of `--jobs` threads.
pub fn execute(cli: &Cli) -> Result<(Output, Option<PathBuf>), CliError> {
    let resolved = load_config(cli)?.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.jobs {
        pool = pool.num_threads(k as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Output(format!("cannot start worker pool: {e}")))?;
    let output = pool.install(|| commands::run(cli.command, &resolved, cli.format, cli.axis))?;
    let out = cli
        .out
        .clone()
        .or_else(|| resolved.output.as_ref().map(PathBuf::from));
    Ok((output, out))
}

/// Path of the JSON report written next to a CSV product.
pub fn companion_path(out: &Path) -> PathBuf {
    out.with_extension("report.json")
}

/// Writes the output to `out`, or to standard output.
pub fn write_output(output: &Output, out: Option<&Path>) -> Result<(), CliError> {
    use std::io::Write;
    match out {
        Some(path) => {
            std::fs::write(path, &output.body)?;
            if let Some(json) = &output.companion {
                std::fs::write(companion_path(path), json)?;
            }
        }
        None => std::io::stdout().lock().write_all(output.body.as_bytes())?,
    }
    Ok(())
}
