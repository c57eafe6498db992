//! Batch driver for the self-testing verifier toolkit.
//!
//! `selftest-kit <command> [--config <path>] [--alpha a] [--d n] [--seed k]
//! [--out path] [--format csv|json]`
//!
//! Exit codes: 0 — every asserted check passed; 1 — at least one check
//! failed; 2 — usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod config;
mod errata;
mod output;
mod runner;

use config::{Command, Format, SweepConfig};

/// Errors that abort a run before or outside the sweep itself.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] selftest_core::Error),
}

#[derive(Debug, Parser)]
#[command(name = "selftest-kit", version, about = "Verifier toolkit for Bell self-testing")]
struct Cli {
    /// Command to run; may be omitted when --config names one.
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON sweep config; omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the tilt grid with this single value.
    #[arg(long)]
    alpha: Option<f64>,
    /// Replace the dimension grid with this single value.
    #[arg(long)]
    d: Option<usize>,
    /// Replace the seed list with this single value.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; `-` writes to stdout.
    #[arg(long)]
    out: Option<String>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn build_config(cli: &Cli) -> Result<SweepConfig, CliError> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(path), command) => {
            let cfg = config::load_config(path)?;
            if let Some(cmd) = command {
                if cmd != cfg.command {
                    return Err(CliError::Config(format!(
                        "command line says '{}' but {} says '{}'",
                        cmd.name(),
                        path.display(),
                        cfg.command.name()
                    )));
                }
            }
            cfg
        }
        (None, Some(command)) => SweepConfig::with_defaults(command),
        (None, None) => {
            return Err(CliError::Config(
                "no command given and no --config to take one from".into(),
            ))
        }
    };
    if let Some(alpha) = cli.alpha {
        cfg.alpha_grid = vec![alpha];
    }
    if let Some(d) = cli.d {
        cfg.dims = vec![d];
    }
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &cli.out {
        cfg.output_path = out.clone();
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = build_config(cli)?;
    let rs = runner::run_command(&cfg)?;
    output::emit_results(&rs, cfg.format, &cfg.output_path)?;
    Ok(rs.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("selftest-kit: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_grids() {
        let cli = Cli::parse_from([
            "selftest-kit",
            "bound",
            "--alpha",
            "0.5",
            "--seed",
            "7",
            "--out",
            "x.csv",
            "--format",
            "json",
        ]);
        let cfg = build_config(&cli).unwrap();
        assert_eq!(cfg.alpha_grid, vec![0.5]);
        assert_eq!(cfg.seeds, vec![7]);
        assert_eq!(cfg.output_path, "x.csv");
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn missing_command_is_a_usage_error() {
        let cli = Cli::parse_from(["selftest-kit"]);
        assert!(build_config(&cli).is_err());
    }

    #[test]
    fn invalid_override_fails_validation() {
        let cli = Cli::parse_from(["selftest-kit", "bound", "--alpha", "2.0"]);
        assert!(build_config(&cli).is_err());
        let cli = Cli::parse_from(["selftest-kit", "highdim", "--d", "3"]);
        assert!(build_config(&cli).is_err());
    }
}
