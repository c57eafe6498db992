//! Sweep configuration: JSON ingestion, defaults, and validation.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The six batch commands the driver knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Quantum bound, classical bound, and see-saw value per tilt.
    Bound,
    /// Solved and printed sum-of-squares certificates with residuals.
    SosVerify,
    /// Extraction reports on ideal realizations, bare and junk-inflated.
    Selftest,
    /// Perturbation grid: measured distance against the analytic bound.
    RobustnessSweep,
    /// High-dimensional pipeline per even local dimension.
    Highdim,
    /// Correlation-table export, or validation of an imported table.
    Tables,
}

impl Command {
    /// The kebab-case name used on the command line and in configs.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::SosVerify => "sos-verify",
            Command::Selftest => "selftest",
            Command::RobustnessSweep => "robustness-sweep",
            Command::Highdim => "highdim",
            Command::Tables => "tables",
        }
    }
}

/// Output serialization format.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One batch run: which command, over which grids, written where.
///
/// Every field except `command` has a default, so `{"command": "bound"}` is a
/// complete config.  `output_path` of `-` writes to stdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub command: Command,
    /// Tilt grid; every α must lie in [0, 2).  The boundary α = 2 is
    /// excluded: its maximizer degenerates and the self-test has no target.
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    /// Perturbation strengths for `robustness-sweep`.
    #[serde(default = "default_delta_grid")]
    pub epsilon_or_delta_grid: Vec<f64>,
    /// Even local dimensions for `highdim` and `tables`.
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    /// Seeds for randomized steps; also sizes the see-saw restart budget.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_path")]
    pub output_path: String,
    #[serde(default)]
    pub format: Format,
    /// Existing correlation table to validate (`tables` command only);
    /// without it the command exports freshly generated tables.
    #[serde(default)]
    pub input_path: Option<String>,
}

fn default_alpha_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..10).map(|k| 0.2 * k as f64).collect();
    grid.push(1.9);
    grid.push(1.95);
    grid
}

fn default_delta_grid() -> Vec<f64> {
    vec![1e-4, 1e-3, 1e-2, 1e-1]
}

fn default_dims() -> Vec<usize> {
    vec![2, 4, 6]
}

fn default_seeds() -> Vec<u64> {
    (1..=20).collect()
}

fn default_output_path() -> String {
    "-".to_string()
}

impl SweepConfig {
    /// A config for `command` with every other field defaulted.
    pub fn with_defaults(command: Command) -> Self {
        SweepConfig {
            command,
            alpha_grid: default_alpha_grid(),
            epsilon_or_delta_grid: default_delta_grid(),
            dims: default_dims(),
            seeds: default_seeds(),
            output_path: default_output_path(),
            format: Format::default(),
            input_path: None,
        }
    }

    /// Enforces the grid invariants: nonempty, α ∈ [0, 2), even dims ≥ 2,
    /// positive perturbation strengths below π.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.alpha_grid.is_empty() {
            return fail("alpha_grid must be nonempty".into());
        }
        for &a in &self.alpha_grid {
            if !(0.0..2.0).contains(&a) {
                return fail(format!("alpha_grid out of [0,2): {a}"));
            }
        }
        if self.epsilon_or_delta_grid.is_empty() {
            return fail("epsilon_or_delta_grid must be nonempty".into());
        }
        for &d in &self.epsilon_or_delta_grid {
            if !(d > 0.0 && d < std::f64::consts::PI) {
                return fail(format!("epsilon_or_delta_grid entries must lie in (0, π): {d}"));
            }
        }
        if self.dims.is_empty() {
            return fail("dims must be nonempty".into());
        }
        for &d in &self.dims {
            if d < 2 || d % 2 != 0 {
                return fail(format!("dims must be even integers >= 2: {d}"));
            }
        }
        if self.seeds.is_empty() {
            return fail("seeds must be nonempty".into());
        }
        if self.output_path.is_empty() {
            return fail("output_path must be nonempty (use '-' for stdout)".into());
        }
        Ok(())
    }
}

/// Reads a JSON config, fills defaults, and validates grids.
pub fn load_config(path: &Path) -> Result<SweepConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let cfg: SweepConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("{}: {e}", path.display()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}
