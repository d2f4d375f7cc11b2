//! Run settings: defaults, an optional TOML file, then flags.

use crate::error::{CliError, CliResult};
use clap::ValueEnum;
use discode::geometry::{make_grid, SampleGrid, Spacing};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    /// One JSON record per line.
    #[default]
    Jsonl,
    /// Tab-separated table with a header.
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingArg {
    Uniform,
    Refined,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Uniform => Spacing::Uniform,
            SpacingArg::Refined => Spacing::BoundaryRefined,
        }
    }
}

/// Keys accepted in the config file; names match the long flags.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub radial_count: Option<usize>,
    pub angular_count: Option<usize>,
    pub r_max: Option<f64>,
    pub spacing: Option<SpacingArg>,
    pub tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub audit_tol: Option<f64>,
    pub seed: Option<u64>,
    pub entry: Option<String>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub points: Option<usize>,
}

pub fn parse_config(text: &str) -> CliResult<FileConfig> {
    toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
}

pub fn load_config(path: &std::path::Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        e => e,
    })
}

/// Settings shared by every subcommand after merging.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub format: Format,
    pub output: Option<PathBuf>,
    pub radial_count: usize,
    pub angular_count: usize,
    pub r_max: f64,
    pub spacing: SpacingArg,
    pub tol: f64,
    pub fd_step: f64,
    pub audit_tol: Option<f64>,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format: Format::Jsonl,
            output: None,
            radial_count: 64,
            angular_count: 256,
            r_max: 0.9,
            spacing: SpacingArg::Refined,
            tol: 1e-10,
            fd_step: discode::aux::DEFAULT_FD_STEP,
            audit_tol: None,
            seed: None,
        }
    }
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// `flags` win over `file`, which wins over the defaults.
    pub fn merge(file: &FileConfig, flags: &FileConfig) -> CliResult<Self> {
        let d = RunConfig::default();
        let c = RunConfig {
            format: flags.format.or(file.format).unwrap_or(d.format),
            output: flags.output.clone().or_else(|| file.output.clone()),
            radial_count: flags.radial_count.or(file.radial_count).unwrap_or(d.radial_count),
            angular_count: flags.angular_count.or(file.angular_count).unwrap_or(d.angular_count),
            r_max: flags.r_max.or(file.r_max).unwrap_or(d.r_max),
            spacing: flags.spacing.or(file.spacing).unwrap_or(d.spacing),
            tol: flags.tol.or(file.tol).unwrap_or(d.tol),
            fd_step: flags.fd_step.or(file.fd_step).unwrap_or(d.fd_step),
            audit_tol: flags.audit_tol.or(file.audit_tol),
            seed: flags.seed.or(file.seed),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        positive("tol", self.tol)?;
        positive("fd-step", self.fd_step)?;
        if let Some(t) = self.audit_tol {
            positive("audit-tol", t)?;
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(CliError::Usage(format!("r-max must lie in (0, 1), got {}", self.r_max)));
        }
        if self.radial_count == 0 || self.angular_count == 0 {
            return Err(CliError::Usage("grid counts must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<SampleGrid> {
        make_grid(self.radial_count, self.angular_count, self.r_max, self.spacing.into()).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn ode_options(&self) -> discode::ode::OdeOptions {
        discode::ode::OdeOptions {
            tol: self.tol,
            ..Default::default()
        }
    }
}
