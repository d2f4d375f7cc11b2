//! `discode` command line: gallery checks, identity sweeps, measure estimates,
//! constructions and avoiding paths, all written as sorted audit rows.

pub mod commands;
pub mod config;
pub mod error;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{FileConfig, Format, RunConfig, SpacingArg};
use discode::report::Report;
use error::{CliError, CliResult};
use num_complex::Complex64;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "discode", version, about = "Audits for f'' + A f = 0 in the unit disc")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Global {
    /// TOML file with the same keys as the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Report destination (stdout when absent).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub radial_count: Option<usize>,
    #[arg(long, global = true)]
    pub angular_count: Option<usize>,
    #[arg(long, global = true)]
    pub r_max: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub spacing: Option<SpacingArg>,
    /// ODE tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
    /// Overrides the tolerance of every checked row.
    #[arg(long, global = true)]
    pub audit_tol: Option<f64>,
    /// Random sample points instead of the fixed arrangement.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the claims attached to gallery entries.
    Gallery(GalleryArgs),
    /// Identity residuals of the auxiliary field.
    Identities(IdentitiesArgs),
    /// Carleson constants, growth profiles and balances.
    Measures(MeasuresArgs),
    /// Build an explicit equation and audit it.
    Construct(ConstructArgs),
    /// Polyline from start to target around exclusion discs.
    Paths(PathsArgs),
}

#[derive(Args, Debug, Default)]
pub struct GalleryArgs {
    /// Entry name, or `all`.
    #[arg(long)]
    pub entry: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    FixedSimple,
    FixedTyped,
    Zeros,
    Interp,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Inputs {
    /// Point list of prescribed zeros or fixed points.
    #[arg(long, visible_alias = "zeros")]
    pub lambda: Option<PathBuf>,
    /// Fixed-point spec (`re im type` lines).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct Source {
    #[arg(long, conflicts_with = "construct")]
    pub entry: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum)]
    pub construct: Option<Kind>,
    #[command(flatten)]
    pub inputs: Inputs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Identities,
    Schwarzian,
    BankLaine,
    Liouville,
    Balance,
    Subharmonic,
    All,
}

#[derive(Args, Debug, Default)]
pub struct IdentitiesArgs {
    #[command(flatten)]
    pub source: Source,
    /// Repeatable; defaults to identities, schwarzian and bank-laine.
    #[arg(long, value_enum)]
    pub check: Vec<Check>,
    /// Number of interior sample points.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Stabilized,
    Growing,
}

#[derive(Args, Debug, Default)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub source: Source,
    /// Carleson constant of |A|^2 (1-|z|^2)^3.
    #[arg(long)]
    pub coefficient_carleson: bool,
    /// Carleson constant of the measure built from the basis with this exponent.
    #[arg(long)]
    pub uchiyama: Option<f64>,
    /// Profile of sup |A| (1-|z|^2)^alpha.
    #[arg(long)]
    pub growth: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub littlewood_paley: bool,
    /// Test function for the Littlewood-Paley balance, `monomial:k`.
    #[arg(long)]
    pub f: Option<String>,
    /// Turn verdict rows into checks.
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub inputs: Inputs,
    /// Writes z, A(z), f1(z) along radial rays as a table.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PathsArgs {
    /// `re,im`
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub start: Complex64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub target: Complex64,
    /// `re im delta` lines.
    #[arg(long)]
    pub exclusions: Option<PathBuf>,
    /// Writes the polyline vertices.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

/// `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let num = |t: &str| -> Result<f64, String> {
        let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
        v.is_finite().then_some(v).ok_or_else(|| format!("`{t}` is not finite"))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(num(re)?, num(im)?)),
        None => Ok(Complex64::new(num(s)?, 0.0)),
    }
}

impl Global {
    fn as_file(&self) -> FileConfig {
        FileConfig {
            format: self.format,
            output: self.output.clone(),
            radial_count: self.radial_count,
            angular_count: self.angular_count,
            r_max: self.r_max,
            spacing: self.spacing,
            tol: self.tol,
            fd_step: self.fd_step,
            audit_tol: self.audit_tol,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Report plus the settings it was produced under.
pub fn execute(cli: &Cli) -> CliResult<(Report, RunConfig)> {
    let file = match &cli.global.config {
        Some(p) => config::load_config(p)?,
        None => FileConfig::default(),
    };
    let run = RunConfig::merge(&file, &cli.global.as_file())?;
    let report = match &cli.command {
        Command::Gallery(a) => commands::gallery(&run, &file, a)?,
        Command::Identities(a) => commands::identities(&run, &file, a)?,
        Command::Measures(a) => commands::measures(&run, &file, a)?,
        Command::Construct(a) => commands::construct(&run, &file, a)?,
        Command::Paths(a) => commands::paths(a)?,
    };
    Ok((report.sorted(), run))
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Jsonl => report.to_json_lines(),
        Format::Table => report.to_table(),
    }
}

fn write_out(path: &PathBuf, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses `args`, runs, writes the report and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok((report, run)) => {
            let text = render(&report, run.format);
            match &run.output {
                Some(p) => {
                    if let Err(e) = write_out(p, &text) {
                        eprintln!("discode: {e}");
                        return e.exit_code();
                    }
                }
                None => print!("{text}"),
            }
            let failed = report.failures().count();
            if failed > 0 {
                eprintln!("discode: {failed} of {} rows failed", report.rows.len());
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("discode: {e}");
            e.exit_code()
        }
    }
}
