//! `radialns`: exact radial Navier-Stokes families from JSON configs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 config or domain error, 3 numeric failure.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod table;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Rendered, VerifyOptions};
use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::TableSampler;

#[derive(Parser)]
#[command(
    name = "radialns",
    version,
    about = "Exact self-similar radial Navier-Stokes families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Overrides `output.format` in the config.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scale factor: `t,a,adot` series and blowup report.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Blowup report (JSON) in CSV mode; printed to stderr otherwise.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample `rho` and `u` on the grid.
    Fields {
        #[command(flatten)]
        common: Common,
    },
    /// Residual sweep; exit 1 when a threshold is exceeded.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Verify a density with the wrong power of `a` (must fail).
        #[arg(long)]
        negative_control: bool,
        /// Verify a `t,r,rho,u` table instead of the family itself.
        #[arg(long, value_name = "CSV")]
        fields: Option<PathBuf>,
        /// Overrides `verify.mass_threshold`.
        #[arg(long)]
        mass_threshold: Option<f64>,
        /// Overrides `verify.momentum_threshold`.
        #[arg(long)]
        momentum_threshold: Option<f64>,
    },
    /// Total mass at `mass.t`.
    Mass {
        #[command(flatten)]
        common: Common,
    },
    /// Centre-density blowup-rate products.
    Blowup {
        #[command(flatten)]
        common: Common,
    },
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let result = match path {
        Some(p) => std::fs::write(p, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    };
    result.map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}

fn run(cli: Cli) -> CliResult<bool> {
    let (common, default_format) = match &cli.command {
        Command::Solve { common, .. } | Command::Fields { common } => (common, Format::Csv),
        Command::Verify { common, .. } | Command::Mass { common } | Command::Blowup { common } => {
            (common, Format::Json)
        }
    };
    let mut cfg = RunConfig::load(&common.config)?;
    let format = common
        .format
        .or(cfg.output.format)
        .unwrap_or(default_format);

    let rendered: Rendered = match &cli.command {
        Command::Solve { .. } => commands::solve(&cfg, format)?,
        Command::Fields { .. } => commands::fields(&cfg, format)?,
        Command::Verify {
            negative_control,
            fields,
            mass_threshold,
            momentum_threshold,
            ..
        } => {
            for (name, v) in [("mass", mass_threshold), ("momentum", momentum_threshold)] {
                if let Some(v) = v {
                    if !(*v > 0.0) {
                        return Err(CliError::Config(format!(
                            "--{name}-threshold must be positive, got {v}"
                        )));
                    }
                }
            }
            cfg.verify.mass_threshold = mass_threshold.unwrap_or(cfg.verify.mass_threshold);
            cfg.verify.momentum_threshold =
                momentum_threshold.unwrap_or(cfg.verify.momentum_threshold);
            let table = fields.as_deref().map(TableSampler::read).transpose()?;
            commands::verify(
                &cfg,
                format,
                &VerifyOptions {
                    negative_control: *negative_control,
                    table: table.as_ref(),
                },
            )?
        }
        Command::Mass { .. } => commands::mass(&cfg, format)?,
        Command::Blowup { .. } => commands::blowup(&cfg, format)?,
    };

    write_to(common.out.as_deref(), &rendered.body)?;
    if let (Command::Solve { report, .. }, Some(doc)) = (&cli.command, &rendered.report) {
        match report {
            Some(path) => write_to(Some(path), doc)?,
            None => eprint!("{}", String::from_utf8_lossy(doc)),
        }
    }
    Ok(rendered.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed: residuals exceed the configured thresholds");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
