//! `eqlyap`: locate, certify and follow Lyapunov-centre families near
//! relative equilibria of symmetric Newtonian systems.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use eqlyap_core::catalog;

use crate::commands::ReportFile;
use crate::config::{Overrides, ResolvedConfig};

#[derive(Parser)]
#[command(name = "eqlyap", version, about = "Equivariant Lyapunov-centre bifurcation analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the spectrum, candidate levels and certificates at u0.
    Analyze(Common),
    /// Compare the cohomological-dimension formula with the simplicial oracle.
    OracleCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Follow periodic branches emanating from the selected levels.
    Shoot {
        #[command(flatten)]
        common: Common,
        /// Level index from the analysis report; repeatable. Defaults to every certified level.
        #[arg(long = "level")]
        levels: Vec<usize>,
        /// Shoot levels that are not certified.
        #[arg(long)]
        force: bool,
        /// Re-run with the configuration embedded in an earlier report.json.
        #[arg(long, conflicts_with_all = ["config", "catalog", "potential"])]
        report: Option<PathBuf>,
    },
    /// List the built-in example systems.
    Catalog,
}

#[derive(Args)]
struct Common {
    /// Built-in system name (see `eqlyap catalog`).
    #[arg(long)]
    catalog: Option<String>,
    /// Potential expression in u1..un.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Critical point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u0: Option<Vec<f64>>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lambda_max: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            catalog: self.catalog.clone(),
            potential: self.potential.clone(),
            dim: self.dim,
            u0: self.u0.clone(),
            out: self.out.clone(),
            lambda_max: self.lambda_max,
            ..Overrides::default()
        }
    }

    fn resolve(&self, ov: &Overrides) -> Result<ResolvedConfig> {
        config::resolve(&config::load(self.config.as_deref())?, ov)
    }
}

fn from_report(path: &std::path::Path, common: &Common, levels: Vec<usize>, force: bool) -> Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read report {}", path.display()))?;
    let file: ReportFile = serde_json::from_str(&text).with_context(|| format!("report {}", path.display()))?;
    let mut cfg = file.config;
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(l) = common.lambda_max {
        cfg.analysis.lambda_max = Some(l);
    }
    if !levels.is_empty() {
        cfg.levels = levels;
    }
    cfg.force |= force;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze(common) => commands::cmd_analyze(&common.resolve(&common.overrides())?),
        Command::OracleCheck { config, out } => {
            let run = config::load(config.as_deref())?;
            let out = out.or(run.out.clone()).unwrap_or_else(|| config::DEFAULT_OUT.into());
            commands::cmd_oracle_check(&run, &out)
        }
        Command::Shoot {
            common,
            levels,
            force,
            report,
        } => {
            let cfg = match report {
                Some(path) => from_report(&path, &common, levels, force)?,
                None => common.resolve(&Overrides {
                    levels,
                    force,
                    ..common.overrides()
                })?,
            };
            commands::cmd_shoot(&cfg)
        }
        Command::Catalog => {
            for e in catalog() {
                println!("{:<15} n = {}  U = {}", e.name, e.potential.dim(), e.potential.source());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
