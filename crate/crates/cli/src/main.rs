//! `layervdw`: sweeps of atom–multilayer van der Waals potentials.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use layervdw::SubstitutionMode;

use crate::config::{ConfigError, Format, Overrides, RunConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "layervdw", version, about = "Van der Waals potentials of atoms near planar magnetodielectric layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration (a provenance sidecar also works).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Relative quadrature tolerance; inner integrals use a tenth of it.
    #[arg(long, global = true, value_name = "X")]
    rel_tol: Option<f64>,

    #[arg(long, global = true, value_enum)]
    quad_mode: Option<QuadMode>,

    /// Worker threads (default: number of CPUs).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Potential U(z_A) over a grid of atom positions.
    Scan,
    /// Asymptotic power-law coefficients.
    Coeffs,
    /// Attraction/repulsion border μ(0) versus ε(0).
    Border,
    /// Position and height of the potential wall.
    Wall,
    /// Additivity identities of the perturbative expansion.
    Check,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Coeffs => "coeffs",
            Command::Border => "border",
            Command::Wall => "wall",
            Command::Check => "check",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QuadMode {
    Direct,
    Retarded,
    Nonretarded,
}

impl From<QuadMode> for SubstitutionMode {
    fn from(m: QuadMode) -> Self {
        match m {
            QuadMode::Direct => SubstitutionMode::Direct,
            QuadMode::Retarded => SubstitutionMode::Retarded,
            QuadMode::Nonretarded => SubstitutionMode::Nonretarded,
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| ConfigError("--config PATH is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(p) = &config.provenance {
        if p.command != cli.command.name() {
            log::warn!("config was recorded for `{}`, running `{}`", p.command, cli.command.name());
        }
    }
    config.apply(&Overrides {
        out: cli.out.clone(),
        rel_tol: cli.rel_tol,
        quad_mode: cli.quad_mode.map(Into::into),
        threads: cli.threads,
        format: cli.format,
    })?;
    Ok(config)
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let config = load(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()?;
    let report = pool.install(|| match cli.command {
        Command::Scan => commands::scan(&config),
        Command::Coeffs => commands::coeffs(&config),
        Command::Border => commands::border(&config),
        Command::Wall => commands::wall(&config),
        Command::Check => commands::check(&config),
    })?;
    let path = output::write(&report.table, cli.command.name(), &config)?;
    println!("{}", path.display());
    if report.failures > 0 {
        log::error!("{} of {} rows failed numerically", report.failures, report.table.rows.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
