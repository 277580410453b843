//! Command-line front end for `contractive-core`.
//!
//! Subcommands write plot-ready CSV (and optionally JSON) files: `evolve`
//! writes one trajectory per `(s0, phi0)`, `figure` writes the multi-series
//! datasets, `sweep` summarizes many parameter pairs and `check` runs the
//! invariant suites.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage error, 3 solver divergence.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use commands::Figure;
use config::{parse_angle, Format, PartialConfig, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "contractive", version, about = "Entanglement of contractive two-mode Gaussian states under free evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one trajectory file per (s0, phi0)
    Evolve(RunArgs),
    /// Summarize contraction and entanglement for every (s0, phi0)
    Sweep(RunArgs),
    /// Write the dataset behind one figure
    Figure {
        #[arg(value_enum)]
        which: Figure,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the invariant checks and print a pass/fail table
    Check(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Initial squeezing strength (repeatable, or comma separated)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub s0: Vec<f64>,
    /// Initial squeezing phase; accepts multiples of pi such as 0.25pi or pi/2 (repeatable)
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi0: Vec<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of time steps; the grid has t-steps + 1 points
    #[arg(long)]
    pub t_steps: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Newton target for the restoration residual
    #[arg(long)]
    pub tol_residual: Option<f64>,
    /// Resolution of the position-grid entropy
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Accepted for scripts; every computation is deterministic already
    #[arg(long)]
    pub seed_free: bool,
    /// File of key = value settings; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl RunArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            s0: (!self.s0.is_empty()).then(|| self.s0.clone()),
            phi0: (!self.phi0.is_empty()).then(|| self.phi0.clone()),
            t_max: self.t_max,
            t_steps: self.t_steps,
            out: self.out.clone(),
            format: self.format,
            tol_residual: self.tol_residual,
            grid_n: self.grid_n,
        }
    }

    /// Flags over the config file over `defaults`.
    pub fn resolve(&self, defaults: RunConfig) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        self.partial().over(file).resolve(defaults)
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Evolve(args) => print_paths(&commands::cmd_evolve(&args.resolve(RunConfig::default())?)?),
        Command::Sweep(args) => {
            let (paths, table) = commands::cmd_sweep(&args.resolve(RunConfig::default())?)?;
            print!("{table}");
            print_paths(&paths);
        }
        Command::Figure { which, run } => print_paths(&commands::cmd_figure(*which, &run.resolve(which.defaults())?)?),
        Command::Check(args) => print!("{}", commands::cmd_check(&args.resolve(RunConfig::default())?)?),
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
