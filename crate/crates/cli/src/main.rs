//! `hcagm`: alternating boundary-law solutions of the hard-core model.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "hcagm", version, about = "Alternating boundary-law Gibbs measures of the hard-core model on Cayley trees")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true, env = "HCAGM_FORMAT")]
    pub format: Format,

    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    pub tuning: Tuning,

    #[command(subcommand)]
    pub command: Command,
}

/// Solver tolerances and caps.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Tuning {
    #[arg(long, global = true, default_value_t = 10_000, env = "HCAGM_GRID_POINTS")]
    pub grid_points: usize,
    #[arg(long, global = true, default_value_t = 1e-8, env = "HCAGM_TI_THRESHOLD")]
    pub ti_threshold: f64,
    #[arg(long, global = true, default_value_t = 1e-9, env = "HCAGM_DEDUP_RADIUS")]
    pub dedup_radius: f64,
    #[arg(long, global = true, default_value_t = 1e-9, env = "HCAGM_TANGENCY_TOL")]
    pub tangency_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-8, env = "HCAGM_RESIDUAL_BOUND")]
    pub residual_bound: f64,
    #[arg(long, global = true, default_value_t = 1e-15, env = "HCAGM_ROOT_TOL")]
    pub root_tol: f64,
    #[arg(long, global = true, default_value_t = 1_000_000, env = "HCAGM_VERTEX_CAP")]
    pub vertex_cap: u128,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Scheme {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub r: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All solutions of the system at one activity.
    Solve {
        #[command(flatten)]
        scheme: Scheme,
        #[arg(long)]
        lambda: f64,
    },
    /// Solution counts over an activity grid.
    Scan {
        #[command(flatten)]
        scheme: Scheme,
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        /// Number of grid points, endpoints included.
        #[arg(long, default_value_t = 25)]
        steps: usize,
    },
    /// Critical activity.
    Critical {
        #[command(flatten)]
        scheme: Scheme,
        /// Force count bisection even when a closed form exists.
        #[arg(long)]
        numeric: bool,
        #[arg(long, requires = "hi")]
        lo: Option<f64>,
        #[arg(long, requires = "lo")]
        hi: Option<f64>,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Consistency of the finite-volume measures for every solution.
    Verify {
        #[command(flatten)]
        scheme: Scheme,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Level counts of the labelling.
    Field {
        #[command(flatten)]
        scheme: Scheme,
        #[arg(long)]
        depth: u32,
        /// Label of the root.
        #[arg(long, default_value = "h", value_parser = ["h", "l"])]
        root: String,
        /// Also write the per-vertex labelling as CSV.
        #[arg(long, requires_all = ["h", "l"])]
        dump_assignment: Option<PathBuf>,
        /// Also write the finite-volume measure as CSV.
        #[arg(long, requires_all = ["h", "l", "lambda"])]
        dump_measure: Option<PathBuf>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        l: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Free energy of the alternating boundary condition.
    FreeEnergy {
        #[command(flatten)]
        scheme: Scheme,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Use this pair instead of the solutions of the system.
        #[arg(long, requires = "l")]
        h: Option<f64>,
        #[arg(long, requires = "h")]
        l: Option<f64>,
    },
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = commands::run(&cli).and_then(|report| {
        let mut w = open_output(&cli.output)?;
        report.write(&mut w, cli.format)?;
        w.flush()?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hcagm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
