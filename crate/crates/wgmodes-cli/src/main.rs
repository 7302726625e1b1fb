//! `wgmodes` — waveguide cross-section mode solver and DtN builder.
//!
//! Exit codes: 0 success, 2 cutoff-frequency rejection, 3 solver failure,
//! 4 validation failure, 5 I/O failure. Every failure prints one
//! machine-parseable line `error[<category>]: <message>` to stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "wgmodes",
    version,
    about = "Waveguide cross-section modes and modal Dirichlet-to-Neumann maps",
    after_help = "Units: lengths dimensionless, c = 1, omega in rad per unit length, \
                  eps and mu relative. Outputs are deterministic byte-for-byte unless \
                  --timestamp is given."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for modes and write the CSV mode table.
    Solve(RunArgs),
    /// Solve, assemble the modal DtN matrix and export it as WGDTN1.
    Dtn(RunArgs),
    /// Run the verification properties and print a pass/fail report.
    Verify(RunArgs),
    /// Refinement study of the TE10 eigenvalue against the analytic value.
    Convergence(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mesh file (see the book for the format).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Built-in rectangle geometry: a,b,nx,ny.
    #[arg(long)]
    rect: Option<String>,
    /// Material file; defaults to vacuum (eps = mu = 1) everywhere.
    #[arg(long)]
    materials: Option<PathBuf>,
    /// Angular frequency (rad per unit length, c = 1).
    #[arg(long)]
    omega: Option<f64>,
    /// Number of modes to compute.
    #[arg(long)]
    num_modes: Option<usize>,
    /// Eigensolver shift: `re` or `re,im`. Default: omega^2 max(eps mu).
    #[arg(long)]
    shift: Option<String>,
    /// Mode table output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// DtN output path (required by the dtn command).
    #[arg(long)]
    dtn_out: Option<PathBuf>,
    /// Legacy-VTK field export path.
    #[arg(long)]
    fields_out: Option<PathBuf>,
    /// Refinement levels for the convergence command (>= 3).
    #[arg(long)]
    levels: Option<usize>,
    /// Branch-selection tolerance on Im(beta).
    #[arg(long)]
    tol_real: Option<f64>,
    /// Conjugate-pair clustering tolerance on beta^2.
    #[arg(long)]
    tol_cluster: Option<f64>,
    /// Orthogonality bound checked between clusters.
    #[arg(long)]
    tol_orth: Option<f64>,
    /// Relative eigensolver residual tolerance.
    #[arg(long)]
    tol_solver: Option<f64>,
    /// Cutoff rejection threshold on the relative Dirichlet-eigenvalue distance.
    #[arg(long)]
    tol_cutoff: Option<f64>,
    /// Boundary tags treated as PEC (repeatable). Default: pec.
    #[arg(long = "pec-tag")]
    pec_tags: Vec<String>,
    /// Worker cap; the current implementation runs single-threaded.
    #[arg(long)]
    threads: Option<usize>,
    /// Add a wall-clock comment line to the mode table (off by default so
    /// outputs stay byte-reproducible).
    #[arg(long)]
    timestamp: bool,
}

fn merge(args: RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(|e| {
            if e.contains("cannot read") {
                Failure::io(e)
            } else {
                Failure::validation(e)
            }
        })?,
        None => RunConfig::default(),
    };
    if let Some(v) = args.mesh {
        cfg.mesh = Some(v);
    }
    if let Some(v) = args.rect {
        cfg.rect = Some(config::parse_rect(&v).map_err(Failure::validation)?);
    }
    if let Some(v) = args.materials {
        cfg.materials = Some(v);
    }
    if let Some(v) = args.omega {
        cfg.omega = Some(v);
    }
    if let Some(v) = args.num_modes {
        cfg.num_modes = v;
    }
    if let Some(v) = args.shift {
        cfg.shift = Some(config::parse_shift(&v).map_err(Failure::validation)?);
    }
    if let Some(v) = args.out {
        cfg.out = Some(v);
    }
    if let Some(v) = args.dtn_out {
        cfg.dtn_out = Some(v);
    }
    if let Some(v) = args.fields_out {
        cfg.fields_out = Some(v);
    }
    if let Some(v) = args.levels {
        cfg.levels = v;
    }
    if let Some(v) = args.tol_real {
        cfg.tol_real = v;
    }
    if let Some(v) = args.tol_cluster {
        cfg.tol_cluster = v;
    }
    if let Some(v) = args.tol_orth {
        cfg.tol_orth = v;
    }
    if let Some(v) = args.tol_solver {
        cfg.tol_solver = v;
    }
    if let Some(v) = args.tol_cutoff {
        cfg.tol_cutoff = v;
    }
    if !args.pec_tags.is_empty() {
        cfg.pec_tags = args.pec_tags;
    }
    if let Some(v) = args.threads {
        cfg.threads = v;
    }
    if args.timestamp {
        cfg.timestamp = true;
    }
    cfg.validate().map_err(Failure::validation)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => merge(args).and_then(|cfg| commands::cmd_solve(&cfg)),
        Command::Dtn(args) => merge(args).and_then(|cfg| commands::cmd_dtn(&cfg)),
        Command::Verify(args) => merge(args).and_then(|cfg| commands::cmd_verify(&cfg)),
        Command::Convergence(args) => merge(args).and_then(|cfg| commands::cmd_convergence(&cfg)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.category, f.message);
            ExitCode::from(f.code)
        }
    }
}
