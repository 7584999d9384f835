//! `kdvlab`: command-line front end. Tabular results go to standard output (or `--out`) as CSV,
//! summaries and diagnostics to standard error.

mod commands;

use clap::{Args, Parser, Subcommand};
use kdvlab_core::KdvError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "kdvlab", version, about = "Critical lengths, spectra, simulation and boundary control for the linearized KdV-KdV system")]
struct Cli {
    /// Report failures as a JSON object on standard error.
    #[arg(long, global = true)]
    json_errors: bool,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "KDVLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate a critical set, or test one length against it.
    Critical(CriticalArgs),
    /// Eigenpairs of B.
    Spectrum(SpectrumArgs),
    /// Smallest singular value of a case's boundary matrix over p.
    SweepSv(SweepSvArgs),
    /// Run a simulation from a JSON config.
    Simulate(SimulateArgs),
    /// Observability Gramian on a modal truncation.
    Gramian(GramianArgs),
    /// Minimal-norm control between modal states.
    Hum(HumArgs),
    /// Gramian conditioning over a range of lengths.
    ObsSweep(ObsSweepArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct CriticalArgs {
    /// N, N3, R, G, Gprime or case:<1..12>.
    #[arg(long)]
    pub set: String,
    #[arg(long, conflicts_with = "l")]
    pub lmax: Option<f64>,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long, default_value_t = -5, allow_negative_numbers = true)]
    pub n_from: i64,
    #[arg(long, default_value_t = 5, allow_negative_numbers = true)]
    pub n_to: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepSvArgs {
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long, default_value_t = 1)]
    pub case: u8,
    /// Sweep p over [−p_max, p_max]; default reaches the third branch root.
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GramianArgs {
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1)]
    pub case: u8,
    #[arg(long, default_value_t = 16)]
    pub modes: usize,
    /// Allow L in 2πℤ.
    #[arg(long)]
    pub allow_resonant: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HumArgs {
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 16)]
    pub modes: usize,
    /// JSON array of 2·modes coordinates, or `random:<seed>` for a unit random vector.
    #[arg(long)]
    pub init: String,
    /// As `--init`; zero when omitted.
    #[arg(long)]
    pub target: Option<String>,
    /// Control samples over [0, T].
    #[arg(long, default_value_t = 4096)]
    pub intervals: usize,
    /// Replay the control on a grid with this many interior points.
    #[arg(long)]
    pub replay: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ObsSweepArgs {
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, default_value_t = 1)]
    pub case: u8,
    #[arg(long = "T", default_value_t = 20.0)]
    pub t: f64,
    #[arg(long, default_value_t = 8)]
    pub modes: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Comma-separated criterion ids; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
    /// Print the reports as JSON.
    #[arg(long)]
    pub json: bool,
}

/// Exit status of a failed command.
pub fn exit_code(e: &KdvError) -> u8 {
    match e {
        KdvError::Numerical(_) => 3,
        KdvError::Validation(_) | KdvError::Io(_) => 2,
    }
}

fn kind(e: &KdvError) -> &'static str {
    match e {
        KdvError::Validation(_) => "validation",
        KdvError::Numerical(_) => "numerical",
        KdvError::Io(_) => "io",
    }
}

fn report(e: &KdvError, json: bool) -> ExitCode {
    let code = exit_code(e);
    if json {
        let obj = serde_json::json!({ "error": { "kind": kind(e), "message": e.to_string(), "exit_code": code } });
        eprintln!("{obj}");
    } else {
        eprintln!("kdvlab: {e}");
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if std::env::args().any(|a| a == "--json-errors") {
                let msg = e.to_string();
                let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
                return report(&KdvError::validation(first), true);
            }
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return report(&KdvError::validation("threads: must be positive"), cli.json_errors);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return report(&KdvError::validation(format!("threads: {e}")), cli.json_errors);
        }
    }
    let result = match &cli.command {
        Command::Critical(a) => commands::critical(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::SweepSv(a) => commands::sweep_sv(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Gramian(a) => commands::gramian(a),
        Command::Hum(a) => commands::hum(a),
        Command::ObsSweep(a) => commands::obs_sweep(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e, cli.json_errors),
    }
}
