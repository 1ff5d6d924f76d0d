//! Benchmark and validation driver: precision sweeps against the direct
//! reference transforms, scaling sweeps of the decomposed transform, Madelung
//! constants via Ewald summation, and one-shot transforms on point files.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical/resource error,
//! 4 communication error.

mod cluster;
mod commands;
mod pointfile;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cluster::TransportChoice;
use commands::TransformDirection;
use hpnfft::{Error, WindowKind};

#[derive(Parser)]
#[command(
    name = "hpnfft",
    version,
    about = "Nonequispaced FFT driver: precision, scaling, and Madelung validation sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Transform accuracy sweep against the direct reference transforms
    Precision(PrecisionArgs),
    /// Wall-clock sweep of the decomposed forward transform
    Perf(PerfArgs),
    /// Madelung constant of fluorite via Ewald summation
    Madelung(MadelungArgs),
    /// One-shot forward/adjoint transform on a binary points file
    Transform(TransformArgs),
    /// Join a TCP cluster as a serving worker rank
    Worker(WorkerArgs),
}

#[derive(Args)]
struct PrecisionArgs {
    /// Bandwidth per dimension
    #[arg(long, value_delimiter = ',', default_value = "16,16,16")]
    dims: Vec<usize>,
    /// Number of nonequispaced points
    #[arg(long, default_value_t = 4096)]
    points: usize,
    /// Oversampling factor
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Cut-off sweep, inclusive LO:HI
    #[arg(long, default_value = "1:15")]
    m_range: String,
    /// Comma list of window kinds, or "all"
    #[arg(long, default_value = "all")]
    windows: String,
    #[arg(long, default_value_t = 1234)]
    seed: u64,
    /// Worker threads inside each transform
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Run even when the direct reference cost is very large
    #[arg(long)]
    force: bool,
    /// CSV output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PerfArgs {
    /// Points-per-side list; each side s contributes s³ points
    #[arg(long, value_delimiter = ',', default_value = "58")]
    sides: Vec<usize>,
    /// Cluster sizes to time (speedup is relative to the first entry)
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    workers: Vec<usize>,
    /// Timed repetitions per configuration (median retained)
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long, value_delimiter = ',', default_value = "16,16,16")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value = "gaussian")]
    window: String,
    #[arg(long, default_value_t = 1234)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MadelungArgs {
    /// Fluorite cells per box side
    #[arg(long, default_value_t = 2)]
    cells: usize,
    /// Convergence parameter sweep START:END:STEP, or one value
    #[arg(long, default_value = "1.5")]
    alpha: String,
    /// Structure factor evaluation: "nfft" or "direct"
    #[arg(long, default_value = "nfft")]
    mode: String,
    #[arg(long, default_value = "kaiser_bessel")]
    window: String,
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    #[arg(long, default_value_t = 8)]
    m: usize,
    /// Override the real-space cutoff (defaults to min(L/2, 8/alpha))
    #[arg(long)]
    rc: Option<f64>,
    /// Override the reciprocal cube bound
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// Input points file (binary NDPT)
    #[arg(long)]
    input: PathBuf,
    /// "forward" or "adjoint"
    #[arg(long, default_value = "forward")]
    direction: String,
    #[arg(long, value_delimiter = ',', default_value = "16,16,16")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value = "kaiser_bessel")]
    window: String,
    /// Cluster size (ranks)
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// "inproc" or "tcp"
    #[arg(long, default_value = "inproc")]
    transport: String,
    /// Listen address for the TCP host rank
    #[arg(long, default_value = "127.0.0.1:0")]
    listen: String,
    /// Coefficient CSV produced by a forward run (adjoint input)
    #[arg(long)]
    coeffs: Option<PathBuf>,
    /// Output path: coefficient CSV (forward) or NDPT file (adjoint)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WorkerArgs {
    /// Host address to join (HOST:PORT)
    #[arg(long)]
    connect: String,
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Precision(a) => {
            let m_range = commands::parse_index_range(&a.m_range).map_err(usage)?;
            let windows = commands::parse_windows(&a.windows).map_err(usage)?;
            commands::run_precision(
                &a.dims,
                a.points,
                a.sigma,
                m_range,
                &windows,
                a.seed,
                a.workers,
                a.force,
                a.out.as_deref(),
            )?;
        }
        Cmd::Perf(a) => {
            let window: WindowKind = a.window.parse().map_err(|e: Error| usage(e.to_string()))?;
            commands::run_perf(
                &a.sides,
                &a.workers,
                a.repetitions,
                &a.dims,
                a.sigma,
                a.m,
                window,
                a.seed,
                a.out.as_deref(),
            )?;
        }
        Cmd::Madelung(a) => {
            let alphas = commands::parse_alpha_range(&a.alpha).map_err(usage)?;
            let direct = match a.mode.to_ascii_lowercase().as_str() {
                "direct" => true,
                "nfft" => false,
                other => return Err(usage(format!("unknown mode {other:?} (expected direct or nfft)"))),
            };
            let window: WindowKind = a.window.parse().map_err(|e: Error| usage(e.to_string()))?;
            commands::run_madelung(
                a.cells,
                &alphas,
                direct,
                window,
                a.sigma,
                a.m,
                a.rc,
                a.kmax,
                a.workers,
                a.out.as_deref(),
            )?;
        }
        Cmd::Transform(a) => {
            let direction: TransformDirection = a.direction.parse().map_err(usage)?;
            let window: WindowKind = a.window.parse().map_err(|e: Error| usage(e.to_string()))?;
            let transport: TransportChoice = a.transport.parse().map_err(usage)?;
            commands::run_transform(
                &a.input,
                direction,
                &a.dims,
                a.sigma,
                a.m,
                window,
                a.workers,
                transport,
                &a.listen,
                a.coeffs.as_deref(),
                a.out.as_deref(),
            )?;
        }
        Cmd::Worker(a) => {
            commands::run_worker(&a.connect)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Communication { .. } | Error::Protocol(_) => 4,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}
