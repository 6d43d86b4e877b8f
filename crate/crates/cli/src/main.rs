//! `nsdlct`: runs the transform experiments and writes CSV and field artifacts.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "nsdlct", version, about = "Nonseparable discrete linear canonical transform experiments")]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// NMSE against the direct-summation reference for each padding ΔN.
    AccuracySweep(Common),
    /// NMSE between a two-step cascade and the single transform of the product.
    AdditivitySweep(Common),
    /// NMSE of a forward transform followed by its inverse.
    ReversibilitySweep(Common),
    /// PSNR of an image after a forward and inverse transform.
    ImageRoundtrip(Common),
    /// Complex-multiplication counts next to their closed forms.
    ComplexityTable(Common),
    /// A Fourier transformer followed by an elliptic GRIN medium.
    OpticsGrin(Grin),
    /// Dense operator unitarity and eigenpairs.
    OperatorUnitarity(Operator),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// `paper:A1`..`paper:A4`, `paper:SELF`, `paper:GRIN`, or `file:PATH` with 16 numbers.
    #[arg(long)]
    matrix: Option<String>,
    /// Second stage of the additivity cascade.
    #[arg(long)]
    matrix2: Option<String>,
    /// Use the printed four-decimal values instead of their symplectic projection.
    #[arg(long)]
    raw: bool,
    /// `hg:1,2+3,1`, `pgm:PATH` or `field:PATH`.
    #[arg(long)]
    signal: Option<String>,
    /// Grid size for synthesized signals.
    #[arg(long)]
    n: Option<usize>,
    /// Sample spacing (both axes).
    #[arg(long)]
    dx: Option<f64>,
    /// Zero-padding range `a..b[:step]`, inclusive.
    #[arg(long, default_value = "0")]
    pad: String,
    /// Comma-separated `ha,lc,koc,ding`, or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    /// `reversible` or `cm-first`; additivity sweeps default to `cm-first`.
    #[arg(long)]
    form: Option<String>,
    /// Internal upsampling of the Iwasawa and Ding methods.
    #[arg(long, default_value_t = 2)]
    upsample: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Directory for CSV and field artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads, 0 for automatic. Falls back to NSLCT_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct Grin {
    #[arg(long, default_value_t = 257)]
    n: usize,
    /// Sample spacing in mm; defaults to the self-dual spacing √(2π/N).
    #[arg(long)]
    dx: Option<f64>,
    /// Input field; defaults to a synthetic letter mask.
    #[arg(long)]
    signal: Option<String>,
    #[arg(long, default_value = "all")]
    methods: String,
    #[arg(long, default_value_t = 1.5)]
    n0: f64,
    /// mm⁻².
    #[arg(long, default_value_t = 5e-8)]
    n1: f64,
    /// mm⁻².
    #[arg(long, default_value_t = 2e-8)]
    n2: f64,
    #[arg(long, default_value_t = 0.6)]
    p: f64,
    #[arg(long, default_value_t = 0.2)]
    q: f64,
    #[arg(long, default_value_t = 1e4)]
    length_mm: f64,
    #[arg(long, default_value_t = 532e-6)]
    wavelength_mm: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct Operator {
    #[arg(long, default_value = "paper:SELF")]
    matrix: String,
    #[arg(long)]
    raw: bool,
    /// Grid size, at most 64.
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    dx: f64,
    #[arg(long, default_value = "ha,lc,ding")]
    methods: String,
    /// Eigenpairs to extract from each unitary operator.
    #[arg(long, default_value_t = 3)]
    eigen: usize,
    #[command(flatten)]
    run: RunArgs,
}

fn configure_threads(run: &RunArgs) -> CliResult<()> {
    let threads = match run.threads {
        Some(k) => k,
        None => match std::env::var("NSLCT_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("NSLCT_THREADS must be a count, got {v:?}")))?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<PathBuf> {
    match cli.experiment {
        Experiment::AccuracySweep(c) => experiments::accuracy(&c),
        Experiment::AdditivitySweep(c) => experiments::additivity(&c),
        Experiment::ReversibilitySweep(c) => experiments::reversibility(&c),
        Experiment::ImageRoundtrip(c) => experiments::image_roundtrip(&c),
        Experiment::ComplexityTable(c) => experiments::complexity(&c),
        Experiment::OpticsGrin(g) => experiments::optics_grin(&g),
        Experiment::OperatorUnitarity(o) => experiments::operator_unitarity(&o),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run_args = match &cli.experiment {
        Experiment::AccuracySweep(c)
        | Experiment::AdditivitySweep(c)
        | Experiment::ReversibilitySweep(c)
        | Experiment::ImageRoundtrip(c)
        | Experiment::ComplexityTable(c) => &c.run,
        Experiment::OpticsGrin(g) => &g.run,
        Experiment::OperatorUnitarity(o) => &o.run,
    };
    let result = configure_threads(run_args).and_then(|_| run(cli));
    match result {
        Ok(csv) => {
            println!("{}", csv.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nsdlct: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
