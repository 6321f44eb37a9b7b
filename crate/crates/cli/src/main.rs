//! Command-line front end for the coherent-state library.
//!
//! Exit codes are a stable scripting contract:
//! 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical non-convergence.

mod commands;
mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gha_coherent::GhaError;

use commands::{
    cmd_coeffs, cmd_qsweep, cmd_spectrum, cmd_verify, cmd_verify_identity, CoeffsArgs, QsweepArgs,
    SpectrumArgs, VerifyArgs, VerifyIdentityArgs,
};
use config::FileConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, or parameter domain — exit 2.
    Config(String),
    /// Filesystem failure — exit 2.
    Io(String, std::io::Error),
    /// Library error; convergence failures map to exit 3, the rest to 2.
    Core(GhaError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io(path, err) => write!(f, "{path}: {err}"),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl From<GhaError> for CliError {
    fn from(err: GhaError) -> Self {
        CliError::Core(err)
    }
}

fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Config(_) | CliError::Io(..) => 2,
        CliError::Core(e) => match e {
            GhaError::TailNotConverged { .. }
            | GhaError::NoConvergence(_)
            | GhaError::QuadratureFailure { .. }
            | GhaError::Inconclusive => 3,
            _ => 2,
        },
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
}

#[derive(Parser, Debug)]
#[command(
    name = "gha-coherent",
    version,
    about = "Coherent states of generalized Heisenberg algebras for power-law potentials",
    propagate_version = true
)]
struct Cli {
    /// Optional TOML config file (flat key = value); flags override its keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Cap the worker-thread count (0 = automatic). Overrides the
    /// GHA_COHERENT_THREADS environment variable.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the WKB energy ladder E_n = (n + γ/4)^{2k/(k+2)} and its
    /// spacing class.
    Spectrum(SpectrumArgs),
    /// Sweep Mandel's Q parameter over a |z| grid, one output series per k.
    Qsweep(QsweepArgs),
    /// Run the algebra, normalization, eigenstate, and resolution-of-unity
    /// verification suite.
    Verify(VerifyArgs),
    /// Verify the resolution of unity for one closed-form weight function
    /// via its Stieltjes moments.
    VerifyIdentity(VerifyIdentityArgs),
    /// Print the photon-number distribution of a single coherent state.
    Coeffs(CoeffsArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(CliError::Config)?,
        None => FileConfig::default(),
    };
    if let Some(threads) = thread_cap(cli.threads, &cfg)? {
        if threads > 0 {
            // Only this call initializes the global pool, so the error case
            // (pool already set) cannot fire.
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .ok();
        }
    }
    match &cli.command {
        Command::Spectrum(args) => cmd_spectrum(args, &cfg),
        Command::Qsweep(args) => cmd_qsweep(args, &cfg),
        Command::Verify(args) => cmd_verify(args, &cfg),
        Command::VerifyIdentity(args) => cmd_verify_identity(args, &cfg),
        Command::Coeffs(args) => cmd_coeffs(args, &cfg),
    }
}

/// Worker-count cap: --threads beats GHA_COHERENT_THREADS beats the config
/// file; absent everywhere means rayon's default.
fn thread_cap(flag: Option<usize>, cfg: &FileConfig) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    if let Ok(text) = std::env::var("GHA_COHERENT_THREADS") {
        let threads = text.trim().parse::<usize>().map_err(|_| {
            CliError::Config(format!(
                "GHA_COHERENT_THREADS must be a non-negative integer, got '{text}'"
            ))
        })?;
        return Ok(Some(threads));
    }
    Ok(cfg.threads)
}
