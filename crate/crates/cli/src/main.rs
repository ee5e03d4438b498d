use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wavebem::experiments::{
    convergence_csv, exit_code, run_convergence, run_spectral, run_verify, spectral_csv, CaseKind, ConvergenceConfig,
    FormulationKind, LevelRange, SpectralConfig, TimeGrid,
};
use wavebem::Error;

#[derive(Parser)]
#[command(name = "wavebem", version, about = "Space-time boundary element experiments for the 1D wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Errors and convergence rates on uniformly refined meshes.
    Convergence {
        #[arg(long, default_value = "smooth")]
        case: CaseKind,
        #[arg(long, default_value = "ht")]
        formulation: FormulationKind,
        #[arg(long = "L", default_value_t = 3.0)]
        length: f64,
        #[arg(long = "T", default_value_t = 6.0)]
        horizon: f64,
        #[arg(long, default_value = "3:8")]
        levels: LevelRange,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest eigenvalue of the coupling Gram matrix against the conjectured constant.
    Spectral {
        #[arg(long = "L", default_value_t = 1.0)]
        length: f64,
        /// Horizons as a:b or a:b:step.
        #[arg(long = "T", default_value = "1:8")]
        horizons: TimeGrid,
        #[arg(long, default_value_t = 2000)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        kmax_factor: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the built-in invariant checks.
    Verify {
        /// Smaller problem sizes.
        #[arg(long)]
        fast: bool,
    },
}

fn emit(csv: &str, out: Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(&path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Convergence { case, formulation, length, horizon, levels, out } => {
            let cfg = ConvergenceConfig { case, formulation, length, horizon, levels };
            emit(&convergence_csv(&run_convergence(&cfg)?), out)?;
        }
        Command::Spectral { length, horizons, m, kmax_factor, out } => {
            let cfg = SpectralConfig { length, horizons, m, kmax_factor };
            emit(&spectral_csv(&run_spectral(&cfg)?), out)?;
        }
        Command::Verify { fast } => {
            let report = run_verify(fast);
            print!("{report}");
            if !report.passed() {
                eprintln!("failed: {}", report.failures().join(", "));
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
