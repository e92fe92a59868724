mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use output::Format;

/// Environment variable holding the worker-thread count.
const THREADS_VAR: &str = "HTRACE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "htrace",
    version,
    about = "Spectra, traces and geodesics on a compact Heisenberg nilmanifold"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the sub-Laplacian up to a cutoff.
    Spectrum(commands::SpectrumArgs),
    /// Heat trace of the sub-Laplacian.
    HeatTrace(commands::HeatTraceArgs),
    /// Mollified wave trace on a uniform time grid.
    WaveTrace(commands::WaveTraceArgs),
    /// Closed-geodesic lengths recovered from the heat or wave trace.
    Lengths(commands::LengthsArgs),
    /// Local trace of the flat Heisenberg group.
    LocalTrace(commands::LocalTraceArgs),
    /// Integrates one normal geodesic.
    Geodesic(commands::GeodesicArgs),
    /// Shooting search for closed geodesics.
    ClosedGeodesics(commands::ClosedGeodesicsArgs),
    /// Checks confinement of the cone {I < c|ζ|} under the flow.
    Confinement(commands::ConfinementArgs),
    /// Mehler-formula check for the Landau levels.
    Mehler(commands::MehlerArgs),
    /// One Landau level.
    Landau(commands::LandauArgs),
    /// Solves the cohomological equation for a symbol read from JSON.
    Cohomology(commands::CohomologyArgs),
    /// Runs the acceptance suite.
    Verify(commands::VerifyArgs),
}

/// A failure with its exit status.
pub struct Failure {
    pub code: u8,
    pub body: serde_json::Value,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            body: json!({"error": "usage", "message": message.into()}),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            body: json!({"error": "io", "message": message.into()}),
        }
    }
}

impl From<heisenberg_trace::Error> for Failure {
    fn from(e: heisenberg_trace::Error) -> Self {
        use heisenberg_trace::Error as E;
        let mut body = json!({"error": e.kind(), "message": e.to_string()});
        match &e {
            E::Precision { best_bound, .. } => body["best_bound"] = json!(best_bound),
            E::Detection { achieved, .. } => body["achieved"] = json!(achieved),
            E::SearchFailure { closest_return, .. } => {
                body["closest_return"] = json!(closest_return)
            }
            E::Singularity { at, .. } => body["at"] = json!(at),
            E::Integration { step, t, .. } => {
                body["step"] = json!(step);
                body["t"] = json!(t);
            }
            _ => {}
        }
        Failure {
            code: if e.is_domain() { 2 } else { 3 },
            body,
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::usage(format!(
            "{THREADS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let (out, after) = commands::dispatch(&cli.command)?;
    let mut sink: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    output::write(&out, cli.format, &mut sink)
        .and_then(|_| sink.flush())
        .map_err(|e| Failure::io(e.to_string()))?;
    after.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            let f = Failure::usage(msg.trim_end());
            eprintln!("{}", f.body);
            return ExitCode::from(f.code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}
