use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use heyde_cli::config::{ConfigError, ErrorKind};
use heyde_cli::{run_text, Overrides, Report};
use heyde_core::rational;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

/// Runs a verification job described by a `key = value` config file.
#[derive(Debug, Parser)]
#[command(name = "heyde", version)]
struct Args {
    /// Config file; standard input when omitted.
    config: Option<PathBuf>,
    /// Tolerance for floating-point residuals, as a rational `p/q`.
    #[arg(long)]
    tol: Option<String>,
    /// Largest group order accepted by element scans.
    #[arg(long)]
    bound: Option<usize>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let started = Instant::now();
    let report = execute(&args);
    let text = match args.format {
        Format::Machine => report.render_machine(),
        Format::Human => report.render_human(Some(started.elapsed())),
    };
    print!("{text}");
    ExitCode::from(report.exit_code() as u8)
}

fn execute(args: &Args) -> Report {
    let tol = match args.tol.as_deref().map(|t| (t, rational::parse(t))) {
        None => None,
        Some((_, Some(t))) => Some(t),
        Some((t, None)) => {
            let e = ConfigError::new(ErrorKind::Usage, 0, format!("--tol: `{t}` is not a rational"));
            return Report::from_error("unknown", &e);
        }
    };
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map(|_| s)
                .map_err(|e| format!("stdin: {e}"))
        }
    };
    match text {
        Ok(text) => run_text(&text, &Overrides { tol, bound: args.bound }),
        Err(m) => Report::from_error("unknown", &ConfigError::new(ErrorKind::Io, 0, m)),
    }
}
