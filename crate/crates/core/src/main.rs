use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wgqed::golden;
use wgqed::scenario::{self, Overrides, Scenario};
use wgqed::{Error, ErrorKind};

/// Worker-count override for the thread pool.
const WORKERS_ENV: &str = "WGQED_WORKERS";

#[derive(Parser)]
#[command(name = "wgqed", version, about = "Single-photon scattering on qubit chains in a waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or re-run a sidecar) and write CSV + JSON artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Number of uniform spectra points (odd).
        #[arg(long)]
        grid_points: Option<usize>,
        /// Use k0 phases in the baselines and delta-limit transfer functions.
        #[arg(long)]
        markovian: bool,
        /// Zero the principal-value drive terms (diagnostic).
        #[arg(long)]
        no_pv: bool,
    },
    /// Run the reference criteria and print a report.
    Goldens {
        /// Criterion number or a substring of its name.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn report(e: &Error) -> ExitCode {
    let code = e.exit_code();
    let kind = match e.kind() {
        ErrorKind::Config => "config",
        ErrorKind::Invariant => "invariant",
        ErrorKind::Numerics => "numerics",
    };
    let record = serde_json::json!({ "error": kind, "message": e.to_string(), "exit_code": code });
    eprintln!("{record}");
    ExitCode::from(code)
}

fn configure_workers() -> Result<(), Error> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        return report(&e);
    }
    match cli.command {
        Command::Run { config, out, grid_points, markovian, no_pv } => {
            let result = Scenario::load(&config).and_then(|mut s| {
                s.apply(&Overrides { grid_points, markovian, no_pv });
                scenario::run(&s, &out)
            });
            match result {
                Ok(written) => {
                    for w in written {
                        println!("{}", w.csv.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => report(&e),
            }
        }
        Command::Goldens { filter } => {
            let results = golden::run_all(filter.as_deref());
            if results.is_empty() {
                return report(&Error::Config(format!("no criterion matches '{}'", filter.unwrap_or_default())));
            }
            let mut failed = 0;
            for (id, name, outcome) in &results {
                match outcome {
                    Ok(c) => {
                        println!("{c}");
                        failed += usize::from(!c.passed());
                    }
                    Err(e) => {
                        println!("criterion {id:>2} FAIL {name}\n    error: {e}");
                        failed += 1;
                    }
                }
            }
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
