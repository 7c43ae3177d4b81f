//! Command-line front end: scenario sweeps to CSV, the verification
//! suite, and greedy placement traces.
//!
//! Exit codes: 0 success, 1 configuration error, 2 verification failure.

mod run;
mod scenario;
mod trace;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "coopcache",
    about = "Delay, throughput and cache placement analysis for clustered device-to-device networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario sweep and write its CSV datasets.
    Run {
        /// Scenario file (TOML sections, '#' comments).
        scenario: PathBuf,
        /// Output directory; default: the scenario's `outputs`, then
        /// COOPCACHE_OUT_DIR, then ./out.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite (fast structural and numeric checks).
    Verify {
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run the greedy placement on a scenario's parameters and emit
    /// the per-step trace.
    GreedyTrace {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Restore default SIGPIPE handling so `coopcache ... | head` terminates
/// quietly instead of panicking on a closed stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // usage problems are configuration errors
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match cli.cmd {
        Cmd::Run { scenario: path, out } => {
            let result = scenario::load(&path).and_then(|s| {
                let dir = scenario::resolve_out_dir(
                    out,
                    s.file.scenario.as_ref().and_then(|r| r.outputs.as_deref()),
                );
                run::run_scenario(&s, &dir)
            });
            match result {
                Ok(report) => {
                    report.print();
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::Verify { json } => match verify::verify_suite() {
            Ok(report) => {
                if json {
                    println!("{}", serde_json::to_string_pretty(&report).unwrap());
                } else {
                    report.print_text();
                }
                if report.pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Cmd::GreedyTrace { scenario: path, out } => {
            let result = scenario::load(&path).and_then(|s| {
                let dir = scenario::resolve_out_dir(
                    out,
                    s.file.scenario.as_ref().and_then(|r| r.outputs.as_deref()),
                );
                trace::greedy_trace(&s, &dir)
            });
            match result {
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
