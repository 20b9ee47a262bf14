use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nrwa_cli::{run, EXIT_OK};
use nrwa_core::config::list_scenarios;

/// Pulse design and verification for two-level systems beyond the
/// rotating-wave approximation.
#[derive(Parser)]
#[command(name = "nrwa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its series and manifest.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, env = "PULSE_OUT_DIR", default_value = "out")]
        out: PathBuf,
        /// Override `grid.n_steps`.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// List scenarios, their parameters and defaults.
    List,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            print!("{}", list_scenarios());
            ExitCode::from(EXIT_OK as u8)
        }
        Command::Run { config, out, steps } => match run(&config, &out, steps) {
            Ok(m) => {
                for w in &m.warnings {
                    eprintln!("warning: {w}");
                }
                for c in &m.acceptance {
                    println!("{} {} = {:e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.condition);
                }
                println!("{} files written to {} in {:.2} s", m.files.len(), out.display(), m.wall_time_s);
                ExitCode::from(EXIT_OK as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
