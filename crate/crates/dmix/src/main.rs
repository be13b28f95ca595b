use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dmix::Severity;

#[derive(Parser)]
#[command(name = "dmix", about = "Decentralized learning experiments over unreliable links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run { config: PathBuf },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match dmix::run_path(&config) {
            Ok(report) => {
                for w in &report.warnings {
                    eprintln!("{w}");
                }
                println!("wrote {}", report.root.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("dmix: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::Validate { config } => {
            let findings = dmix::validate_path(&config);
            for f in &findings {
                println!("{f}");
            }
            if findings.iter().any(|f| f.severity == Severity::Error) {
                ExitCode::from(2)
            } else if findings.iter().any(|f| f.severity == Severity::Infeasible) {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Version => {
            println!("dmix {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}
