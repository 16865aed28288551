use std::process::ExitCode;

use clap::Parser;
use gauge_circuits_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(summary) => {
            for line in &summary.report {
                println!("{line}");
            }
            println!("wrote {} files to {}", summary.files.len(), summary.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
