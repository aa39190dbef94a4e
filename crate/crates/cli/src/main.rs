use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use quake_lab::{run, Args};

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    match run(&args) {
        Ok(outcome) => {
            print!("{}", outcome.message);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.verdict_failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("quake-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
