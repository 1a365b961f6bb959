use std::process::ExitCode;

use clap::Parser;
use sobolev_cli::{run, to_json_string, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{}", to_json_string(&e.to_json()));
            ExitCode::from(2)
        }
    }
}
