use std::process::ExitCode;

use clap::Parser;
use qstaff_cli::{run, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(out) => {
            for m in &out.messages {
                println!("{m}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &out.failures {
                    eprintln!("failed: {f}");
                }
                eprintln!("{} check(s) failed", out.failures.len());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("qstaff: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
