use std::process::ExitCode;

use clap::Parser;

use thetacm::cli::{execute, Args, RunConfig, EXIT_CONFIG};

fn main() -> ExitCode {
    let args = Args::parse();
    let file = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => Some(text),
            Err(e) => {
                eprintln!("error: invalid config: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        },
        None => None,
    };
    let cfg = match RunConfig::from_sources(&args, file.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let outcome = execute(&cfg);
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.csv),
        None => {
            print!("{}", outcome.csv);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: invalid out: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    eprint!("{}", outcome.summary);
    ExitCode::from(outcome.code as u8)
}
