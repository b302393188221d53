use std::process::ExitCode;

use clap::Parser;
use decompopt_harness::cli::{run, Cli, Failure, EXIT_ERROR};

/// Caps sampler parallelism.
const THREADS_VAR: &str = "DECOMPOPT_THREADS";

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let threads = match v.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return fail(Failure { reason: "config".into(), message: format!("{THREADS_VAR} must be a positive integer, got {v:?}") }),
        };
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return fail(Failure { reason: "config".into(), message: e.to_string() });
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", serde_json::to_string(&f).expect("failure serializes"));
    ExitCode::from(EXIT_ERROR as u8)
}
