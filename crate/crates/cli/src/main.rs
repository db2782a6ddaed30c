mod config;
mod suites;
mod table;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use config::{Cli, ExperimentConfig, Format};

const THREADS_VAR: &str = "UNITARY_FINSLER_THREADS";

fn config_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suite, args) = cli.command.split();
    let cfg = match ExperimentConfig::validate(suite, args) {
        Ok(c) => c,
        Err(e) => return config_error(&e),
    };
    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    return config_error(&e.to_string());
                }
            }
            _ => return config_error(&format!("{THREADS_VAR} must be a positive integer, got {v:?}")),
        }
    }

    let start = Instant::now();
    let (table, summary) = match suites::run(suite, &cfg) {
        Ok(v) => v,
        Err(e) => return config_error(&e),
    };
    let bytes = match table::render(&table, &summary, cfg.format) {
        Ok(b) => b,
        Err(e) => return config_error(&e),
    };
    let written = match &cfg.out {
        Some(path) => {
            let mut result = fs::write(path, &bytes);
            if result.is_ok() && cfg.format == Format::Csv {
                let side = path.with_extension("summary.json");
                let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
                result = fs::write(side, text);
            }
            result
        }
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        return config_error(&format!("cannot write output: {e}"));
    }

    eprintln!(
        "{}: {} trials, {} passed, {} failed, {} skipped ({:.2} s)",
        cfg.suite,
        summary.trials,
        summary.passed,
        summary.failed,
        summary.skipped,
        start.elapsed().as_secs_f64()
    );
    if summary.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
