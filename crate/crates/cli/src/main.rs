//! `netcoh`: coherence reports, correlation verdicts, two-server protocol runs
//! and verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 invalid state, 4 capability violation, 5 output write failure.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use commands::Run;
use output::{sha256_hex, to_json, Failure, InputDigest, RunManifest};

/// Worker-thread count for the library's parallel sweeps.
const THREADS_VAR: &str = "NETCOH_THREADS";

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn dispatch(cli: &Cli) -> Result<Run, Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::Coherence { state, basis, cut } => commands::coherence(c, state, basis, cut.as_deref()),
        Command::Classify { state, basis } => commands::classify(c, state, basis),
        Command::Ndqc2 { descriptor } => commands::ndqc2(c, descriptor),
        Command::Verify { suite, ensemble } => commands::verify(c, suite, *ensemble),
    }
}

fn finish(cli: &Cli, mut run: Run, started: Instant) -> Result<Option<Failure>, Failure> {
    let dir = cli.common.out.clone().or_else(|| run.default_dir.clone());
    if let Some(dir) = dir {
        let manifest = RunManifest {
            command_line: std::env::args().collect(),
            seed: run.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: run
                .inputs
                .iter()
                .map(|(p, bytes)| InputDigest {
                    path: p.display().to_string(),
                    sha256: sha256_hex(bytes),
                })
                .collect(),
            duration_seconds: started.elapsed().as_secs_f64(),
        };
        run.outputs.add("manifest.json", to_json(&manifest)?);
        run.outputs.write_to(&dir)?;
    }
    std::io::stdout()
        .write_all(run.stdout.as_bytes())
        .map_err(|e| Failure::Io(e.to_string()))?;
    Ok(run.failure.take())
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|()| dispatch(&cli))
        .and_then(|run| finish(&cli, run, started));
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(f)) | Err(f) => {
            eprintln!("netcoh: {f}");
            f.exit()
        }
    }
}
