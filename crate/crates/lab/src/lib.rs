//! Command-line experiments over `opspace-core`: option handling, element
//! and certificate formats, and deterministic CSV/JSON reports.
//!
//! Exit codes: 0 success, 2 verification failure, 3 input error, 4 time
//! budget exhausted (a partial report is still written), 1 anything else.

pub mod commands;
pub mod error;
pub mod formats;
pub mod options;
pub mod report;

use std::path::PathBuf;

pub use error::{LabError, LabResult};
pub use options::{Cli, Command, Options};

/// Runs one command and returns its exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("opspace-lab: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> LabResult<i32> {
    let mut opts = cli.options;
    opts.load_config_file()?;
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let jobs = opts.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LabError::input(format!("cannot start {jobs} workers: {e}")))?;
    let done = pool.install(|| commands::dispatch(cli.command, opts))?;
    let paths = done.output.write(&out)?;
    println!("{}: {:?}: {}", cli.command.name(), done.status, done.summary);
    for p in paths {
        println!("  wrote {}", p.display());
    }
    Ok(done.status.exit_code())
}
