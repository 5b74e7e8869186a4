//! Command-line front end: flags and config file, parallel dispatch, CSV and
//! manifest output.
//!
//! Every output is a pure function of the resolved configuration; the worker
//! count only changes how independent tasks are scheduled.

pub mod commands;
pub mod config;
pub mod output;
pub mod parse;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

use crate::config::Cli;

/// Tool version recorded in every output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// A flag, config key or parameter is out of range; exit 2.
    Invalid(String),
    /// A numerical task did not converge; exit 3.
    Convergence {
        /// The failing subtask.
        task: String,
        /// What the solver reported.
        message: String,
    },
    /// Reading or writing files failed; exit 1.
    Io(std::io::Error),
}

impl Failure {
    /// Process exit status.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Convergence { .. } => 3,
        }
    }

    /// Maps a core error raised by `task`.
    pub fn from_core(task: impl Into<String>, e: dispherical_core::Error) -> Self {
        let task = task.into();
        match e {
            dispherical_core::Error::Convergence { .. } => Failure::Convergence {
                task,
                message: e.to_string(),
            },
            other => Failure::Invalid(format!("{task}: {other}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid parameters: {m}"),
            Failure::Convergence { task, message } => write!(f, "{task}: {message}"),
            Failure::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("dispherical: {f}");
            f.exit_code()
        }
    }
}

/// Validates the whole configuration, then executes and writes the manifest.
///
/// Invalid input stops before any file is written; a failing task still
/// leaves a manifest naming it.
pub fn run(cli: Cli) -> Result<(), Failure> {
    let (common, command) = config::merge(cli)?;
    let plan = commands::Plan::resolve(&common, &command)?;
    let workers = match common.workers {
        Some(0) => return Err(Failure::Invalid("workers must be at least 1".into())),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Invalid(format!("worker pool: {e}")))?;
    let mut report = commands::Report::default();
    let outcome = pool.install(|| plan.execute(&mut report));
    output::write_json(
        &plan.outputs().manifest(),
        &plan.manifest(&report, outcome.as_ref().err()),
    )?;
    outcome
}
