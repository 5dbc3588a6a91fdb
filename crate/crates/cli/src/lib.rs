//! Scriptable frontend: every command yields a [`report::Report`] rendered
//! as CSV or JSON.
//!
//! Exit codes: 0 success, 1 verification or tolerance failure, 2 usage error.

pub mod args;
pub mod commands;
pub mod report;

use clap::Parser;

use eseries::Error;

use args::{Cli, Command};
use commands::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// What a run wrote and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Domain(_)
        | Error::Parse(_)
        | Error::UnknownRoute(_)
        | Error::InvalidFamily(_)
        | Error::InvalidSequence(_)
        | Error::InsufficientPrecision { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> eseries::Result<report::Report> {
    match &cli.command {
        Command::Coeffs { route, max } => commands::coeffs(cfg, route, *max),
        Command::Verify { max, inject_corruption } => commands::verify(cfg, *max, *inject_corruption),
        Command::Quad { target, n, x, rule } => commands::quad(cfg, *target, *n, x, rule),
        Command::Order { experiment, k } => commands::order(cfg, *experiment, *k),
        Command::Carleman(args) => commands::carleman(cfg, args),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let failure = |code: i32, msg: String| Outcome {
        code,
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
    };
    let cfg = match RunConfig::from_args(&cli.global) {
        Ok(cfg) => cfg,
        Err(e) => return failure(EXIT_USAGE, e.to_string()),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.global.workers {
        if w == 0 {
            return failure(EXIT_USAGE, "--workers must be at least 1".into());
        }
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => return failure(EXIT_FAIL, e.to_string()),
    };
    let report = match pool.install(|| dispatch(&cli, &cfg)) {
        Ok(report) => report,
        Err(e) => return failure(exit_code_for(&e), e.to_string()),
    };
    let text = report.render(cli.global.format);
    let code = if report.pass { EXIT_OK } else { EXIT_FAIL };
    match &cli.global.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => failure(EXIT_FAIL, format!("cannot write {}: {e}", path.display())),
        },
        None => Outcome { code, stdout: text, stderr: String::new() },
    }
}
