//! Command-line front end for the shiftlab experiments.

pub mod args;
pub mod config;
pub mod run;

use std::ffi::OsString;
use std::time::Instant;

use clap::{CommandFactory, Parser};
use shiftlab::WeightFamily;

use args::{Cli, Command};
use config::RunConfig;
use run::RunError;

fn list_families() {
    let all = [
        WeightFamily::Constant,
        WeightFamily::DruryArveson,
        WeightFamily::BergmanBall,
        WeightFamily::HardyBall,
        WeightFamily::FactorialDelta { delta: 1.0 },
        WeightFamily::Example3 { n: 1 },
    ];
    for f in all {
        println!("{:<16} {}", f.id(), f.description());
    }
}

/// Build the run configuration: config file first, then flags.
pub fn resolve(command: &Command) -> Result<Option<RunConfig>, RunError> {
    let Some(experiment) = command.experiment() else {
        return Ok(None);
    };
    let common = command.common().expect("experiments have common flags");
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Usage(format!("reading {}: {e}", path.display())))?;
            RunConfig::parse(&text, Some(experiment))?
        }
        None => RunConfig::new(experiment),
    };
    for (key, value) in command.overrides() {
        if let Some(v) = value {
            config.set(key, &v)?;
        }
    }
    Ok(Some(config))
}

fn print_usage(command: &Command) {
    let mut cmd = Cli::command();
    cmd.build();
    if let Some(e) = command.experiment() {
        if let Some(sub) = cmd.find_subcommand_mut(e.id()) {
            eprintln!("{}", sub.render_usage());
            return;
        }
    }
    eprintln!("{}", cmd.render_usage());
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let fail = |e: RunError| {
        eprintln!("error: {e}");
        if e.exit_code() == 2 {
            print_usage(&cli.command);
        }
        e.exit_code()
    };
    let config = match resolve(&cli.command) {
        Ok(Some(c)) => c,
        Ok(None) => {
            list_families();
            return 0;
        }
        Err(e) => return fail(e),
    };
    if let Some(t) = config.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    let start = Instant::now();
    let mut report = match run::execute(&config) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    report.runtime_seconds = start.elapsed().as_secs_f64();
    let dir = run::report_directory(&config);
    if let Err(e) = run::write_report(&report, &config, &dir) {
        return fail(e);
    }
    print!("{}", report.summary());
    println!("runtime {:.2} s", report.runtime_seconds);
    println!("wrote {}", dir.display());
    if report.has_fatal_failure() {
        eprintln!("error: a theorem-backed check failed");
        1
    } else {
        0
    }
}
