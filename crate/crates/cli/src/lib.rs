//! File formats, dataset loaders and command dispatch for the `sac` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod idx;
pub mod model;
pub mod output;

pub use config::RunConfig;
pub use error::CliError;

/// Environment variable capping the worker-thread count.
pub const THREADS_VAR: &str = "SAC_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR}={v} is not a positive integer")))?;
    // A pool already built by an earlier call in this process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one invocation and returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match args::parse(argv) {
        Ok(cfg) => cfg,
        Err(args::ParseOutcome::Clap(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
        Err(args::ParseOutcome::Cli(e)) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match init_threads().and_then(|()| commands::run(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
