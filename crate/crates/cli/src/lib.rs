//! Command-line front end: detection, evaluation, dataset tooling and the
//! review server.

pub mod args;
pub mod cmd;
pub mod config;
pub mod corpus;
pub mod review;

pub use args::{Cli, Command};
pub use config::{provenance, RunConfig};

/// Failures that map to a specific exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A recognised but unimplemented option.
    #[error("{0}")]
    Unsupported(String),
}

impl CliError {
    pub const UNSUPPORTED_EXIT: i32 = 3;
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Detect(a) => cmd::detect::run(a),
        Command::Evaluate(a) => cmd::evaluate::run(a),
        Command::MakeData(a) => cmd::make_data::run(a),
        Command::Synth(a) => cmd::synth::run(a),
        Command::ExtractSlides(a) => cmd::extract::run(a),
        Command::Review(a) => {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(review::serve(a))
        }
    }
}

/// Write to stdout. A reader that went away (`| head`) is not an error.
pub(crate) fn emit(text: &str) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CliError>() {
        Some(CliError::Unsupported(_)) => CliError::UNSUPPORTED_EXIT,
        None => 1,
    }
}

/// One-line message for an error chain. Causes already spelled out by an
/// outer message are not repeated.
pub fn error_message(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}
