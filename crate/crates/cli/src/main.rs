mod args;
mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: qmarkov::Error },
    #[error(transparent)]
    Core(#[from] qmarkov::Error),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_owned(), source }
    }

    fn exit_code(&self) -> u8 {
        use qmarkov::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Input { .. } => 2,
            CliError::Core(e) => match e {
                E::ConvergenceFailure { .. } | E::UndefinedTest(_) => 3,
                E::InternalConsistency(_) => 4,
                _ => 2,
            },
        }
    }
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let (seed, format) = (cli.seed, cli.format);
    match &cli.command {
        Command::SpinMatrix { s, beta } => commands::spin_matrix(*s, *beta, seed, format),
        Command::QubitMatrix { n, beta } => commands::qubit_matrix(*n, *beta, seed, format),
        Command::Simulate(args) => commands::simulate(args, seed, format),
        Command::Verify(args) => commands::verify(args, seed, format),
        Command::Stationary(args) => commands::stationary_distribution(args, seed, format),
        Command::CoinToss { count } => commands::coin_toss(*count, seed, format),
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = run(&cli).and_then(|outcome| {
        emit(cli.out.as_deref(), &outcome.body)?;
        Ok(outcome.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qmarkov: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
