use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use rank_indep_cli::{dispatch, threads_from_env, Cli, CliError, THREADS_ENV};

fn run() -> Result<bool, CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                Err(CliError::Usage(String::new()))
            } else {
                Ok(true)
            };
        }
    };
    let threads = threads_from_env(std::env::var(THREADS_ENV).ok().as_deref())?;
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let output = dispatch(&cli.command, threads)?;
    let out_path = match &cli.command {
        rank_indep_cli::Command::Test(a) => a.out.output.clone(),
        rank_indep_cli::Command::Battery(a) => a.out.output.clone(),
        rank_indep_cli::Command::Simulate(a) => a.out.output.clone(),
        rank_indep_cli::Command::Curve(a) => a.out.output.clone(),
        rank_indep_cli::Command::Subsample(a) => a.out.output.clone(),
        rank_indep_cli::Command::OracleCheck(_) => None,
    };
    match out_path {
        Some(path) => std::fs::write(&path, &output.text)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(output.text.as_bytes());
            let _ = stdout.flush();
        }
    }
    if output.failed {
        return Err(CliError::Numeric(String::new()));
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run() {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
