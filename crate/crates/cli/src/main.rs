mod cli;
mod commands;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use tempqa_core::templates::TemplateTable;

use cli::Cli;
use commands::Env;
use error::CliError;

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tempqa: error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: Cli) -> Result<(), CliError> {
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::usage("jobs", "--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let templates = match &args.templates {
        Some(path) => TemplateTable::load(path)?,
        None => TemplateTable::default(),
    };
    let env = Env {
        seed: args.seed,
        strict: args.strict,
        snapshot: args.snapshot,
        templates_path: args.templates.clone(),
        templates,
    };
    commands::run(&env, args.command)
}
