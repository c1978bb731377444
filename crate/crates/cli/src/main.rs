mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{RunContext, Outcome};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not failures
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let ctx = RunContext::new(&cli);
    let outcome = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Solve(a) => commands::solve(&ctx, a),
        Command::Converge(a) => commands::converge(&ctx, a),
        Command::Witness(a) => commands::witness(&ctx, a),
        Command::VerifyCutoff(a) => commands::verify_cutoff(a),
        Command::Mesh(a) => commands::mesh(a),
    };
    match outcome {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
