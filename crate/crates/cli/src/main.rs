mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut record = match &cli.command {
        Command::Thresholds(a) => commands::thresholds(a)?,
        Command::KeyrateCurve(a) => commands::keyrate_curve(a)?,
        Command::WernerGrid(a) => commands::werner_grid(a)?,
        Command::Simulate(a) => commands::simulate_cmd(a)?,
        Command::Detector(a) => commands::detector(a)?,
    };
    if !cli.common.no_timestamp {
        record.stamp();
    }
    record.emit(cli.common.format, cli.common.output.as_deref())
}

fn print_usage(command: &Command) {
    let name = match command {
        Command::Thresholds(_) => "thresholds",
        Command::KeyrateCurve(_) => "keyrate-curve",
        Command::WernerGrid(_) => "werner-grid",
        Command::Simulate(_) => "simulate",
        Command::Detector(_) => "detector",
    };
    let mut root = Cli::command();
    if let Some(sub) = root.find_subcommand_mut(name) {
        eprintln!("\n{}", sub.render_usage());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                print_usage(&cli.command);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
