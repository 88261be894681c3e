use std::process::ExitCode;

use clap::Parser;
use mimo_dof_cli::{emit, exit_code_for, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|o| emit(&o, cli.common.output.as_deref()).map(|()| o.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
