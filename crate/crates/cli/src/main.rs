use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ontoforge_cli::args::Cli;
use ontoforge_cli::commands;

fn main() -> ExitCode {
    // clap prints usage errors itself and exits 2
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = commands::run(cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
