use std::process::ExitCode;

use clap::Parser;
use consensus_lab_harness::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let recipe = cli.command.recipe();
    match cli.global.invocation().run(recipe) {
        Ok(report) => {
            for line in &report.summary {
                println!("[{recipe}] {line}");
            }
            for path in &report.written {
                println!("[{recipe}] wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("consensus-lab {recipe}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
