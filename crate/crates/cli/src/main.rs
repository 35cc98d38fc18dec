mod cli;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        anyhow::ensure!(n > 0, "--workers must be positive");
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::GenWorlds(a) => commands::gen_worlds(cli, a),
        Command::BuildQdata(a) => commands::build_qdata(cli, a),
        Command::TrainQmodel(a) => commands::train_qmodel(cli, a),
        Command::TrainS2(a) => commands::train_s2(cli, a),
        Command::RunBench(a) => commands::run_bench(cli, a),
        Command::Ablate(a) => commands::ablate(cli, a),
        Command::ExportSupports(a) => commands::export_supports(a),
        Command::Verify(a) => commands::verify(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // One line: the error chain joined by ": ".
            eprintln!("navq: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
