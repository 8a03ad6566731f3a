use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use tongues_cli::{commands, report, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {}", CliError::Config(e.to_string()));
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let outcome = commands::run(&cli.global, &cli.command).and_then(|rep| {
        report::emit(&rep, cli.global.format, cli.global.out.as_deref())?;
        Ok(rep)
    });
    eprintln!("elapsed {:.3}s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(rep) => {
            for f in &rep.failures {
                eprintln!("warning: {f}");
            }
            for c in rep.checks.iter().filter(|c| c.asserted && !c.passed) {
                eprintln!(
                    "check failed: {} (measured {:?}, tolerance {:?})",
                    c.name, c.measured, c.tolerance
                );
            }
            if rep.all_checks_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
