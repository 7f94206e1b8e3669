//! `framemark` command-line tool.
//!
//! Exit codes: 0 on success or positive detection, 1 on a negative
//! detection or when tampering is found, 2 on usage or I/O errors.

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

mod args;
mod commands;

use args::{Cli, Command};
use commands::Session;

const ERROR: u8 = 2;

fn run(cli: Cli, argv: Vec<String>) -> anyhow::Result<u8> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut ctx = Session::new(cli.global, argv);
    match &cli.command {
        Command::Keygen(a) => commands::keygen(&mut ctx, a),
        Command::Embed(a) => commands::embed(&mut ctx, a),
        Command::Extract(a) => commands::extract(&mut ctx, a),
        Command::Verify(a) => commands::verify(&mut ctx, a),
        Command::Localize(a) => commands::localize_cmd(&mut ctx, a),
        Command::Tamper(a) => commands::tamper(&mut ctx, a),
        Command::Distort(a) => commands::distort(&mut ctx, a),
        Command::Simulate(a) => commands::simulate(&mut ctx, a),
        Command::Bench(a) => commands::bench(&mut ctx, a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(|| run(cli, argv));
    let code = match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ERROR
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ERROR
        }
    };
    eprintln!("done in {:.2}s", start.elapsed().as_secs_f64());
    ExitCode::from(code)
}
