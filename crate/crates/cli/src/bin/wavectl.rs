use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use wavectl_cli::run::bad_input;
use wavectl_cli::{load_config, profile_from_env, run, Command, Options};
use wavectl_core::pipeline::Method;

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Analyze,
    Synthesize,
    Verify,
    Sweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Raw,
    Edd,
    #[value(name = "n2_sharp")]
    N2Sharp,
}

/// Boundary controllability of coupled wave equations: analysis, control
/// synthesis and verification.
#[derive(Parser)]
#[command(name = "wavectl", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json and the CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the method given in the config.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Seed for the randomized oracle self-test run by `verify`.
    #[arg(long)]
    seed: Option<u64>,
    /// Run synthesis even when a controllability condition fails.
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Analyze => Command::Analyze,
        Cmd::Synthesize => Command::Synthesize,
        Cmd::Verify => Command::Verify,
        Cmd::Sweep => Command::Sweep,
    };
    let method = cli.method.map(|m| match m {
        MethodArg::Raw => Method::Raw,
        MethodArg::Edd => Method::Edd,
        MethodArg::N2Sharp => Method::N2Sharp,
    });
    let report = match (load_config(&cli.config), profile_from_env()) {
        (Ok(config), Ok(profile)) => {
            let opts = Options { out: cli.out, method, seed: cli.seed, force: cli.force, profile };
            run(command, &config, &opts)
        }
        (config, profile) => {
            let mut errors = config.err().unwrap_or_default();
            errors.extend(profile.err());
            bad_input(command, errors)
        }
    };
    print!("{}", report.to_text());
    for e in &report.errors {
        eprintln!("wavectl: {e}");
    }
    ExitCode::from(report.exit_code as u8)
}
