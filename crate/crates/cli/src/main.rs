use std::path::PathBuf;
use std::process::ExitCode;

use cayley_ltc_cli::{run_command, write_outputs, ExperimentConfig, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cayley-ltc", version, about = "Build and exercise square Tanner codes on left-right Cayley complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's output.dir or the current directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Group, generators, complex counts, λ₂ and girth.
    Build,
    /// Code parameters, rate and distance bounds, tester checks.
    Code,
    /// Exhaustive tensor testability oracles.
    Oracles,
    /// Seeded decoder trials written as CSV.
    Montecarlo,
    /// Decode one word with a step trace.
    Decode,
    /// Parameter chain for the asymptotic construction.
    Plan,
    /// Spectral checks for the generator sets.
    Spectrum,
    /// Every experiment listed in the config.
    Run,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Code => "code",
            Command::Oracles => "oracles",
            Command::Montecarlo => "montecarlo",
            Command::Decode => "decode",
            Command::Plan => "plan",
            Command::Spectrum => "spectrum",
            Command::Run => "run",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    let cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions { seed: cli.seed, threads: cli.threads };
    let out = match run_command(cli.command.name(), &cfg, &opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = cli.out.or(cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = write_outputs(&dir, &out) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    print!("{}", out.report.check_lines());
    if out.report.failures() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
