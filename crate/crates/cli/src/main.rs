use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use relstab_cli::{error_exit_code, load, run, Task};

#[derive(Parser)]
#[command(name = "relstab", version, about = "Weighted relative-entropy stability checks for 1-D conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Three-point relative-entropy identities and entropy-flux compatibility.
    Identities(Common),
    /// Trace a Hugoniot or rarefaction curve to CSV.
    Trace(Common),
    /// Admissibility flags of the configured discontinuity.
    Classify(Common),
    /// Check the shock and Rankine-Hugoniot conditions on the level surface.
    CheckRes(Common),
    /// Certify a violation through a neighbouring wave curve.
    NoContraction(Common),
    /// Bisect for the end of the passing weight range.
    WeightRange(Common),
    /// Finite-volume run monitoring the weighted pseudo-distance.
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (default: `output` from the config, else `relstab-out`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, value_name = "K")]
    seed: Option<u64>,
}

fn execute(task: Task, c: &Common) -> Result<i32> {
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    let text = std::fs::read_to_string(&c.config).with_context(|| format!("read {}", c.config.display()))?;
    let loaded = load(&text, c.seed)?;
    let out = c
        .out
        .clone()
        .or_else(|| loaded.config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("relstab-out"));
    let outcome = run(task, &loaded, &out)?;
    println!("{}: {:?} (outputs in {})", task.name(), outcome, out.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, common) = match &cli.command {
        Command::Identities(c) => (Task::Identities, c),
        Command::Trace(c) => (Task::Trace, c),
        Command::Classify(c) => (Task::Classify, c),
        Command::CheckRes(c) => (Task::CheckRes, c),
        Command::NoContraction(c) => (Task::NoContraction, c),
        Command::WeightRange(c) => (Task::WeightRange, c),
        Command::Simulate(c) => (Task::Simulate, c),
    };
    let code = match execute(task, common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            error_exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
