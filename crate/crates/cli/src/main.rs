use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gbb_core::experiments::{execute, ExperimentConfig, ExperimentKind, Overrides};
use gbb_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "gbb", version, about = "Graphical bilinear bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cut statistics per graph family
    Table1(Args),
    /// γ, ε, α₁, α₂ over the ζ grid
    Fig1(Args),
    /// Per-round reward fractions of every policy
    Fig2(Args),
    /// Single configurable experiment
    Run(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full-size defaults (fig1: n = d = 10, 100 matrices; fig2: T = 20000) for fields the config leaves out
    #[arg(long)]
    paper_scale: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Table1(a) => (ExperimentKind::Table1, a),
        Command::Fig1(a) => (ExperimentKind::Fig1, a),
        Command::Fig2(a) => (ExperimentKind::Fig2, a),
        Command::Run(a) => (ExperimentKind::Run, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gbb: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(kind: ExperimentKind, args: Args) -> Result<(), Error> {
    let raw = ExperimentConfig::from_path(&args.config)?;
    if raw.experiment != kind {
        return Err(Error::Config(format!(
            "config is for `{}` but the `{}` command was given",
            raw.experiment.name(),
            kind.name()
        )));
    }
    let cfg = raw.resolve(&Overrides { seed: args.seed, out: args.out, paper_scale: args.paper_scale })?;
    let outcome = execute(&cfg)?;
    let (csv, meta) = outcome.write(&cfg.out, &cfg)?;
    println!("{}", csv.display());
    println!("{}", meta.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::Config(_)
        | Error::InvalidGraph(_)
        | Error::InvalidParameter(_)
        | Error::InvalidEnvironment(_)
        | Error::InvalidArms(_) => EXIT_CONFIG,
        _ => 1,
    }
}
