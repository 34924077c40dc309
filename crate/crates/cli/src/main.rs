use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use silentprobe::pipeline::{
    run_pipeline, run_stage, ArtifactDir, Experiment, ExperimentConfig, Stage,
};
use silentprobe::Error;

/// Side-channel probing of a random-forest IDS, from flows to defense.
#[derive(Parser)]
#[command(name = "silentprobe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, env = "SILENTPROBE_SEED")]
    seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or load flows.
    Generate(Common),
    /// Split, grid-search and train the IDS.
    Train(Common),
    /// Probe the IDS and record telemetry.
    Probe(Common),
    /// Segment each telemetry indicator.
    DetectCp(Common),
    /// Rank features by their effect on telemetry.
    Analyze(Common),
    /// Craft bounded adversarial flows.
    Attack(Common),
    /// Run the anomaly detector against the attacks.
    Defend(Common),
    /// Assemble report.json from existing artifacts.
    Report(Common),
    /// Run every stage in order.
    Pipeline(Common),
}

const DEFAULT_SEED: u64 = 42;

fn experiment(common: &Common) -> Result<Experiment, Error> {
    let config = ExperimentConfig::load(&common.config)?;
    let seed = common.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    Ok(Experiment::new(
        config,
        seed,
        ArtifactDir::new(&common.out)?,
    ))
}

fn run(cli: Cli) -> Result<(), Error> {
    let (stage, common) = match &cli.command {
        Command::Generate(c) => (Some(Stage::Generate), c),
        Command::Train(c) => (Some(Stage::Train), c),
        Command::Probe(c) => (Some(Stage::Probe), c),
        Command::DetectCp(c) => (Some(Stage::DetectCp), c),
        Command::Analyze(c) => (Some(Stage::Analyze), c),
        Command::Attack(c) => (Some(Stage::Attack), c),
        Command::Defend(c) => (Some(Stage::Defend), c),
        Command::Report(c) => (Some(Stage::Report), c),
        Command::Pipeline(c) => (None, c),
    };
    let exp = experiment(common)?;
    match stage {
        Some(stage) => {
            let secs = run_stage(&exp, stage)?;
            if !common.quiet {
                eprintln!("{} done in {secs:.2}s", stage.name());
            }
        }
        None => {
            let report = run_pipeline(&exp)?;
            if !common.quiet {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).unwrap_or_default()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.root() {
                Error::Config(_) | Error::UnknownFeature(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
