use clap::{Args, Parser, Subcommand};
use plc_capacity_lab::config::PipelineConfig;
use plc_capacity_lab::pipeline;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "plc-capacity-lab",
    version,
    about = "Cyclostationary MIMO noise synthesis, classification, whitening and capacity sweeps for narrowband power-line links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline configuration file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for stage artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage in order.
    Run(StageArgs),
    /// Check the configuration and list every violation.
    Validate(StageArgs),
    /// Synthesize or ingest the noise trace.
    Generate(StageArgs),
    /// Classify slots by variance.
    Classify(StageArgs),
    /// Search the Gaussian portion length.
    Gaussianity(StageArgs),
    /// Estimate and factor per-portion noise correlations.
    Whiten(StageArgs),
    /// Compute whitened composite-channel spectra.
    Capacity(StageArgs),
    /// Sweep capacity over the SNR grid.
    Sweep(StageArgs),
    /// Render SVG plots from the report CSV.
    Report(StageArgs),
}

fn load_config(args: &StageArgs) -> Result<PipelineConfig, String> {
    let mut cfg = PipelineConfig::from_file(&args.config).map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PLC_LAB_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }

    let cli = Cli::parse();
    let (args, stage): (&StageArgs, fn(&PipelineConfig, &std::path::Path) -> _) = match &cli.command
    {
        Command::Run(a) => (a, pipeline::run),
        Command::Generate(a) => (a, pipeline::generate),
        Command::Classify(a) => (a, pipeline::classify),
        Command::Gaussianity(a) => (a, pipeline::gaussianity),
        Command::Whiten(a) => (a, pipeline::whiten),
        Command::Capacity(a) => (a, pipeline::capacity),
        Command::Sweep(a) => (a, pipeline::sweep),
        Command::Report(a) => (a, pipeline::report),
        Command::Validate(a) => {
            return match load_config(a) {
                Ok(cfg) => {
                    let diagnostics = cfg.validate();
                    if diagnostics.is_empty() {
                        println!("configuration ok");
                        ExitCode::SUCCESS
                    } else {
                        for d in &diagnostics {
                            eprintln!("{}", d);
                        }
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {}", e);
                    ExitCode::FAILURE
                }
            };
        }
    };

    let cfg = match load_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::FAILURE;
        }
    };
    match stage(&cfg, &args.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::FAILURE
        }
    }
}
