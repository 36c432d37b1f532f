use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pyrocast::config::{Overrides, PipelineConfig};
use pyrocast::pipeline;

/// Bushfire-intensity modelling pipeline: fuse fire, weather, and
/// vegetation-index extracts, engineer features, train a stacked ensemble,
/// and evaluate with imbalance-aware metrics.
#[derive(Parser)]
#[command(name = "pyrocast", version, about)]
struct Cli {
    /// Flat key = value config file; flags override file keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; mandatory here or in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for intra-stage parallelism (results are identical for
    /// any value).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory shared by all stages.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IngestArgs {
    /// Fire-events file (FIRMS-style extract).
    #[arg(long)]
    fire: Option<PathBuf>,
    /// Station-day weather file.
    #[arg(long)]
    weather: Option<PathBuf>,
    /// Point-sampled NDVI file.
    #[arg(long)]
    ndvi: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Persisted model artifact (model_<family>.json).
    #[arg(long)]
    model: PathBuf,
    /// Feature-matrix file to score.
    #[arg(long)]
    input: PathBuf,
    /// Where to write predictions (default: <out>/predictions.csv).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Rows to generate.
    #[arg(long)]
    n: Option<usize>,
    /// Target high-risk fraction.
    #[arg(long)]
    ratio: Option<f64>,
    /// Feature-label association strength (0 = pure noise).
    #[arg(long)]
    signal: Option<f64>,
    /// Also write a raw fire/weather/ndvi input trio to this directory.
    #[arg(long)]
    raw_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate, and normalize the three input files.
    Ingest(IngestArgs),
    /// Join normalized inputs into fused records.
    Fuse,
    /// Engineer features, label, split, and scale.
    Featurize,
    /// Fit the configured model families on the training matrix.
    Train,
    /// Score trained artifacts on the test matrix and emit all reports.
    Evaluate,
    /// Apply a persisted artifact to new feature rows.
    Predict(PredictArgs),
    /// Generate the synthetic fused benchmark dataset.
    Synth(SynthArgs),
    /// Re-render tables and plots from persisted evaluation output.
    Report,
}

fn run(cli: Cli) -> pyrocast::Result<()> {
    let mut overrides = Overrides {
        seed: cli.seed,
        threads: cli.threads,
        out: cli.out,
        ..Default::default()
    };
    if let Command::Ingest(args) = &cli.command {
        overrides.fire = args.fire.clone();
        overrides.weather = args.weather.clone();
        overrides.ndvi = args.ndvi.clone();
    }
    if let Command::Synth(args) = &cli.command {
        overrides.synth_n = args.n;
        overrides.synth_ratio = args.ratio;
        overrides.synth_signal = args.signal;
    }
    let cfg = PipelineConfig::load(cli.config.as_deref(), &overrides)?;

    if cfg.threads > 0 {
        // ignore failure: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(pyrocast::PipelineError::io(cfg.out_dir.clone()))?;

    match &cli.command {
        Command::Ingest(_) => pipeline::cmd_ingest(&cfg),
        Command::Fuse => pipeline::cmd_fuse(&cfg),
        Command::Featurize => pipeline::cmd_featurize(&cfg),
        Command::Train => pipeline::cmd_train(&cfg),
        Command::Evaluate => pipeline::cmd_evaluate(&cfg),
        Command::Predict(args) => {
            pipeline::cmd_predict(&cfg, &args.model, &args.input, args.output.as_deref())
        }
        Command::Synth(args) => pipeline::cmd_synth(&cfg, args.raw_dir.as_deref()),
        Command::Report => pipeline::cmd_report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
