use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use taxgan_cli::commands::{
    cmd_compare, cmd_features, cmd_replay, cmd_score, cmd_synth, cmd_train, CompareArgs,
    FeaturesArgs, ScoreArgs, SynthArgs, TrainArgs,
};
use taxgan_core::bigan::Alignment;

#[derive(Parser)]
#[command(
    name = "taxgan",
    about = "BiGAN-based outlier detection over monthly tax-return data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic returns dataset with injected fraud signatures
    Synth {
        /// JSON file overriding the default synthesis configuration
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long, env = "BIGAN_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Derive the nine features per taxpayer and normalize them
    Features {
        /// Monthly returns CSV
        #[arg(long)]
        returns: PathBuf,
        /// Exclude taxpayers with fewer filed months than this
        #[arg(long, default_value_t = taxgan_core::features::DEFAULT_MIN_MONTHS)]
        min_months: usize,
        #[arg(long, env = "BIGAN_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Train the BiGAN on a normalized feature CSV
    Train {
        /// Normalized feature CSV (from `features`)
        #[arg(long)]
        features: PathBuf,
        /// JSON file overriding the default training configuration
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Alignment phase variant
        #[arg(long, value_parser = parse_alignment)]
        alignment: Option<Alignment>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        latent_dim: Option<usize>,
        /// Continue training from an existing checkpoint
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long, env = "BIGAN_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Score taxpayers with a trained model and flag outliers
    Score {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Optional labels CSV; adds ROC-AUC to the summary
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, env = "BIGAN_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Train both alignment variants over several seeds and tabulate wins
    Compare {
        #[arg(long)]
        features: PathBuf,
        /// Seeds, comma separated
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        latent_dim: Option<usize>,
        #[arg(long, env = "BIGAN_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Re-execute a recorded run from its manifest
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, env = "BIGAN_OUT_DIR", default_value = "out")]
        out: PathBuf,
    },
}

fn parse_alignment(s: &str) -> Result<Alignment, String> {
    s.parse().map_err(|e: taxgan_core::bigan::TrainError| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth { config, seed, out } => cmd_synth(&SynthArgs { config, seed, out }),
        Command::Features {
            returns,
            min_months,
            out,
        } => cmd_features(&FeaturesArgs {
            returns,
            min_months,
            out,
        }),
        Command::Train {
            features,
            config,
            seed,
            alignment,
            epochs,
            batch_size,
            latent_dim,
            resume,
            out,
        } => cmd_train(&TrainArgs {
            features,
            config,
            seed,
            alignment,
            epochs,
            batch_size,
            latent_dim,
            resume,
            out,
        }),
        Command::Score {
            checkpoint,
            features,
            labels,
            out,
        } => cmd_score(&ScoreArgs {
            checkpoint,
            features,
            labels,
            out,
        }),
        Command::Compare {
            features,
            seeds,
            epochs,
            batch_size,
            latent_dim,
            out,
        } => cmd_compare(&CompareArgs {
            features,
            seeds,
            epochs,
            batch_size,
            latent_dim,
            out,
        }),
        Command::Replay { manifest, out } => cmd_replay(&manifest, &out),
    };
    match result {
        Ok(manifest) => {
            println!("{} complete; manifest written", manifest.command);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
