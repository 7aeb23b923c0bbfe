//! Library backing the `taxgan` binary: every subcommand is an ordinary
//! function over typed arguments, so the pipeline is drivable from tests
//! and other tooling without spawning processes.

pub mod commands;
pub mod error;
pub mod manifest;

pub use commands::{
    cmd_compare, cmd_features, cmd_replay, cmd_score, cmd_synth, cmd_train, CompareArgs,
    FeaturesArgs, ScoreArgs, SynthArgs, TrainArgs,
};
pub use error::CliError;
pub use manifest::RunManifest;
