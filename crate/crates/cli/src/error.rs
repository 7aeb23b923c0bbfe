use thiserror::Error;

use taxgan_core::bigan::TrainError;
use taxgan_core::features::FeatureError;
use taxgan_core::scoring::ScoreError;
use taxgan_core::synth::SynthError;

/// Process exit codes: 0 success, 1 usage/config error, 2 data error,
/// 3 numeric failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ScoreError> for CliError {
    fn from(e: ScoreError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::InvalidConfig(msg) => CliError::Usage(msg),
            TrainError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            TrainError::Nn(_) | TrainError::NotEnoughRows { .. } | TrainError::EmptyDataset => {
                CliError::Data(e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use taxgan_core::bigan::TrainPhase;

    #[test]
    fn exit_codes_map_by_error_kind() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Data("x".into()).exit_code(), 2);
        assert_eq!(CliError::Numeric("x".into()).exit_code(), 3);

        let non_finite: CliError = TrainError::NonFinite {
            epoch: 3,
            batch: 1,
            phase: TrainPhase::Alignment,
        }
        .into();
        assert_eq!(non_finite.exit_code(), 3);
        assert!(non_finite.to_string().contains("epoch 3"));

        let usage: CliError = TrainError::InvalidConfig("bad".into()).into();
        assert_eq!(usage.exit_code(), 1);
    }
}
