use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fnv1a64;
use crate::nn::{AdamState, Network};

use super::{BiGanModel, TrainConfig, TrainError};

const FORMAT: &str = "taxgan-bigan-checkpoint";
const VERSION: u32 = 1;

/// Versioned JSON container for a trained model: layer dims, activation
/// tags, weights, biases, the three Adam states and the training config
/// (plus its hash for quick comparison). f64 values survive the JSON
/// round trip exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub feature_dim: usize,
    pub latent_dim: usize,
    pub config: TrainConfig,
    pub encoder: Network,
    pub generator: Network,
    pub discriminator: Network,
    pub opt_encoder: AdamState,
    pub opt_generator: AdamState,
    pub opt_discriminator: AdamState,
    pub opt_align_encoder: AdamState,
    pub opt_align_generator: AdamState,
}

/// Hash of the canonical (serde_json) rendering of a train config.
pub fn config_hash(config: &TrainConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    format!("{:016x}", fnv1a64(&bytes))
}

impl Checkpoint {
    pub fn from_model(model: &BiGanModel, config: &TrainConfig) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            config_hash: config_hash(config),
            feature_dim: model.feature_dim(),
            latent_dim: model.latent_dim(),
            config: config.clone(),
            encoder: model.encoder.clone(),
            generator: model.generator.clone(),
            discriminator: model.discriminator.clone(),
            opt_encoder: model.opt_encoder.clone(),
            opt_generator: model.opt_generator.clone(),
            opt_discriminator: model.opt_discriminator.clone(),
            opt_align_encoder: model.opt_align_encoder.clone(),
            opt_align_generator: model.opt_align_generator.clone(),
        }
    }

    pub fn into_model(self) -> Result<BiGanModel, TrainError> {
        if self.format != FORMAT {
            return Err(TrainError::InvalidConfig(format!(
                "not a model checkpoint (format {:?})",
                self.format
            )));
        }
        if self.version != VERSION {
            return Err(TrainError::InvalidConfig(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        let consistent = self.encoder.input_dim() == self.feature_dim
            && self.encoder.output_dim() == self.latent_dim
            && self.generator.input_dim() == self.latent_dim
            && self.generator.output_dim() == self.feature_dim
            && self.discriminator.input_dim() == self.feature_dim + self.latent_dim
            && self.discriminator.output_dim() == 1;
        if !consistent {
            return Err(TrainError::InvalidConfig(
                "checkpoint network dims are inconsistent with its declared dimensions".into(),
            ));
        }
        Ok(BiGanModel {
            encoder: self.encoder,
            generator: self.generator,
            discriminator: self.discriminator,
            opt_encoder: self.opt_encoder,
            opt_generator: self.opt_generator,
            opt_discriminator: self.opt_discriminator,
            opt_align_encoder: self.opt_align_encoder,
            opt_align_generator: self.opt_align_generator,
            feature_dim: self.feature_dim,
            latent_dim: self.latent_dim,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TrainError> {
        serde_json::from_str(text)
            .map_err(|e| TrainError::InvalidConfig(format!("checkpoint parse: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| TrainError::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TrainError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
