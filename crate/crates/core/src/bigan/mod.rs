//! The three networks (encoder, generator, discriminator), their
//! adversarial losses, and the four-phase training loop with the
//! reconstruction-alignment step: after the discriminator, generator and
//! encoder updates, the encoder and generator are updated together to raise
//! the cosine similarity (or lower the euclidean distance) between each
//! input row and its regeneration.

mod checkpoint;
mod losses;
mod train;

pub use checkpoint::Checkpoint;
pub use losses::{
    alignment_objective, discriminator_loss, encoder_loss, generator_loss, sample_latent,
};
pub use train::{train, train_with, TrainPhase, Trainer};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{Activation, AdamParams, AdamState, Matrix, Network, NnError};

/// Which objective phase four trains the encoder and generator on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Skip the alignment phase entirely.
    None,
    /// Minimize the mean row-wise euclidean distance between a batch and
    /// its regeneration.
    Euclidean,
    /// Maximize the mean row-wise cosine similarity between a batch and its
    /// regeneration.
    #[default]
    Cosine,
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alignment::None => write!(f, "none"),
            Alignment::Euclidean => write!(f, "euclidean"),
            Alignment::Cosine => write!(f, "cosine"),
        }
    }
}

impl FromStr for Alignment {
    type Err = TrainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Alignment::None),
            "euclidean" => Ok(Alignment::Euclidean),
            "cosine" => Ok(Alignment::Cosine),
            other => Err(TrainError::InvalidConfig(format!(
                "unknown alignment {other:?}; expected none, euclidean or cosine"
            ))),
        }
    }
}

/// Training configuration with the defaults used throughout: 4-dim latent
/// space (so the discriminator sees 13 dimensions), 2e-4 adversarial
/// learning rates, 1e-3 for the alignment phase. The alignment rate is the
/// knob that lets phase four hold its ground against the adversarial
/// updates; much below this the reconstruction stalls regardless of
/// variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub latent_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_discriminator: f64,
    pub lr_generator: f64,
    pub lr_encoder: f64,
    pub lr_alignment: f64,
    pub alignment: Alignment,
    pub seed: u64,
    pub encoder_hidden: Vec<usize>,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub leaky_slope: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            latent_dim: 4,
            epochs: 300,
            batch_size: 64,
            lr_discriminator: 2e-4,
            lr_generator: 2e-4,
            lr_encoder: 2e-4,
            lr_alignment: 1e-3,
            alignment: Alignment::Cosine,
            seed: 0,
            encoder_hidden: vec![32, 16],
            generator_hidden: vec![16, 32],
            discriminator_hidden: vec![32, 16],
            leaky_slope: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.latent_dim == 0 {
            return Err(TrainError::InvalidConfig("latent_dim must be >= 1".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(TrainError::InvalidConfig(
                "epochs and batch_size must be >= 1".into(),
            ));
        }
        for (name, lr) in [
            ("lr_discriminator", self.lr_discriminator),
            ("lr_generator", self.lr_generator),
            ("lr_encoder", self.lr_encoder),
            ("lr_alignment", self.lr_alignment),
        ] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(TrainError::InvalidConfig(format!("{name} must be > 0")));
            }
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            return Err(TrainError::InvalidConfig(
                "leaky_slope must lie in (0,1)".into(),
            ));
        }
        Ok(())
    }
}

/// Encoder, generator and discriminator plus their optimizer states. The
/// alignment phase keeps its own moment accumulators for the encoder and
/// generator: its gradients are much smaller than the adversarial ones, and
/// with shared moments the phase would mostly replay adversarial momentum
/// instead of pursuing its own objective.
#[derive(Debug, Clone)]
pub struct BiGanModel {
    pub(crate) encoder: Network,
    pub(crate) generator: Network,
    pub(crate) discriminator: Network,
    pub(crate) opt_encoder: AdamState,
    pub(crate) opt_generator: AdamState,
    pub(crate) opt_discriminator: AdamState,
    pub(crate) opt_align_encoder: AdamState,
    pub(crate) opt_align_generator: AdamState,
    feature_dim: usize,
    latent_dim: usize,
}

impl BiGanModel {
    /// Fresh model for `feature_dim`-dimensional rows. Network weights are
    /// drawn from `rng` in a fixed order (encoder, generator,
    /// discriminator), so a seeded rng gives a reproducible model.
    pub fn new<R: Rng + ?Sized>(
        feature_dim: usize,
        config: &TrainConfig,
        rng: &mut R,
    ) -> Result<Self, TrainError> {
        config.validate()?;
        if feature_dim == 0 {
            return Err(TrainError::InvalidConfig("feature_dim must be >= 1".into()));
        }
        let leaky = Activation::LeakyRelu {
            slope: config.leaky_slope,
        };

        let mut dims = vec![feature_dim];
        dims.extend(&config.encoder_hidden);
        dims.push(config.latent_dim);
        let encoder = Network::mlp(&dims, leaky, Activation::Identity, rng)?;

        let mut dims = vec![config.latent_dim];
        dims.extend(&config.generator_hidden);
        dims.push(feature_dim);
        let generator = Network::mlp(&dims, leaky, Activation::Identity, rng)?;

        let mut dims = vec![feature_dim + config.latent_dim];
        dims.extend(&config.discriminator_hidden);
        dims.push(1);
        let discriminator = Network::mlp(&dims, leaky, Activation::Sigmoid, rng)?;

        let opt = |lr: f64, net: &Network| {
            AdamState::for_network(AdamParams::with_learning_rate(lr), net)
        };
        Ok(Self {
            opt_encoder: opt(config.lr_encoder, &encoder),
            opt_generator: opt(config.lr_generator, &generator),
            opt_discriminator: opt(config.lr_discriminator, &discriminator),
            opt_align_encoder: opt(config.lr_alignment, &encoder),
            opt_align_generator: opt(config.lr_alignment, &generator),
            encoder,
            generator,
            discriminator,
            feature_dim,
            latent_dim: config.latent_dim,
        })
    }

    /// Assemble a model from hand-built networks; dims are inferred and
    /// checked, optimizer states start fresh with default hyperparameters.
    pub fn from_networks(
        encoder: Network,
        generator: Network,
        discriminator: Network,
    ) -> Result<Self, TrainError> {
        let feature_dim = encoder.input_dim();
        let latent_dim = encoder.output_dim();
        let consistent = generator.input_dim() == latent_dim
            && generator.output_dim() == feature_dim
            && discriminator.input_dim() == feature_dim + latent_dim
            && discriminator.output_dim() == 1;
        if !consistent {
            return Err(TrainError::InvalidConfig(
                "network dimensions do not form a consistent model".into(),
            ));
        }
        let opt = |net: &Network| AdamState::for_network(AdamParams::default(), net);
        Ok(Self {
            opt_encoder: opt(&encoder),
            opt_generator: opt(&generator),
            opt_discriminator: opt(&discriminator),
            opt_align_encoder: opt(&encoder),
            opt_align_generator: opt(&generator),
            encoder,
            generator,
            discriminator,
            feature_dim,
            latent_dim,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn encoder(&self) -> &Network {
        &self.encoder
    }

    pub fn generator(&self) -> &Network {
        &self.generator
    }

    pub fn discriminator(&self) -> &Network {
        &self.discriminator
    }

    /// Latent representation of `rows` (read-only pass).
    pub fn encode(&self, rows: &Matrix) -> Result<Matrix, NnError> {
        self.encoder.evaluate(rows)
    }

    /// Regenerated rows for latent codes `z` (read-only pass).
    pub fn generate(&self, z: &Matrix) -> Result<Matrix, NnError> {
        self.generator.evaluate(z)
    }

    /// `G(E(rows))` — each row's regeneration through the latent space.
    pub fn reconstruct(&self, rows: &Matrix) -> Result<Matrix, NnError> {
        self.generate(&self.encode(rows)?)
    }
}

/// Per-epoch training metrics; the reconstruction measures are computed
/// over the full dataset after the epoch's updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub e_loss: f64,
    pub mean_cosine: f64,
    pub mean_euclidean: f64,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset has {rows} rows; need at least batch_size = {batch_size}")]
    NotEnoughRows { rows: usize, batch_size: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("non-finite {phase} loss at epoch {epoch}, batch {batch}")]
    NonFinite {
        epoch: usize,
        batch: usize,
        phase: TrainPhase,
    },
    #[error(transparent)]
    Nn(#[from] NnError),
}
