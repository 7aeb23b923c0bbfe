use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::nn::loss::{
    cosine_grad_wrt_second, euclidean_grad_wrt_second, log1m_grad, log_grad, mean_row_cosine,
    mean_row_euclidean,
};
use crate::nn::Matrix;

use super::losses::{discriminator_loss, encoder_loss, generator_loss, sample_latent};
use super::{Alignment, BiGanModel, EpochMetrics, TrainConfig, TrainError};

/// The four per-batch phases, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainPhase {
    Discriminator,
    Generator,
    Encoder,
    Alignment,
}

impl fmt::Display for TrainPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainPhase::Discriminator => write!(f, "discriminator"),
            TrainPhase::Generator => write!(f, "generator"),
            TrainPhase::Encoder => write!(f, "encoder"),
            TrainPhase::Alignment => write!(f, "alignment"),
        }
    }
}

/// Incremental trainer: one call to `run_epoch` executes, for every batch,
/// the four phases — discriminator, generator, encoder, and (unless the
/// alignment variant is `None`) the joint encoder/generator alignment
/// update. Everything is a pure function of (data, config): the rng is
/// seeded from the config and batch order is reshuffled from it each epoch.
pub struct Trainer {
    model: BiGanModel,
    config: TrainConfig,
    data: Matrix,
    rng: ChaCha8Rng,
    epochs_run: usize,
}

impl Trainer {
    pub fn new(data: Matrix, config: TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        if data.rows() == 0 {
            return Err(TrainError::EmptyDataset);
        }
        if data.rows() < config.batch_size {
            return Err(TrainError::NotEnoughRows {
                rows: data.rows(),
                batch_size: config.batch_size,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let model = BiGanModel::new(data.cols(), &config, &mut rng)?;
        Ok(Self {
            model,
            config,
            data,
            rng,
            epochs_run: 0,
        })
    }

    /// Continue training an existing model (e.g. loaded from a checkpoint).
    /// The rng is re-seeded from the config, so a resumed run is
    /// reproducible on its own, not a bit-continuation of the original.
    pub fn with_model(
        model: BiGanModel,
        data: Matrix,
        config: TrainConfig,
    ) -> Result<Self, TrainError> {
        config.validate()?;
        if data.rows() == 0 {
            return Err(TrainError::EmptyDataset);
        }
        if data.rows() < config.batch_size {
            return Err(TrainError::NotEnoughRows {
                rows: data.rows(),
                batch_size: config.batch_size,
            });
        }
        if model.feature_dim() != data.cols() {
            return Err(TrainError::InvalidConfig(format!(
                "model expects {}-dimensional rows, data has {}",
                model.feature_dim(),
                data.cols()
            )));
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self {
            model,
            config,
            data,
            rng,
            epochs_run: 0,
        })
    }

    pub fn model(&self) -> &BiGanModel {
        &self.model
    }

    pub fn into_model(self) -> BiGanModel {
        self.model
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn epochs_run(&self) -> usize {
        self.epochs_run
    }

    pub fn run_epoch(&mut self) -> Result<EpochMetrics, TrainError> {
        self.run_epoch_observed(&mut |_, _| {})
    }

    /// Like `run_epoch`, calling `observer` after every completed phase —
    /// used to assert phase isolation and to drive live progress displays.
    pub fn run_epoch_observed(
        &mut self,
        observer: &mut dyn FnMut(TrainPhase, &BiGanModel),
    ) -> Result<EpochMetrics, TrainError> {
        let epoch = self.epochs_run;
        let n = self.data.rows();
        let bs = self.config.batch_size;
        let feature_dim = self.model.feature_dim();
        let latent_dim = self.model.latent_dim();

        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut self.rng);
        // full batches only; the remainder rotates back in under the next
        // epoch's shuffle
        let batches = n / bs;

        let mut d_sum = 0.0;
        let mut g_sum = 0.0;
        let mut e_sum = 0.0;

        for batch in 0..batches {
            let x = self.data.select_rows(&indices[batch * bs..(batch + 1) * bs]);
            let scale = 1.0 / bs as f64;

            // --- phase 1: discriminator on (X, E(X)) vs (G(z), z) ---
            let z = sample_latent(bs, latent_dim, &mut self.rng);
            let gz = self.model.generator.evaluate(&z)?;
            let ex = self.model.encoder.evaluate(&x)?;
            let joint = Matrix::vstack(&Matrix::hstack(&x, &ex)?, &Matrix::hstack(&gz, &z)?)?;
            let probs = self.model.discriminator.forward(&joint)?;
            let de = &probs.data()[..bs];
            let dg = &probs.data()[bs..];
            let d_loss = discriminator_loss(de, dg)?;
            check_finite(d_loss, epoch, batch, TrainPhase::Discriminator)?;
            let mut grad = Matrix::zeros(2 * bs, 1);
            for (i, &p) in de.iter().enumerate() {
                grad.set(i, 0, -log_grad(p) * scale);
            }
            for (i, &p) in dg.iter().enumerate() {
                grad.set(bs + i, 0, -log1m_grad(p) * scale);
            }
            self.model.discriminator.backward(&grad)?;
            self.model
                .opt_discriminator
                .step_network(&mut self.model.discriminator, None)?;
            observer(TrainPhase::Discriminator, &self.model);

            // --- phase 2: generator fools the discriminator on fresh z ---
            let z = sample_latent(bs, latent_dim, &mut self.rng);
            let gz = self.model.generator.forward(&z)?;
            let probs = self
                .model
                .discriminator
                .forward(&Matrix::hstack(&gz, &z)?)?;
            let dg = probs.data();
            let g_loss = generator_loss(dg)?;
            check_finite(g_loss, epoch, batch, TrainPhase::Generator)?;
            let mut grad = Matrix::zeros(bs, 1);
            for (i, &p) in dg.iter().enumerate() {
                grad.set(i, 0, -log_grad(p) * scale);
            }
            let joint_grad = self.model.discriminator.backward(&grad)?;
            // the discriminator only routes the gradient here; drop its
            // unapplied parameter gradients
            self.model.discriminator.take_grads();
            let data_grad = joint_grad.slice_cols(0, feature_dim)?;
            self.model.generator.backward(&data_grad)?;
            self.model
                .opt_generator
                .step_network(&mut self.model.generator, None)?;
            observer(TrainPhase::Generator, &self.model);

            // --- phase 3: encoder makes (X, E(X)) look generated ---
            let ex = self.model.encoder.forward(&x)?;
            let probs = self
                .model
                .discriminator
                .forward(&Matrix::hstack(&x, &ex)?)?;
            let de = probs.data();
            let e_loss = encoder_loss(de)?;
            check_finite(e_loss, epoch, batch, TrainPhase::Encoder)?;
            let mut grad = Matrix::zeros(bs, 1);
            for (i, &p) in de.iter().enumerate() {
                grad.set(i, 0, -log1m_grad(p) * scale);
            }
            let joint_grad = self.model.discriminator.backward(&grad)?;
            self.model.discriminator.take_grads();
            let latent_grad = joint_grad.slice_cols(feature_dim, feature_dim + latent_dim)?;
            self.model.encoder.backward(&latent_grad)?;
            self.model
                .opt_encoder
                .step_network(&mut self.model.encoder, None)?;
            observer(TrainPhase::Encoder, &self.model);

            // --- phase 4: joint encoder/generator alignment on G(E(X)) ---
            if self.config.alignment != Alignment::None {
                let ex = self.model.encoder.forward(&x)?;
                let rec = self.model.generator.forward(&ex)?;
                let mut grad = Matrix::zeros(bs, feature_dim);
                let mut row_grad = vec![0.0; feature_dim];
                let mut objective = 0.0;
                for r in 0..bs {
                    match self.config.alignment {
                        Alignment::Cosine => {
                            objective +=
                                crate::nn::loss::cosine(x.row(r), rec.row(r)) * scale;
                            cosine_grad_wrt_second(x.row(r), rec.row(r), &mut row_grad);
                            // maximize similarity = descend on its negation
                            for (g, &d) in grad.row_mut(r).iter_mut().zip(&row_grad) {
                                *g = -d * scale;
                            }
                        }
                        Alignment::Euclidean => {
                            objective +=
                                crate::nn::loss::euclidean(x.row(r), rec.row(r)) * scale;
                            euclidean_grad_wrt_second(x.row(r), rec.row(r), &mut row_grad);
                            for (g, &d) in grad.row_mut(r).iter_mut().zip(&row_grad) {
                                *g = d * scale;
                            }
                        }
                        Alignment::None => unreachable!(),
                    }
                }
                check_finite(objective, epoch, batch, TrainPhase::Alignment)?;
                let latent_grad = self.model.generator.backward(&grad)?;
                self.model.encoder.backward(&latent_grad)?;
                self.model
                    .opt_align_generator
                    .step_network(&mut self.model.generator, None)?;
                self.model
                    .opt_align_encoder
                    .step_network(&mut self.model.encoder, None)?;
                observer(TrainPhase::Alignment, &self.model);
            }

            d_sum += d_loss;
            g_sum += g_loss;
            e_sum += e_loss;
        }

        self.epochs_run += 1;
        let reconstruction = self.model.reconstruct(&self.data)?;
        let metrics = EpochMetrics {
            epoch,
            d_loss: d_sum / batches as f64,
            g_loss: g_sum / batches as f64,
            e_loss: e_sum / batches as f64,
            mean_cosine: mean_row_cosine(&self.data, &reconstruction)?,
            mean_euclidean: mean_row_euclidean(&self.data, &reconstruction)?,
        };
        Ok(metrics)
    }
}

fn check_finite(
    loss: f64,
    epoch: usize,
    batch: usize,
    phase: TrainPhase,
) -> Result<(), TrainError> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(TrainError::NonFinite {
            epoch,
            batch,
            phase,
        })
    }
}

/// Train to completion, collecting per-epoch metrics.
pub fn train(data: Matrix, config: TrainConfig) -> Result<(BiGanModel, Vec<EpochMetrics>), TrainError> {
    let mut collected = Vec::with_capacity(config.epochs);
    let model = train_with(data, config, |m| collected.push(m.clone()))?;
    Ok((model, collected))
}

/// Train to completion, streaming each epoch's metrics to `on_epoch`.
pub fn train_with(
    data: Matrix,
    config: TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<BiGanModel, TrainError> {
    let mut trainer = Trainer::new(data, config)?;
    for _ in 0..trainer.config.epochs {
        let metrics = trainer.run_epoch()?;
        on_epoch(&metrics);
    }
    Ok(trainer.into_model())
}
