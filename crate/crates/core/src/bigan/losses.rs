use rand::Rng;
use rand_distr::StandardNormal;

use crate::nn::loss::{bce_terms, mean_row_cosine, mean_row_euclidean};
use crate::nn::{Matrix, NnError};

use super::Alignment;

/// `n x latent_dim` draws from the standard normal, deterministic given the
/// rng state.
pub fn sample_latent<R: Rng + ?Sized>(n: usize, latent_dim: usize, rng: &mut R) -> Matrix {
    let mut m = Matrix::zeros(n, latent_dim);
    for v in m.data_mut() {
        *v = rng.sample(StandardNormal);
    }
    m
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

/// Mean over the batch of `-(log DE + log(1 - DG))`: the discriminator
/// should call joint pairs real and generated pairs fake.
pub fn discriminator_loss(de: &[f64], dg: &[f64]) -> Result<f64, NnError> {
    let (log_de, _) = bce_terms(de)?;
    let (_, log_1m_dg) = bce_terms(dg)?;
    Ok(-mean(&log_de) - mean(&log_1m_dg))
}

/// Mean over the batch of `-log DG`: the generator wants its pairs called
/// real.
pub fn generator_loss(dg: &[f64]) -> Result<f64, NnError> {
    let (log_dg, _) = bce_terms(dg)?;
    Ok(-mean(&log_dg))
}

/// Mean over the batch of `-log(1 - DE)`: the encoder wants its pairs
/// called generated.
pub fn encoder_loss(de: &[f64]) -> Result<f64, NnError> {
    let (_, log_1m_de) = bce_terms(de)?;
    Ok(-mean(&log_1m_de))
}

/// The phase-four objective between a batch and its regeneration:
/// mean row-wise cosine similarity (maximized) or euclidean distance
/// (minimized). `Alignment::None` has no objective.
pub fn alignment_objective(
    batch: &Matrix,
    reconstruction: &Matrix,
    variant: Alignment,
) -> Result<Option<f64>, NnError> {
    match variant {
        Alignment::None => Ok(None),
        Alignment::Cosine => Ok(Some(mean_row_cosine(batch, reconstruction)?)),
        Alignment::Euclidean => Ok(Some(mean_row_euclidean(batch, reconstruction)?)),
    }
}
