//! Outlier detection for monthly tax-return data.
//!
//! The pipeline: derive nine statistical features per taxpayer from their
//! return series ([`features`]), train a bidirectional GAN on the
//! normalized rows with a reconstruction-alignment phase ([`bigan`] on top
//! of [`nn`]), score each taxpayer by the cosine similarity between their
//! row and its regeneration, and flag scores below the quantile-IQR gate
//! ([`scoring`]). [`synth`] generates seeded datasets with injected fraud
//! signatures for end-to-end runs without real filing data.

pub mod bigan;
pub mod features;
pub mod nn;
pub mod scoring;
pub mod synth;

/// FNV-1a 64-bit content hash, used for config and artifact fingerprints.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
