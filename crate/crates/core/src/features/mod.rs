//! Feature engineering: turn each taxpayer's monthly return series into the
//! nine-dimensional row the networks train on — six correlation parameters
//! over the aligned monthly series and three ratio parameters over
//! whole-window sums — then normalize the ratio dimensions across the
//! dataset.

pub mod csv;
mod derive;
mod normalize;
mod returns;

pub use derive::{derive_features, pearson, FeatureVector, DEFAULT_MIN_MONTHS};
pub use normalize::{normalize, NormStats, NormalizedFeatureVector};
pub use returns::{group_into_series, MonthlyReturn, Period, TaxpayerSeries};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("series too short for correlation: {len} < 2")]
    SeriesTooShort { len: usize },
    #[error("invalid period {0:?}, expected YYYY-MM")]
    InvalidPeriod(String),
    #[error("duplicate return for taxpayer {taxpayer_id} in {period}")]
    DuplicateKey {
        taxpayer_id: String,
        period: Period,
    },
    #[error("{field} for taxpayer {taxpayer_id} must be finite and >= 0, got {value}")]
    NegativeMoney {
        taxpayer_id: String,
        field: &'static str,
        value: f64,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
