//! Loss primitives: clamped log terms for the adversarial losses, and the
//! row-wise cosine/euclidean measures used for reconstruction alignment
//! and scoring.

use super::{Matrix, NnError};

/// Probabilities are clamped to `[PROB_EPSILON, 1 - PROB_EPSILON]` before
/// logs so a saturated discriminator never produces an infinite loss.
pub const PROB_EPSILON: f64 = 1e-7;

/// Tolerance when validating that inputs are probabilities.
const PROB_DOMAIN_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_prob(p: f64, context: &'static str) -> Result<(), NnError> {
    if !(p.is_finite() && (-PROB_DOMAIN_TOLERANCE..=1.0 + PROB_DOMAIN_TOLERANCE).contains(&p)) {
        return Err(NnError::ProbabilityDomain { value: p, context });
    }
    Ok(())
}

pub(crate) fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON)
}

/// `(log p, log(1-p))` per entry, with clamping; both outputs are finite.
pub fn bce_terms(probs: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    let mut log_p = Vec::with_capacity(probs.len());
    let mut log_1m = Vec::with_capacity(probs.len());
    for &p in probs {
        check_prob(p, "bce_terms")?;
        log_p.push(clamp_prob(p).ln());
        log_1m.push(clamp_prob(1.0 - p).ln());
    }
    Ok((log_p, log_1m))
}

/// d/dp of `log(clamp(p))`: zero in the saturated region, matching the
/// clamp used by `bce_terms`.
pub fn log_grad(p: f64) -> f64 {
    if p > PROB_EPSILON && p < 1.0 - PROB_EPSILON {
        1.0 / p
    } else {
        0.0
    }
}

/// d/dp of `log(1 - clamp(p))`.
pub fn log1m_grad(p: f64) -> f64 {
    if p > PROB_EPSILON && p < 1.0 - PROB_EPSILON {
        -1.0 / (1.0 - p)
    } else {
        0.0
    }
}

/// Cosine similarity of two equal-length vectors. A zero vector carries no
/// direction, so any pairing with one scores 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_same_shape(a: &Matrix, b: &Matrix, context: &str) -> Result<(), NnError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(NnError::Shape {
            context: context.into(),
            expected: format!("{} x {}", a.rows(), a.cols()),
            actual: format!("{} x {}", b.rows(), b.cols()),
        });
    }
    Ok(())
}

/// Mean over rows of `cosine(a_i, b_i)`.
pub fn mean_row_cosine(a: &Matrix, b: &Matrix) -> Result<f64, NnError> {
    check_same_shape(a, b, "mean_row_cosine")?;
    let n = a.rows().max(1) as f64;
    Ok(a.row_iter()
        .zip(b.row_iter())
        .map(|(x, y)| cosine(x, y))
        .sum::<f64>()
        / n)
}

/// Mean over rows of `euclidean(a_i, b_i)`.
pub fn mean_row_euclidean(a: &Matrix, b: &Matrix) -> Result<f64, NnError> {
    check_same_shape(a, b, "mean_row_euclidean")?;
    let n = a.rows().max(1) as f64;
    Ok(a.row_iter()
        .zip(b.row_iter())
        .map(|(x, y)| euclidean(x, y))
        .sum::<f64>()
        / n)
}

/// Gradient of `cosine(a, b)` with respect to `b`, written into `out`.
///
/// `d cos / d b = a / (|a||b|) - cos * b / |b|^2`; zero when either vector
/// is zero (the similarity is constant 0 there by policy).
pub fn cosine_grad_wrt_second(a: &[f64], b: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), out.len());
    let mut dot = 0.0;
    let mut na2 = 0.0;
    let mut nb2 = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na2 += x * x;
        nb2 += y * y;
    }
    if na2 == 0.0 || nb2 == 0.0 {
        out.fill(0.0);
        return;
    }
    let na = na2.sqrt();
    let nb = nb2.sqrt();
    let cos = dot / (na * nb);
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = x / (na * nb) - cos * y / nb2;
    }
}

/// Gradient of `euclidean(a, b)` with respect to `b`, written into `out`:
/// `(b - a) / |b - a|`, zero at coincident points.
pub fn euclidean_grad_wrt_second(a: &[f64], b: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), out.len());
    let dist = euclidean(a, b);
    if dist == 0.0 {
        out.fill(0.0);
        return;
    }
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = (y - x) / dist;
    }
}
