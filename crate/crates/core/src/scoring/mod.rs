//! Reconstruction scoring and outlier flagging: encode each row, regenerate
//! it, score by cosine similarity, and flag everything strictly below
//! `Q1 - 1.5 * IQR`. Low scores mark taxpayers whose feature rows the
//! trained model cannot reproduce — the potential return manipulators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bigan::BiGanModel;
use crate::features::NormalizedFeatureVector;
use crate::nn::loss::cosine;
use crate::nn::{Matrix, NnError};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("empty input")]
    EmptyInput,
    #[error("need at least 4 scores for quartiles, got {count}")]
    TooFewScores { count: usize },
    #[error("quantile fraction must lie in [0,1], got {0}")]
    QuantileDomain(f64),
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// One taxpayer's reconstruction cosine similarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxpayerScore {
    pub taxpayer_id: String,
    pub score: f64,
}

/// `score_i = cosine(x_i, G(E(x_i)))` for every row.
pub fn score(
    model: &BiGanModel,
    rows: &[NormalizedFeatureVector],
) -> Result<Vec<TaxpayerScore>, ScoreError> {
    if rows.is_empty() {
        return Err(ScoreError::EmptyInput);
    }
    let matrix = Matrix::from_rows(
        &rows
            .iter()
            .map(|r| r.values.to_vec())
            .collect::<Vec<Vec<f64>>>(),
    )?;
    let scores = score_rows(model, &matrix)?;
    Ok(rows
        .iter()
        .zip(scores)
        .map(|(r, s)| TaxpayerScore {
            taxpayer_id: r.taxpayer_id.clone(),
            score: s,
        })
        .collect())
}

/// Row-wise reconstruction cosine for a bare matrix.
pub fn score_rows(model: &BiGanModel, rows: &Matrix) -> Result<Vec<f64>, ScoreError> {
    let reconstruction = model.reconstruct(rows)?;
    Ok(rows
        .row_iter()
        .zip(reconstruction.row_iter())
        .map(|(x, r)| cosine(x, r))
        .collect())
}

/// Linear-interpolation quantile: `q * (n - 1)` indexes between order
/// statistics of the sorted list.
pub fn quantile(values: &[f64], q: f64) -> Result<f64, ScoreError> {
    if values.is_empty() {
        return Err(ScoreError::EmptyInput);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(ScoreError::QuantileDomain(q));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// One line of the final report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTaxpayer {
    pub taxpayer_id: String,
    pub score: f64,
    /// 1-based, ascending by score; ties ordered by taxpayer id.
    pub rank: usize,
    pub flagged: bool,
}

/// Scores ranked ascending plus the quartile gate that flagged them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub entries: Vec<ScoredTaxpayer>,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub threshold: f64,
    pub flagged_count: usize,
    pub total_count: usize,
}

impl ScoreReport {
    pub fn flagged_ids(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.flagged)
            .map(|e| e.taxpayer_id.as_str())
            .collect()
    }

    pub fn summary(&self) -> ScoreSummary {
        ScoreSummary {
            q1: self.q1,
            q3: self.q3,
            iqr: self.iqr,
            threshold: self.threshold,
            flagged_count: self.entries.iter().filter(|e| e.flagged).count(),
            total_count: self.entries.len(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("taxpayer_id,score,rank,flagged\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.taxpayer_id, e.score, e.rank, e.flagged
            ));
        }
        out
    }
}

/// Flag every score strictly below `Q1 - 1.5 * IQR` and rank ascending.
/// Quartiles are unstable on fewer than four scores, so that is an error.
pub fn iqr_gate(scores: &[TaxpayerScore]) -> Result<ScoreReport, ScoreError> {
    if scores.len() < 4 {
        return Err(ScoreError::TooFewScores {
            count: scores.len(),
        });
    }
    let values: Vec<f64> = scores.iter().map(|s| s.score).collect();
    let q1 = quantile(&values, 0.25)?;
    let q3 = quantile(&values, 0.75)?;
    let iqr = q3 - q1;
    let threshold = q1 - 1.5 * iqr;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .score
            .total_cmp(&scores[b].score)
            .then_with(|| scores[a].taxpayer_id.cmp(&scores[b].taxpayer_id))
    });
    let entries = order
        .into_iter()
        .enumerate()
        .map(|(i, idx)| ScoredTaxpayer {
            taxpayer_id: scores[idx].taxpayer_id.clone(),
            score: scores[idx].score,
            rank: i + 1,
            flagged: scores[idx].score < threshold,
        })
        .collect();
    Ok(ScoreReport {
        entries,
        q1,
        q3,
        iqr,
        threshold,
    })
}

/// ROC-AUC of an anomaly score against boolean labels, by the rank statistic
/// with average ranks over ties. Returns `None` when either class is empty.
pub fn roc_auc(scored_labels: &[(f64, bool)]) -> Option<f64> {
    let positives = scored_labels.iter().filter(|(_, l)| *l).count();
    let negatives = scored_labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scored_labels.len()).collect();
    order.sort_by(|&a, &b| scored_labels[a].0.total_cmp(&scored_labels[b].0));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scored_labels[order[j + 1]].0 == scored_labels[order[i]].0 {
            j += 1;
        }
        // 1-based average rank for the tie group [i, j]
        let avg_rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if scored_labels[idx].1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let p = positives as f64;
    let n = negatives as f64;
    Some((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}
