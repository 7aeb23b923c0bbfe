use serde::{Deserialize, Serialize};

use super::{FeatureError, TaxpayerSeries};

/// Pearson needs at least this many aligned months; shorter windows are
/// excluded regardless of the configured minimum.
const MIN_MONTHS_FLOOR: usize = 2;

/// Default exclusion threshold: correlations over very short series are
/// mostly noise.
pub const DEFAULT_MIN_MONTHS: usize = 6;

/// The nine-dimensional row derived for one taxpayer: six correlations over
/// the aligned monthly series and three ratios over whole-window sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub taxpayer_id: String,
    /// corr1: total liability vs total sales; corr2: SGST liability vs total
    /// liability; corr3: SGST cash vs SGST liability; corr4: SGST cash vs
    /// total sales; corr5: total ITC vs total liability; corr6: IGST ITC vs
    /// total ITC.
    pub corrs: [f64; 6],
    /// ratio1: sales/purchases; ratio2: IGST ITC/total ITC; ratio3: total
    /// liability/IGST ITC.
    pub ratios: [f64; 3],
    pub months_used: usize,
}

impl FeatureVector {
    pub fn as_row(&self) -> [f64; 9] {
        [
            self.corrs[0],
            self.corrs[1],
            self.corrs[2],
            self.corrs[3],
            self.corrs[4],
            self.corrs[5],
            self.ratios[0],
            self.ratios[1],
            self.ratios[2],
        ]
    }

    pub fn dimension_names() -> [&'static str; 9] {
        [
            "corr1", "corr2", "corr3", "corr4", "corr5", "corr6", "ratio1", "ratio2", "ratio3",
        ]
    }
}

/// Pearson product-moment correlation.
///
/// A zero-variance series carries no linear signal, so pairings with one
/// return 0 rather than NaN.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, FeatureError> {
    if xs.len() != ys.len() {
        return Err(FeatureError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(FeatureError::SeriesTooShort { len: xs.len() });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Ok(0.0);
    }
    Ok((cov / (var_x.sqrt() * var_y.sqrt())).clamp(-1.0, 1.0))
}

/// Ratio with the denominator floored at one currency unit, so dealers with
/// e.g. zero IGST ITC stay finite (and conspicuous) instead of dividing by
/// zero.
fn safe_ratio(numerator: f64, denominator: f64) -> f64 {
    numerator / denominator.max(1.0)
}

/// Derive the nine features for one taxpayer, or `None` when the series has
/// fewer usable months than `min_months`.
pub fn derive_features(
    series: &TaxpayerSeries,
    min_months: usize,
) -> Result<Option<FeatureVector>, FeatureError> {
    let months_used = series.len();
    if months_used < min_months.max(MIN_MONTHS_FLOOR) {
        return Ok(None);
    }
    let rs = series.returns();
    let sales: Vec<f64> = rs.iter().map(|r| r.total_sales).collect();
    let total_liab: Vec<f64> = rs.iter().map(|r| r.total_liability()).collect();
    let sgst_liab: Vec<f64> = rs.iter().map(|r| r.sgst_liability).collect();
    let sgst_cash: Vec<f64> = rs.iter().map(|r| r.sgst_cash_paid).collect();
    let total_itc: Vec<f64> = rs.iter().map(|r| r.total_itc()).collect();
    let igst_itc: Vec<f64> = rs.iter().map(|r| r.igst_itc).collect();

    let corrs = [
        pearson(&total_liab, &sales)?,
        pearson(&sgst_liab, &total_liab)?,
        pearson(&sgst_cash, &sgst_liab)?,
        pearson(&sgst_cash, &sales)?,
        pearson(&total_itc, &total_liab)?,
        pearson(&igst_itc, &total_itc)?,
    ];

    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let purchases_sum: f64 = rs.iter().map(|r| r.total_purchases).sum();
    let ratios = [
        safe_ratio(sum(&sales), purchases_sum),
        safe_ratio(sum(&igst_itc), sum(&total_itc)),
        safe_ratio(sum(&total_liab), sum(&igst_itc)),
    ];

    Ok(Some(FeatureVector {
        taxpayer_id: series.taxpayer_id().to_string(),
        corrs,
        ratios,
        months_used,
    }))
}
