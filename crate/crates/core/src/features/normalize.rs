use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureVector};

/// Index of the first ratio dimension in the nine-dimensional row.
const FIRST_RATIO_DIM: usize = 6;

/// Per-dimension normalization statistics. Correlation dimensions are
/// already bounded in `[-1, 1]` and pass through with mean 0 / std 1; the
/// unbounded ratio dimensions are z-scored with dataset mean and population
/// standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub dimensions: Vec<String>,
    pub means: [f64; 9],
    pub stds: [f64; 9],
}

impl NormStats {
    pub fn apply(&self, row: &[f64; 9]) -> [f64; 9] {
        let mut out = [0.0; 9];
        for i in 0..9 {
            out[i] = (row[i] - self.means[i]) / self.stds[i];
        }
        out
    }

    pub fn invert(&self, row: &[f64; 9]) -> [f64; 9] {
        let mut out = [0.0; 9];
        for i in 0..9 {
            out[i] = row[i] * self.stds[i] + self.means[i];
        }
        out
    }
}

/// A feature row after dataset-level normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedFeatureVector {
    pub taxpayer_id: String,
    pub values: [f64; 9],
    pub months_used: usize,
}

/// Normalize a feature dataset; the returned stats invert the mapping.
pub fn normalize(
    dataset: &[FeatureVector],
) -> Result<(Vec<NormalizedFeatureVector>, NormStats), FeatureError> {
    if dataset.is_empty() {
        return Err(FeatureError::EmptyDataset);
    }
    let n = dataset.len() as f64;
    let mut means = [0.0; 9];
    let mut stds = [1.0; 9];
    for dim in FIRST_RATIO_DIM..9 {
        let mean = dataset.iter().map(|fv| fv.as_row()[dim]).sum::<f64>() / n;
        let var = dataset
            .iter()
            .map(|fv| {
                let d = fv.as_row()[dim] - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        let std = var.sqrt();
        means[dim] = mean;
        // zero-spread dimensions keep std 1 so the mapping stays invertible
        stds[dim] = if std > 0.0 { std } else { 1.0 };
    }
    let stats = NormStats {
        dimensions: FeatureVector::dimension_names().iter().map(|s| s.to_string()).collect(),
        means,
        stds,
    };
    let rows = dataset
        .iter()
        .map(|fv| NormalizedFeatureVector {
            taxpayer_id: fv.taxpayer_id.clone(),
            values: stats.apply(&fv.as_row()),
            months_used: fv.months_used,
        })
        .collect();
    Ok((rows, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(id: &str, ratios: [f64; 3]) -> FeatureVector {
        FeatureVector {
            taxpayer_id: id.into(),
            corrs: [0.9, 0.8, 0.3, 0.2, 0.95, 0.99],
            ratios,
            months_used: 12,
        }
    }

    #[test]
    fn ratio_dims_are_z_scored_with_population_std() {
        let data = vec![
            fv("a", [1.0, 1.0, 1.0]),
            fv("b", [2.0, 2.0, 2.0]),
            fv("c", [3.0, 3.0, 3.0]),
        ];
        let (rows, _) = normalize(&data).unwrap();
        for dim in 6..9 {
            assert!((rows[0].values[dim] - (-1.224744871391589)).abs() < 1e-12);
            assert!(rows[1].values[dim].abs() < 1e-12);
            assert!((rows[2].values[dim] - 1.224744871391589).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_dims_pass_through() {
        let data = vec![fv("a", [1.0, 2.0, 3.0]), fv("b", [4.0, 5.0, 6.0])];
        let (rows, _) = normalize(&data).unwrap();
        for r in &rows {
            assert_eq!(&r.values[..6], &[0.9, 0.8, 0.3, 0.2, 0.95, 0.99]);
        }
    }

    #[test]
    fn identical_rows_z_score_to_zero() {
        let data = vec![fv("a", [1.5, 2.5, 0.5]); 4];
        let (rows, stats) = normalize(&data).unwrap();
        for r in &rows {
            assert_eq!(&r.values[6..], &[0.0, 0.0, 0.0]);
        }
        assert_eq!(&stats.stds[6..], &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn normalize_then_invert_reproduces_inputs() {
        let data = vec![
            fv("a", [1.2, 0.4, 9.7]),
            fv("b", [2.1, 0.1, 3.3]),
            fv("c", [0.7, 0.9, 120.0]),
        ];
        let (rows, stats) = normalize(&data).unwrap();
        for (orig, norm) in data.iter().zip(&rows) {
            let back = stats.invert(&norm.values);
            for (o, b) in orig.as_row().iter().zip(&back) {
                assert!((o - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(matches!(normalize(&[]), Err(FeatureError::EmptyDataset)));
    }
}
