//! wasm-bindgen surface for the browser demo. All heavy lifting stays in
//! `taxgan-core`; this crate adapts three interactive operations — generate
//! a synthetic cohort, step both alignment variants through training
//! epochs, and score/flag the cohort — returning JSON strings for the page
//! to render.

use std::collections::HashMap;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use taxgan_core::bigan::{Alignment, EpochMetrics, TrainConfig, Trainer};
use taxgan_core::features::{derive_features, group_into_series, normalize, NormalizedFeatureVector};
use taxgan_core::nn::Matrix;
use taxgan_core::scoring::{iqr_gate, roc_auc, score};
use taxgan_core::synth::{generate, SynthConfig};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[derive(Serialize)]
struct DatasetSummary {
    taxpayers: usize,
    fraud: usize,
    months: usize,
    feature_dim: usize,
}

#[derive(Serialize)]
struct StepOutput {
    epoch: usize,
    total_epochs: usize,
    cosine: EpochMetrics,
    euclidean: EpochMetrics,
}

#[derive(Serialize)]
struct ReportEntry {
    taxpayer_id: String,
    score: f64,
    rank: usize,
    flagged: bool,
    is_fraud: bool,
}

#[derive(Serialize)]
struct ReportOutput {
    q1: f64,
    q3: f64,
    iqr: f64,
    threshold: f64,
    flagged_count: usize,
    total_count: usize,
    roc_auc: Option<f64>,
    precision: Option<f64>,
    entries: Vec<ReportEntry>,
}

/// One demo session: a generated cohort plus two trainers (the cosine
/// variant and the euclidean baseline) stepped in lockstep.
#[wasm_bindgen]
pub struct Demo {
    rows: Vec<NormalizedFeatureVector>,
    data: Matrix,
    labels: HashMap<String, bool>,
    months: usize,
    cosine: Option<Trainer>,
    euclidean: Option<Trainer>,
    total_epochs: usize,
}

#[wasm_bindgen]
impl Demo {
    /// Generate the cohort and derive/normalize its feature rows.
    #[wasm_bindgen(constructor)]
    pub fn new(n_genuine: u32, n_fraud: u32, months: u32, seed: u32) -> Result<Demo, JsError> {
        let config = SynthConfig {
            n_genuine: n_genuine as usize,
            n_fraud: n_fraud as usize,
            months: months as usize,
            seed: seed as u64,
            ..SynthConfig::default()
        };
        let dataset = generate(&config).map_err(js_err)?;
        let labels: HashMap<String, bool> = dataset
            .labels
            .iter()
            .map(|l| (l.taxpayer_id.clone(), l.is_fraud))
            .collect();
        let series = group_into_series(dataset.returns).map_err(js_err)?;
        let mut features = Vec::with_capacity(series.len());
        for s in &series {
            if let Some(fv) = derive_features(s, 6).map_err(js_err)? {
                features.push(fv);
            }
        }
        let (rows, _) = normalize(&features).map_err(js_err)?;
        let data = Matrix::from_rows(
            &rows.iter().map(|r| r.values.to_vec()).collect::<Vec<_>>(),
        )
        .map_err(js_err)?;
        Ok(Demo {
            rows,
            data,
            labels,
            months: months as usize,
            cosine: None,
            euclidean: None,
            total_epochs: 0,
        })
    }

    pub fn dataset_summary(&self) -> String {
        let summary = DatasetSummary {
            taxpayers: self.rows.len(),
            fraud: self.labels.values().filter(|&&f| f).count(),
            months: self.months,
            feature_dim: 9,
        };
        serde_json::to_string(&summary).expect("summary serializes")
    }

    /// Set up both trainers with a shared seed and config.
    pub fn start_training(
        &mut self,
        epochs: u32,
        batch_size: u32,
        latent_dim: u32,
        seed: u32,
    ) -> Result<(), JsError> {
        let base = TrainConfig {
            epochs: epochs as usize,
            batch_size: batch_size as usize,
            latent_dim: latent_dim as usize,
            seed: seed as u64,
            ..TrainConfig::default()
        };
        let mut cosine_cfg = base.clone();
        cosine_cfg.alignment = Alignment::Cosine;
        let mut euclidean_cfg = base;
        euclidean_cfg.alignment = Alignment::Euclidean;
        self.cosine = Some(Trainer::new(self.data.clone(), cosine_cfg).map_err(js_err)?);
        self.euclidean = Some(Trainer::new(self.data.clone(), euclidean_cfg).map_err(js_err)?);
        self.total_epochs = epochs as usize;
        Ok(())
    }

    /// Run one epoch on each variant; returns both metric sets as JSON.
    pub fn step_epoch(&mut self) -> Result<String, JsError> {
        let cosine = self
            .cosine
            .as_mut()
            .ok_or_else(|| JsError::new("call start_training first"))?;
        let euclidean = self
            .euclidean
            .as_mut()
            .ok_or_else(|| JsError::new("call start_training first"))?;
        let cos_metrics = cosine.run_epoch().map_err(js_err)?;
        let euc_metrics = euclidean.run_epoch().map_err(js_err)?;
        let out = StepOutput {
            epoch: cos_metrics.epoch,
            total_epochs: self.total_epochs,
            cosine: cos_metrics,
            euclidean: euc_metrics,
        };
        Ok(serde_json::to_string(&out).expect("metrics serialize"))
    }

    pub fn epochs_run(&self) -> u32 {
        self.cosine.as_ref().map_or(0, |t| t.epochs_run() as u32)
    }

    pub fn total_epochs(&self) -> u32 {
        self.total_epochs as u32
    }

    /// Score the cohort with the cosine-variant model and apply the
    /// quantile gate; ground-truth labels ride along for display only.
    pub fn score_report(&self) -> Result<String, JsError> {
        let trainer = self
            .cosine
            .as_ref()
            .ok_or_else(|| JsError::new("train before scoring"))?;
        let scores = score(trainer.model(), &self.rows).map_err(js_err)?;
        let report = iqr_gate(&scores).map_err(js_err)?;

        let pairs: Vec<(f64, bool)> = scores
            .iter()
            .map(|s| (1.0 - s.score, self.labels[&s.taxpayer_id]))
            .collect();
        let auc = roc_auc(&pairs);
        let flagged: Vec<&_> = report.entries.iter().filter(|e| e.flagged).collect();
        let precision = if flagged.is_empty() {
            None
        } else {
            let hits = flagged.iter().filter(|e| self.labels[&e.taxpayer_id]).count();
            Some(hits as f64 / flagged.len() as f64)
        };

        let summary = report.summary();
        let out = ReportOutput {
            q1: summary.q1,
            q3: summary.q3,
            iqr: summary.iqr,
            threshold: summary.threshold,
            flagged_count: summary.flagged_count,
            total_count: summary.total_count,
            roc_auc: auc,
            precision,
            entries: report
                .entries
                .iter()
                .map(|e| ReportEntry {
                    taxpayer_id: e.taxpayer_id.clone(),
                    score: e.score,
                    rank: e.rank,
                    flagged: e.flagged,
                    is_fraud: self.labels[&e.taxpayer_id],
                })
                .collect(),
        };
        Ok(serde_json::to_string(&out).expect("report serializes"))
    }
}
