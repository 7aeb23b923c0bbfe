use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use taxgan_core::bigan::{Alignment, Checkpoint, EpochMetrics, TrainConfig, Trainer};
use taxgan_core::features::csv::{
    features_to_csv, load_feature_rows, load_series, normalized_to_csv,
};
use taxgan_core::features::{
    derive_features, normalize, FeatureVector, NormStats, NormalizedFeatureVector,
};
use taxgan_core::nn::Matrix;
use taxgan_core::scoring::{iqr_gate, roc_auc, score, ScoreSummary};
use taxgan_core::synth::{generate, SynthConfig};

use crate::error::CliError;
use crate::manifest::{ensure_dir, write_file, RunManifest};

fn parse_json_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn rows_to_matrix(rows: &[NormalizedFeatureVector]) -> Result<Matrix, CliError> {
    Matrix::from_rows(&rows.iter().map(|r| r.values.to_vec()).collect::<Vec<_>>())
        .map_err(|e| CliError::Data(e.to_string()))
}

// ---------------------------------------------------------------- synth ---

#[derive(Debug, Default)]
pub struct SynthArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn cmd_synth(args: &SynthArgs) -> Result<RunManifest, CliError> {
    let mut config: SynthConfig = match &args.config {
        Some(path) => parse_json_file(path)?,
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    run_synth(&config, &args.out)
}

pub fn run_synth(config: &SynthConfig, out: &Path) -> Result<RunManifest, CliError> {
    ensure_dir(out)?;
    let dataset = generate(config)?;

    let returns_path = out.join("returns.csv");
    write_file(
        &returns_path,
        &taxgan_core::features::csv::returns_to_csv(&dataset.returns),
    )?;
    let labels_path = out.join("labels.csv");
    write_file(&labels_path, &dataset.labels_to_csv())?;

    let mut manifest = RunManifest::new(
        "synth",
        config.seed,
        serde_json::to_value(config).expect("config serializes"),
    );
    manifest.record_output("returns", &returns_path)?;
    manifest.record_output("labels", &labels_path)?;
    manifest.save(out)?;
    Ok(manifest)
}

// ------------------------------------------------------------- features ---

#[derive(Debug)]
pub struct FeaturesArgs {
    pub returns: PathBuf,
    pub min_months: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturesConfig {
    pub min_months: usize,
}

pub fn cmd_features(args: &FeaturesArgs) -> Result<RunManifest, CliError> {
    run_features(
        &args.returns,
        &FeaturesConfig {
            min_months: args.min_months,
        },
        &args.out,
    )
}

pub fn run_features(
    returns: &Path,
    config: &FeaturesConfig,
    out: &Path,
) -> Result<RunManifest, CliError> {
    ensure_dir(out)?;
    let series = load_series(returns)?;
    for s in &series {
        for r in s.returns() {
            r.validate()?;
        }
    }

    let mut retained: Vec<FeatureVector> = Vec::new();
    let mut excluded: Vec<String> = Vec::new();
    for s in &series {
        match derive_features(s, config.min_months)? {
            Some(fv) => retained.push(fv),
            None => excluded.push(s.taxpayer_id().to_string()),
        }
    }

    let (normalized, stats) = if retained.is_empty() {
        eprintln!(
            "warning: no taxpayer reached min_months = {}; feature files are empty",
            config.min_months
        );
        (Vec::new(), identity_stats())
    } else {
        normalize(&retained)?
    };

    let features_path = out.join("features.csv");
    write_file(&features_path, &features_to_csv(&retained))?;
    let normalized_path = out.join("features_normalized.csv");
    write_file(&normalized_path, &normalized_to_csv(&normalized))?;
    let stats_path = out.join("norm_stats.json");
    write_file(
        &stats_path,
        &serde_json::to_string_pretty(&stats).expect("stats serialize"),
    )?;
    let excluded_path = out.join("excluded.txt");
    write_file(&excluded_path, &(excluded.join("\n") + "\n"))?;

    let mut manifest = RunManifest::new(
        "features",
        0,
        serde_json::to_value(config).expect("config serializes"),
    );
    manifest.record_input("returns", returns);
    manifest.record_output("features", &features_path)?;
    manifest.record_output("features_normalized", &normalized_path)?;
    manifest.record_output("norm_stats", &stats_path)?;
    manifest.record_output("excluded", &excluded_path)?;
    manifest.save(out)?;
    Ok(manifest)
}

fn identity_stats() -> NormStats {
    NormStats {
        dimensions: FeatureVector::dimension_names()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        means: [0.0; 9],
        stds: [1.0; 9],
    }
}

// ---------------------------------------------------------------- train ---

#[derive(Debug, Default)]
pub struct TrainArgs {
    pub features: PathBuf,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub alignment: Option<Alignment>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub latent_dim: Option<usize>,
    pub resume: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn cmd_train(args: &TrainArgs) -> Result<RunManifest, CliError> {
    let mut config: TrainConfig = match &args.config {
        Some(path) => parse_json_file(path)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(alignment) = args.alignment {
        config.alignment = alignment;
    }
    if let Some(epochs) = args.epochs {
        config.epochs = epochs;
    }
    if let Some(batch_size) = args.batch_size {
        config.batch_size = batch_size;
    }
    if let Some(latent_dim) = args.latent_dim {
        config.latent_dim = latent_dim;
    }
    run_train(&args.features, &config, args.resume.as_deref(), &args.out)
}

pub fn run_train(
    features: &Path,
    config: &TrainConfig,
    resume: Option<&Path>,
    out: &Path,
) -> Result<RunManifest, CliError> {
    config.validate()?;
    ensure_dir(out)?;
    let rows = load_feature_rows(features)?;
    let data = rows_to_matrix(&rows)?;

    let mut trainer = match resume {
        Some(checkpoint_path) => {
            let model = Checkpoint::load(checkpoint_path)?.into_model()?;
            if model.feature_dim() != data.cols() {
                return Err(CliError::Data(format!(
                    "checkpoint expects {}-dimensional rows, features file has {}",
                    model.feature_dim(),
                    data.cols()
                )));
            }
            Trainer::with_model(model, data, config.clone())?
        }
        None => Trainer::new(data, config.clone())?,
    };

    let metrics_path = out.join("metrics.jsonl");
    let file = std::fs::File::create(&metrics_path).map_err(|e| CliError::io(&metrics_path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    for _ in 0..config.epochs {
        let metrics = trainer.run_epoch()?;
        let line = serde_json::to_string(&metrics).expect("metrics serialize");
        writeln!(writer, "{line}").map_err(|e| CliError::io(&metrics_path, e))?;
    }
    writer.flush().map_err(|e| CliError::io(&metrics_path, e))?;

    let model = trainer.into_model();
    let checkpoint_path = out.join("checkpoint.json");
    Checkpoint::from_model(&model, config).save(&checkpoint_path)?;

    let mut manifest = RunManifest::new(
        "train",
        config.seed,
        serde_json::to_value(config).expect("config serializes"),
    );
    manifest.record_input("features", features);
    if let Some(r) = resume {
        manifest.record_input("resume", r);
    }
    manifest.record_output("metrics", &metrics_path)?;
    manifest.record_output("checkpoint", &checkpoint_path)?;
    manifest.save(out)?;
    Ok(manifest)
}

// ---------------------------------------------------------------- score ---

#[derive(Debug, Default)]
pub struct ScoreArgs {
    pub checkpoint: PathBuf,
    pub features: PathBuf,
    pub labels: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct SummaryOut {
    #[serde(flatten)]
    summary: ScoreSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    roc_auc: Option<f64>,
}

pub fn cmd_score(args: &ScoreArgs) -> Result<RunManifest, CliError> {
    run_score(
        &args.checkpoint,
        &args.features,
        args.labels.as_deref(),
        &args.out,
    )
}

pub fn run_score(
    checkpoint: &Path,
    features: &Path,
    labels: Option<&Path>,
    out: &Path,
) -> Result<RunManifest, CliError> {
    ensure_dir(out)?;
    let model = Checkpoint::load(checkpoint)?.into_model()?;
    let rows = load_feature_rows(features)?;
    let scores = score(&model, &rows)?;
    let report = iqr_gate(&scores)?;

    let auc = match labels {
        Some(labels_path) => {
            let labels = parse_labels(labels_path)?;
            // anomaly score is 1 - cosine similarity: higher = more suspect
            let pairs: Vec<(f64, bool)> = scores
                .iter()
                .map(|s| {
                    let label = labels
                        .iter()
                        .find(|(id, _)| id == &s.taxpayer_id)
                        .map(|(_, l)| *l)
                        .ok_or_else(|| {
                            CliError::Data(format!("no label for taxpayer {}", s.taxpayer_id))
                        })?;
                    Ok((1.0 - s.score, label))
                })
                .collect::<Result<_, CliError>>()?;
            roc_auc(&pairs)
        }
        None => None,
    };

    let report_path = out.join("report.csv");
    write_file(&report_path, &report.to_csv())?;
    let summary_path = out.join("summary.json");
    let summary = SummaryOut {
        summary: report.summary(),
        roc_auc: auc,
    };
    write_file(
        &summary_path,
        &serde_json::to_string_pretty(&summary).expect("summary serialize"),
    )?;

    let mut manifest = RunManifest::new("score", 0, serde_json::Value::Null);
    manifest.record_input("checkpoint", checkpoint);
    manifest.record_input("features", features);
    if let Some(l) = labels {
        manifest.record_input("labels", l);
    }
    manifest.record_output("report", &report_path)?;
    manifest.record_output("summary", &summary_path)?;
    manifest.save(out)?;
    Ok(manifest)
}

pub fn parse_labels(path: &Path) -> Result<Vec<(String, bool)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == "taxpayer_id,is_fraud" => {}
        _ => {
            return Err(CliError::Data(format!(
                "{}: expected header taxpayer_id,is_fraud",
                path.display()
            )))
        }
    }
    let mut labels = Vec::new();
    for (idx, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let (id, flag) = raw.split_once(',').ok_or_else(|| {
            CliError::Data(format!("{}: line {}: expected two fields", path.display(), idx + 1))
        })?;
        let is_fraud = match flag.trim_end() {
            "true" => true,
            "false" => false,
            other => {
                return Err(CliError::Data(format!(
                    "{}: line {}: expected true/false, got {other:?}",
                    path.display(),
                    idx + 1
                )))
            }
        };
        labels.push((id.to_string(), is_fraud));
    }
    Ok(labels)
}

// -------------------------------------------------------------- compare ---

#[derive(Debug)]
pub struct CompareArgs {
    pub features: PathBuf,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub batch_size: Option<usize>,
    pub latent_dim: Option<usize>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareConfig {
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Serialize)]
struct CompareRow {
    seed: u64,
    cosine_final_mean_cosine: f64,
    euclidean_final_mean_cosine: f64,
    winner: &'static str,
}

#[derive(Debug, Serialize)]
struct CompareSummary {
    rows: Vec<CompareRow>,
    cosine_wins: usize,
    euclidean_wins: usize,
    ties: usize,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<RunManifest, CliError> {
    let mut train = TrainConfig::default();
    if let Some(batch_size) = args.batch_size {
        train.batch_size = batch_size;
    }
    if let Some(latent_dim) = args.latent_dim {
        train.latent_dim = latent_dim;
    }
    let config = CompareConfig {
        seeds: args.seeds.clone(),
        epochs: args.epochs,
        train,
    };
    run_compare(&args.features, &config, &args.out)
}

pub fn run_compare(
    features: &Path,
    config: &CompareConfig,
    out: &Path,
) -> Result<RunManifest, CliError> {
    if config.epochs == 0 {
        return Err(CliError::Usage("epochs must be >= 1".into()));
    }
    if config.seeds.is_empty() {
        return Err(CliError::Usage("at least one seed is required".into()));
    }
    ensure_dir(out)?;
    let rows = load_feature_rows(features)?;
    let data = rows_to_matrix(&rows)?;

    // each seed trains both variants on its own thread; every run is
    // internally single-threaded and independently seeded
    let results: Vec<Result<CompareRow, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds
            .iter()
            .map(|&seed| {
                let data = data.clone();
                let train = config.train.clone();
                let epochs = config.epochs;
                scope.spawn(move || -> Result<CompareRow, CliError> {
                    let mut final_cosine = [0.0; 2];
                    for (slot, alignment) in
                        [Alignment::Cosine, Alignment::Euclidean].into_iter().enumerate()
                    {
                        let mut cfg = train.clone();
                        cfg.seed = seed;
                        cfg.epochs = epochs;
                        cfg.alignment = alignment;
                        let (_, metrics) = taxgan_core::bigan::train(data.clone(), cfg)?;
                        final_cosine[slot] =
                            metrics.last().map(|m| m.mean_cosine).unwrap_or(f64::NAN);
                    }
                    let winner = if final_cosine[0] > final_cosine[1] {
                        "cosine"
                    } else if final_cosine[1] > final_cosine[0] {
                        "euclidean"
                    } else {
                        "tie"
                    };
                    Ok(CompareRow {
                        seed,
                        cosine_final_mean_cosine: final_cosine[0],
                        euclidean_final_mean_cosine: final_cosine[1],
                        winner,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("compare worker panicked"))
            .collect()
    });

    let mut rows_out = Vec::with_capacity(results.len());
    for r in results {
        rows_out.push(r?);
    }
    let cosine_wins = rows_out.iter().filter(|r| r.winner == "cosine").count();
    let euclidean_wins = rows_out.iter().filter(|r| r.winner == "euclidean").count();
    let ties = rows_out.len() - cosine_wins - euclidean_wins;

    let mut csv = String::from("seed,cosine_final_mean_cosine,euclidean_final_mean_cosine,winner\n");
    for r in &rows_out {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.seed, r.cosine_final_mean_cosine, r.euclidean_final_mean_cosine, r.winner
        ));
    }
    let csv_path = out.join("compare.csv");
    write_file(&csv_path, &csv)?;

    let summary = CompareSummary {
        rows: rows_out,
        cosine_wins,
        euclidean_wins,
        ties,
    };
    let json_path = out.join("compare.json");
    write_file(
        &json_path,
        &serde_json::to_string_pretty(&summary).expect("summary serialize"),
    )?;

    let mut manifest = RunManifest::new(
        "compare",
        *config.seeds.first().unwrap_or(&0),
        serde_json::to_value(config).expect("config serializes"),
    );
    manifest.record_input("features", features);
    manifest.record_output("compare_csv", &csv_path)?;
    manifest.record_output("compare_json", &json_path)?;
    manifest.save(out)?;
    Ok(manifest)
}

// --------------------------------------------------------------- replay ---

/// Re-execute a recorded run into `out`. The manifest's resolved
/// configuration and recorded input paths drive the run, so outputs (and
/// their hashes) come out identical for identical inputs.
pub fn cmd_replay(manifest_path: &Path, out: &Path) -> Result<RunManifest, CliError> {
    let manifest = RunManifest::load(manifest_path)?;
    let missing_input = |name: &str| {
        CliError::Data(format!(
            "{}: manifest lacks required input {name:?}",
            manifest_path.display()
        ))
    };
    match manifest.command.as_str() {
        "synth" => {
            let config: SynthConfig = serde_json::from_value(manifest.config.clone())
                .map_err(|e| CliError::Data(format!("manifest config: {e}")))?;
            run_synth(&config, out)
        }
        "features" => {
            let config: FeaturesConfig = serde_json::from_value(manifest.config.clone())
                .map_err(|e| CliError::Data(format!("manifest config: {e}")))?;
            let returns = manifest.inputs.get("returns").ok_or_else(|| missing_input("returns"))?;
            run_features(returns, &config, out)
        }
        "train" => {
            let config: TrainConfig = serde_json::from_value(manifest.config.clone())
                .map_err(|e| CliError::Data(format!("manifest config: {e}")))?;
            let features = manifest
                .inputs
                .get("features")
                .ok_or_else(|| missing_input("features"))?;
            run_train(features, &config, manifest.inputs.get("resume").map(|p| p.as_path()), out)
        }
        "score" => {
            let checkpoint = manifest
                .inputs
                .get("checkpoint")
                .ok_or_else(|| missing_input("checkpoint"))?;
            let features = manifest
                .inputs
                .get("features")
                .ok_or_else(|| missing_input("features"))?;
            run_score(
                checkpoint,
                features,
                manifest.inputs.get("labels").map(|p| p.as_path()),
                out,
            )
        }
        "compare" => {
            let config: CompareConfig = serde_json::from_value(manifest.config.clone())
                .map_err(|e| CliError::Data(format!("manifest config: {e}")))?;
            let features = manifest
                .inputs
                .get("features")
                .ok_or_else(|| missing_input("features"))?;
            run_compare(features, &config, out)
        }
        other => Err(CliError::Usage(format!("unknown command in manifest: {other:?}"))),
    }
}

/// Final-epoch metrics from a metrics JSONL file.
pub fn last_metrics_line(metrics_path: &Path) -> Result<EpochMetrics, CliError> {
    let text = std::fs::read_to_string(metrics_path).map_err(|e| CliError::io(metrics_path, e))?;
    let line = text
        .lines()
        .rfind(|l| !l.trim().is_empty())
        .ok_or_else(|| CliError::Data(format!("{}: no metrics", metrics_path.display())))?;
    serde_json::from_str(line).map_err(|e| CliError::Data(format!("metrics parse: {e}")))
}
