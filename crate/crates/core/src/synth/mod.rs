//! Seeded synthetic taxpayer generator with injected fraud signatures, for
//! desk-scale end-to-end runs. Genuine dealers file returns whose liability
//! tracks sales, settle a stable share of SGST in cash and hold a healthy
//! interstate ITC share. The three fraud recipes each break one of the
//! signals the features are built to see:
//!
//! - `IntraStateItcShift`: nearly all ITC claimed intra-state, so the
//!   IGST-ITC share collapses.
//! - `NoCashSettlement`: zero SGST paid in cash regardless of turnover, so
//!   the cash-vs-liability and cash-vs-sales correlations die.
//! - `DecorrelatedLiability`: reported liability drifts independently of
//!   (and below) actual sales.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{MonthlyReturn, Period};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FraudRecipe {
    IntraStateItcShift,
    NoCashSettlement,
    DecorrelatedLiability,
}

/// Relative weights of the fraud recipes among fraud taxpayers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FraudMix {
    pub intra_state_itc_shift: f64,
    pub no_cash_settlement: f64,
    pub decorrelated_liability: f64,
}

impl Default for FraudMix {
    fn default() -> Self {
        Self {
            intra_state_itc_shift: 1.0 / 3.0,
            no_cash_settlement: 1.0 / 3.0,
            decorrelated_liability: 1.0 / 3.0,
        }
    }
}

impl FraudMix {
    fn weights(&self) -> [(FraudRecipe, f64); 3] {
        [
            (FraudRecipe::IntraStateItcShift, self.intra_state_itc_shift),
            (FraudRecipe::NoCashSettlement, self.no_cash_settlement),
            (FraudRecipe::DecorrelatedLiability, self.decorrelated_liability),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_genuine: usize,
    pub n_fraud: usize,
    pub months: usize,
    pub seed: u64,
    pub fraud_mix: FraudMix,
    /// First filing period of the window.
    pub start_year: u16,
    pub start_month: u8,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_genuine: 1000,
            n_fraud: 60,
            months: 24,
            seed: 0,
            fraud_mix: FraudMix::default(),
            start_year: 2017,
            start_month: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        // shorter windows would be excluded wholesale by feature derivation
        if self.months < crate::features::DEFAULT_MIN_MONTHS {
            return Err(SynthError::InvalidConfig(format!(
                "months must be >= {}, got {}",
                crate::features::DEFAULT_MIN_MONTHS,
                self.months
            )));
        }
        if !(1..=12).contains(&self.start_month) {
            return Err(SynthError::InvalidConfig(format!(
                "start_month must be 1..=12, got {}",
                self.start_month
            )));
        }
        let weights = self.fraud_mix.weights();
        if weights.iter().any(|(_, w)| *w < 0.0 || !w.is_finite()) {
            return Err(SynthError::InvalidConfig(
                "fraud mix weights must be finite and >= 0".into(),
            ));
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SynthError::InvalidConfig(format!(
                "fraud mix weights must sum to 1, got {total}"
            )));
        }
        Ok(())
    }
}

/// Per-taxpayer ground truth, kept apart from the returns so labels never
/// ride along into the feature pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxpayerLabel {
    pub taxpayer_id: String,
    pub is_fraud: bool,
    pub recipe: Option<FraudRecipe>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub returns: Vec<MonthlyReturn>,
    pub labels: Vec<TaxpayerLabel>,
}

impl SynthDataset {
    /// `taxpayer_id,is_fraud` only; recipes stay out of the artifact.
    pub fn labels_to_csv(&self) -> String {
        let mut out = String::from("taxpayer_id,is_fraud\n");
        for l in &self.labels {
            out.push_str(&format!("{},{}\n", l.taxpayer_id, l.is_fraud));
        }
        out
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Independent per-taxpayer stream, so generation stays deterministic even
/// if taxpayers are produced in parallel.
fn taxpayer_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn apportion(weights: &[(FraudRecipe, f64)], total: usize) -> Vec<(FraudRecipe, usize)> {
    // largest-remainder rounding so recipe counts sum exactly to `total`
    let raw: Vec<f64> = weights.iter().map(|(_, w)| w * total as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut short = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for idx in order {
        if short == 0 {
            break;
        }
        counts[idx] += 1;
        short -= 1;
    }
    weights
        .iter()
        .zip(counts)
        .map(|(&(recipe, _), c)| (recipe, c))
        .collect()
}

struct TaxpayerProfile {
    base_turnover: f64,
    value_add: f64,
    tax_rate: f64,
    igst_liability_share: f64,
    igst_itc_share: f64,
    cash_share: f64,
}

impl TaxpayerProfile {
    fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            base_turnover: (13.0 + 0.8 * normal(rng)).exp(),
            // log-normal value addition: most dealers near 1.1-1.3, a
            // right tail of high-margin ones
            value_add: 1.02 + (-1.9 + 0.5 * normal(rng)).exp(),
            tax_rate: 0.05 + 0.13 * rng.random::<f64>(),
            igst_liability_share: 0.2 + 0.4 * rng.random::<f64>(),
            igst_itc_share: 0.25 + 0.5 * rng.random::<f64>(),
            cash_share: 0.2 + 0.3 * rng.random::<f64>(),
        }
    }
}

fn money(v: f64) -> f64 {
    v.max(0.0).round()
}

fn generate_taxpayer(
    taxpayer_id: &str,
    recipe: Option<FraudRecipe>,
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<MonthlyReturn> {
    let mut profile = TaxpayerProfile::draw(rng);
    if recipe == Some(FraudRecipe::IntraStateItcShift) {
        // purchases declared almost entirely intra-state
        profile.igst_itc_share = 0.02 * rng.random::<f64>();
    }

    let mut period = Period::new(config.start_year, config.start_month).expect("valid start");
    let mut returns = Vec::with_capacity(config.months);
    for _ in 0..config.months {
        let sales = profile.base_turnover * (1.0 + 0.15 * normal(rng)).max(0.05);
        let purchases = sales / profile.value_add * (1.0 + 0.10 * normal(rng)).max(0.05);

        let liability = match recipe {
            Some(FraudRecipe::DecorrelatedLiability) => {
                // reported low and independent of this month's sales
                0.5 * profile.tax_rate
                    * profile.base_turnover
                    * (1.0 + 0.6 * normal(rng)).max(0.02)
            }
            _ => profile.tax_rate * sales * (1.0 + 0.05 * normal(rng)).max(0.05),
        };
        let igst_liability = profile.igst_liability_share * liability;
        let state_liability = (liability - igst_liability) / 2.0;

        let itc = profile.tax_rate * purchases * (1.0 + 0.05 * normal(rng)).max(0.05);
        let igst_itc = profile.igst_itc_share * itc;
        let state_itc = (itc - igst_itc) / 2.0;

        let sgst_cash = match recipe {
            Some(FraudRecipe::NoCashSettlement) => 0.0,
            _ => profile.cash_share * state_liability * (1.0 + 0.10 * normal(rng)).max(0.0),
        };

        returns.push(MonthlyReturn {
            taxpayer_id: taxpayer_id.to_string(),
            period,
            total_sales: money(sales),
            total_purchases: money(purchases),
            sgst_liability: money(state_liability),
            cgst_liability: money(state_liability),
            igst_liability: money(igst_liability),
            sgst_itc: money(state_itc),
            cgst_itc: money(state_itc),
            igst_itc: money(igst_itc),
            sgst_cash_paid: money(sgst_cash),
        });
        period = period.next();
    }
    returns
}

/// Generate the full dataset. Taxpayer ids are neutral (`T00001`, ...) and
/// fraud status is assigned by a seeded shuffle, so nothing about an id
/// leaks its label.
pub fn generate(config: &SynthConfig) -> Result<SynthDataset, SynthError> {
    config.validate()?;
    let total = config.n_genuine + config.n_fraud;

    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut assignment: Vec<Option<FraudRecipe>> = Vec::with_capacity(total);
    for (recipe, count) in apportion(&config.fraud_mix.weights(), config.n_fraud) {
        assignment.extend(std::iter::repeat_n(Some(recipe), count));
    }
    assignment.resize(total, None);
    use rand::seq::SliceRandom;
    assignment.shuffle(&mut master);

    let width = total.max(1).ilog10() as usize + 1;
    let mut returns = Vec::with_capacity(total * config.months);
    let mut labels = Vec::with_capacity(total);
    for (index, recipe) in assignment.into_iter().enumerate() {
        let taxpayer_id = format!("T{:0width$}", index + 1, width = width.max(5));
        let mut rng = taxpayer_rng(config.seed, index as u64);
        returns.extend(generate_taxpayer(&taxpayer_id, recipe, config, &mut rng));
        labels.push(TaxpayerLabel {
            taxpayer_id,
            is_fraud: recipe.is_some(),
            recipe,
        });
    }
    Ok(SynthDataset { returns, labels })
}
