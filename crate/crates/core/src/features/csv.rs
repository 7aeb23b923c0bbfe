//! Plain comma-separated readers and writers for the module's file formats.
//! Fields never contain commas or quoting; headers are exact and ordered.

use std::collections::HashSet;
use std::path::Path;

use super::{
    FeatureError, FeatureVector, MonthlyReturn, NormalizedFeatureVector, Period, TaxpayerSeries,
};

pub const RETURNS_HEADER: &str = "taxpayer_id,period,total_sales,total_purchases,\
sgst_liability,cgst_liability,igst_liability,sgst_itc,cgst_itc,igst_itc,sgst_cash_paid";

pub const FEATURES_HEADER: &str =
    "taxpayer_id,corr1,corr2,corr3,corr4,corr5,corr6,ratio1,ratio2,ratio3,months_used";

fn parse_money(field: &str, name: &'static str, line: usize) -> Result<f64, FeatureError> {
    let value: f64 = field.parse().map_err(|_| FeatureError::Malformed {
        line,
        message: format!("field {name}: expected a number, got {field:?}"),
    })?;
    if !value.is_finite() || value < 0.0 {
        return Err(FeatureError::Malformed {
            line,
            message: format!("field {name}: money must be finite and >= 0, got {value}"),
        });
    }
    Ok(value)
}

/// Load and validate monthly returns; duplicate `(taxpayer, period)` keys
/// are rejected.
pub fn load_returns(path: &Path) -> Result<Vec<MonthlyReturn>, FeatureError> {
    let text = std::fs::read_to_string(path).map_err(|e| FeatureError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_returns(&text)
}

pub fn parse_returns(text: &str) -> Result<Vec<MonthlyReturn>, FeatureError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(FeatureError::Malformed {
        line: 1,
        message: "empty file".into(),
    })?;
    if header.trim_end() != RETURNS_HEADER {
        return Err(FeatureError::Malformed {
            line: 1,
            message: format!("unexpected header; expected {RETURNS_HEADER:?}"),
        });
    }
    let mut seen: HashSet<(String, Period)> = HashSet::new();
    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 11 {
            return Err(FeatureError::Malformed {
                line,
                message: format!("expected 11 fields, got {}", fields.len()),
            });
        }
        let taxpayer_id = fields[0].to_string();
        if taxpayer_id.is_empty() {
            return Err(FeatureError::Malformed {
                line,
                message: "empty taxpayer_id".into(),
            });
        }
        let period: Period = fields[1].parse().map_err(|_| FeatureError::Malformed {
            line,
            message: format!("field period: expected YYYY-MM, got {:?}", fields[1]),
        })?;
        if !seen.insert((taxpayer_id.clone(), period)) {
            return Err(FeatureError::DuplicateKey {
                taxpayer_id,
                period,
            });
        }
        records.push(MonthlyReturn {
            taxpayer_id,
            period,
            total_sales: parse_money(fields[2], "total_sales", line)?,
            total_purchases: parse_money(fields[3], "total_purchases", line)?,
            sgst_liability: parse_money(fields[4], "sgst_liability", line)?,
            cgst_liability: parse_money(fields[5], "cgst_liability", line)?,
            igst_liability: parse_money(fields[6], "igst_liability", line)?,
            sgst_itc: parse_money(fields[7], "sgst_itc", line)?,
            cgst_itc: parse_money(fields[8], "cgst_itc", line)?,
            igst_itc: parse_money(fields[9], "igst_itc", line)?,
            sgst_cash_paid: parse_money(fields[10], "sgst_cash_paid", line)?,
        });
    }
    Ok(records)
}

/// Load returns and group them into per-taxpayer series.
pub fn load_series(path: &Path) -> Result<Vec<TaxpayerSeries>, FeatureError> {
    super::group_into_series(load_returns(path)?)
}

pub fn returns_to_csv(records: &[MonthlyReturn]) -> String {
    let mut out = String::from(RETURNS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.taxpayer_id,
            r.period,
            r.total_sales,
            r.total_purchases,
            r.sgst_liability,
            r.cgst_liability,
            r.igst_liability,
            r.sgst_itc,
            r.cgst_itc,
            r.igst_itc,
            r.sgst_cash_paid,
        ));
    }
    out
}

pub fn features_to_csv(rows: &[FeatureVector]) -> String {
    let mut out = String::from(FEATURES_HEADER);
    out.push('\n');
    for fv in rows {
        let r = fv.as_row();
        out.push_str(&fv.taxpayer_id);
        for v in r {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push_str(&format!(",{}\n", fv.months_used));
    }
    out
}

pub fn normalized_to_csv(rows: &[NormalizedFeatureVector]) -> String {
    let mut out = String::from(FEATURES_HEADER);
    out.push('\n');
    for fv in rows {
        out.push_str(&fv.taxpayer_id);
        for v in fv.values {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push_str(&format!(",{}\n", fv.months_used));
    }
    out
}

/// Read a feature CSV (raw or normalized — the schema is shared) back into
/// id-tagged nine-dimensional rows.
pub fn parse_feature_rows(text: &str) -> Result<Vec<NormalizedFeatureVector>, FeatureError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(FeatureError::Malformed {
        line: 1,
        message: "empty file".into(),
    })?;
    if header.trim_end() != FEATURES_HEADER {
        return Err(FeatureError::Malformed {
            line: 1,
            message: format!("unexpected header; expected {FEATURES_HEADER:?}"),
        });
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 11 {
            return Err(FeatureError::Malformed {
                line,
                message: format!("expected 11 fields, got {}", fields.len()),
            });
        }
        let mut values = [0.0; 9];
        for (i, v) in values.iter_mut().enumerate() {
            *v = fields[i + 1].parse().map_err(|_| FeatureError::Malformed {
                line,
                message: format!("column {}: expected a number, got {:?}", i + 2, fields[i + 1]),
            })?;
        }
        let months_used = fields[10].parse().map_err(|_| FeatureError::Malformed {
            line,
            message: format!("field months_used: expected a count, got {:?}", fields[10]),
        })?;
        rows.push(NormalizedFeatureVector {
            taxpayer_id: fields[0].to_string(),
            values,
            months_used,
        });
    }
    Ok(rows)
}

pub fn load_feature_rows(path: &Path) -> Result<Vec<NormalizedFeatureVector>, FeatureError> {
    let text = std::fs::read_to_string(path).map_err(|e| FeatureError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_feature_rows(&text)
}
