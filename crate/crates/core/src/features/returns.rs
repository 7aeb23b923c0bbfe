use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FeatureError;

/// A calendar month, parsed from and rendered as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Period {
    pub year: u16,
    pub month: u8,
}

impl Period {
    pub fn new(year: u16, month: u8) -> Result<Self, FeatureError> {
        if !(1..=12).contains(&month) {
            return Err(FeatureError::InvalidPeriod(format!("{year}-{month:02}")));
        }
        Ok(Self { year, month })
    }

    /// The following calendar month.
    pub fn next(self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Period {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FeatureError::InvalidPeriod(s.to_string());
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year: u16 = y.parse().map_err(|_| bad())?;
        let month: u8 = m.parse().map_err(|_| bad())?;
        Period::new(year, month)
    }
}

/// One taxpayer-month of summarized return figures. All money fields are
/// non-negative and finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyReturn {
    pub taxpayer_id: String,
    pub period: Period,
    pub total_sales: f64,
    pub total_purchases: f64,
    pub sgst_liability: f64,
    pub cgst_liability: f64,
    pub igst_liability: f64,
    pub sgst_itc: f64,
    pub cgst_itc: f64,
    pub igst_itc: f64,
    pub sgst_cash_paid: f64,
}

impl MonthlyReturn {
    /// SGST + CGST + IGST liability.
    pub fn total_liability(&self) -> f64 {
        self.sgst_liability + self.cgst_liability + self.igst_liability
    }

    /// SGST + CGST + IGST input tax credit.
    pub fn total_itc(&self) -> f64 {
        self.sgst_itc + self.cgst_itc + self.igst_itc
    }

    pub(crate) fn money_fields(&self) -> [(&'static str, f64); 9] {
        [
            ("total_sales", self.total_sales),
            ("total_purchases", self.total_purchases),
            ("sgst_liability", self.sgst_liability),
            ("cgst_liability", self.cgst_liability),
            ("igst_liability", self.igst_liability),
            ("sgst_itc", self.sgst_itc),
            ("cgst_itc", self.cgst_itc),
            ("igst_itc", self.igst_itc),
            ("sgst_cash_paid", self.sgst_cash_paid),
        ]
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        for (name, value) in self.money_fields() {
            if !value.is_finite() || value < 0.0 {
                return Err(FeatureError::NegativeMoney {
                    taxpayer_id: self.taxpayer_id.clone(),
                    field: name,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// A single taxpayer's returns in strictly increasing period order, one
/// entry per period.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxpayerSeries {
    taxpayer_id: String,
    returns: Vec<MonthlyReturn>,
}

impl TaxpayerSeries {
    /// Sorts by period and rejects duplicate periods, so callers may hand
    /// records over in any order.
    pub fn new(taxpayer_id: String, mut returns: Vec<MonthlyReturn>) -> Result<Self, FeatureError> {
        returns.sort_by_key(|r| r.period);
        for pair in returns.windows(2) {
            if pair[0].period == pair[1].period {
                return Err(FeatureError::DuplicateKey {
                    taxpayer_id: taxpayer_id.clone(),
                    period: pair[0].period,
                });
            }
        }
        Ok(Self {
            taxpayer_id,
            returns,
        })
    }

    pub fn taxpayer_id(&self) -> &str {
        &self.taxpayer_id
    }

    pub fn returns(&self) -> &[MonthlyReturn] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Group loose records into per-taxpayer series, ordered by taxpayer id.
pub fn group_into_series(records: Vec<MonthlyReturn>) -> Result<Vec<TaxpayerSeries>, FeatureError> {
    let mut by_id: std::collections::BTreeMap<String, Vec<MonthlyReturn>> =
        std::collections::BTreeMap::new();
    for r in records {
        by_id.entry(r.taxpayer_id.clone()).or_default().push(r);
    }
    by_id
        .into_iter()
        .map(|(id, rs)| TaxpayerSeries::new(id, rs))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ret(id: &str, period: &str) -> MonthlyReturn {
        MonthlyReturn {
            taxpayer_id: id.into(),
            period: period.parse().unwrap(),
            total_sales: 100.0,
            total_purchases: 80.0,
            sgst_liability: 2.0,
            cgst_liability: 2.0,
            igst_liability: 1.0,
            sgst_itc: 1.0,
            cgst_itc: 1.0,
            igst_itc: 0.5,
            sgst_cash_paid: 1.0,
        }
    }

    #[test]
    fn period_parse_and_display_roundtrip() {
        let p: Period = "2021-07".parse().unwrap();
        assert_eq!(p, Period::new(2021, 7).unwrap());
        assert_eq!(p.to_string(), "2021-07");
        assert!("2021-13".parse::<Period>().is_err());
        assert!("21-07".parse::<Period>().is_err());
        assert!("2021/07".parse::<Period>().is_err());
    }

    #[test]
    fn series_sorts_and_rejects_duplicates() {
        let series = TaxpayerSeries::new(
            "T1".into(),
            vec![ret("T1", "2021-03"), ret("T1", "2021-01"), ret("T1", "2021-02")],
        )
        .unwrap();
        let periods: Vec<String> = series.returns().iter().map(|r| r.period.to_string()).collect();
        assert_eq!(periods, ["2021-01", "2021-02", "2021-03"]);

        let dup = TaxpayerSeries::new("T1".into(), vec![ret("T1", "2021-01"), ret("T1", "2021-01")]);
        assert!(matches!(dup, Err(FeatureError::DuplicateKey { .. })));
    }

    #[test]
    fn negative_money_rejected() {
        let mut r = ret("T1", "2021-01");
        r.igst_itc = -3.0;
        assert!(matches!(r.validate(), Err(FeatureError::NegativeMoney { field: "igst_itc", .. })));
    }
}
