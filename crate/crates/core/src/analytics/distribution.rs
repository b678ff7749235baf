use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::ingest::{ContractType, EmploymentMode};
use crate::store::{AdRecordRow, QueryFilter, Store};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoryAxis {
    Contract,
    Mode,
}

impl CategoryAxis {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "contract" => Some(Self::Contract),
            "mode" => Some(Self::Mode),
            _ => None,
        }
    }

    /// Known category names for this axis, `Unknown` excluded.
    pub fn categories(self) -> Vec<&'static str> {
        match self {
            Self::Contract => ContractType::ALL
                .iter()
                .filter(|c| **c != ContractType::Unknown)
                .map(|c| c.as_str())
                .collect(),
            Self::Mode => EmploymentMode::ALL
                .iter()
                .filter(|m| **m != EmploymentMode::Unknown)
                .map(|m| m.as_str())
                .collect(),
        }
    }

    /// Category of a row, `None` when unknown.
    pub fn category_of(self, row: &AdRecordRow) -> Option<&'static str> {
        match self {
            Self::Contract => (row.ad.contract_type != ContractType::Unknown).then(|| row.ad.contract_type.as_str()),
            Self::Mode => (row.ad.employment_mode != EmploymentMode::Unknown).then(|| row.ad.employment_mode.as_str()),
        }
    }
}

/// Counts and shares per category; `Unknown` is counted but kept out of the shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    pub axis: CategoryAxis,
    pub counts: BTreeMap<String, u64>,
    pub proportions: BTreeMap<String, f64>,
    pub unknown: u64,
    pub total: u64,
}

pub fn category_proportions_of<'a, I>(rows: I, axis: CategoryAxis) -> CategoryDistribution
where
    I: IntoIterator<Item = &'a AdRecordRow>,
{
    let mut counts: BTreeMap<String, u64> = axis.categories().into_iter().map(|c| (c.to_string(), 0)).collect();
    let mut unknown = 0;
    for row in rows {
        match axis.category_of(row) {
            Some(c) => *counts.entry(c.to_string()).or_default() += 1,
            None => unknown += 1,
        }
    }
    let known: u64 = counts.values().sum();
    let proportions = if known == 0 {
        BTreeMap::new()
    } else {
        counts
            .iter()
            .filter(|(_, n)| **n > 0)
            .map(|(c, n)| (c.clone(), *n as f64 / known as f64))
            .collect()
    };
    CategoryDistribution {
        axis,
        counts,
        proportions,
        unknown,
        total: known + unknown,
    }
}

pub fn category_proportions(
    store: &Store,
    filter: &QueryFilter,
    axis: CategoryAxis,
) -> Result<CategoryDistribution, AnalyticsError> {
    Ok(category_proportions_of(&store.query(filter)?, axis))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

/// Yearly minimum salaries of matching ads with summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalaryDistribution {
    pub n: usize,
    /// Ads without a minimum salary.
    pub excluded: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Middle value of sorted data; the mean of the central pair for even length.
pub fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    }
}

impl SalaryDistribution {
    pub fn from_values(mut values: Vec<f64>, excluded: usize) -> Self {
        values.retain(|v| v.is_finite());
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
        Self {
            n,
            excluded,
            mean,
            median: median(&values),
            min: values.first().copied(),
            max: values.last().copied(),
            values,
        }
    }

    /// Fixed-width bins starting at the multiple of `width` at or below the minimum.
    pub fn histogram(&self, width: f64) -> Vec<HistogramBin> {
        let (Some(min), Some(max)) = (self.min, self.max) else {
            return Vec::new();
        };
        if !(width > 0.0) {
            return Vec::new();
        }
        let start = (min / width).floor() * width;
        let nbins = (((max - start) / width).floor() as usize) + 1;
        let mut bins: Vec<HistogramBin> = (0..nbins)
            .map(|i| HistogramBin {
                lower: start + i as f64 * width,
                upper: start + (i + 1) as f64 * width,
                count: 0,
            })
            .collect();
        for v in &self.values {
            let i = (((v - start) / width).floor() as usize).min(nbins - 1);
            bins[i].count += 1;
        }
        bins
    }
}

pub fn salary_distribution_of<'a, I>(rows: I) -> SalaryDistribution
where
    I: IntoIterator<Item = &'a AdRecordRow>,
{
    let mut values = Vec::new();
    let mut excluded = 0;
    for row in rows {
        match row.ad.yearly_min_salary {
            Some(v) => values.push(v),
            None => excluded += 1,
        }
    }
    SalaryDistribution::from_values(values, excluded)
}

pub fn salary_distribution(store: &Store, filter: &QueryFilter) -> Result<SalaryDistribution, AnalyticsError> {
    Ok(salary_distribution_of(&store.query(filter)?))
}
