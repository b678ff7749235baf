use std::collections::BTreeMap;
use std::fmt::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::geoloc::{canonical_region_code, RegionSet};
use crate::scalar::Scalar;
use crate::store::{QueryFilter, Store};

/// Per-day counts over `[from, to)` with every day present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub filter: QueryFilter,
    pub points: Vec<(NaiveDate, u64)>,
}

impl DailySeries {
    pub fn total(&self) -> u64 {
        self.points.iter().map(|p| p.1).sum()
    }

    /// `date,count` table with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,count\n");
        for (d, n) in &self.points {
            let _ = writeln!(out, "{d},{n}");
        }
        out
    }
}

/// Lays sparse day counts onto `[from, to)`, filling gaps with zero.
pub fn zero_filled(
    counts: &BTreeMap<NaiveDate, u64>,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<Vec<(NaiveDate, u64)>, AnalyticsError> {
    if from > to {
        return Err(AnalyticsError::InvalidRange { from, to });
    }
    Ok(from
        .iter_days()
        .take_while(|d| *d < to)
        .map(|d| (d, counts.get(&d).copied().unwrap_or(0)))
        .collect())
}

fn intersect(filter: &QueryFilter, from: NaiveDate, to: NaiveDate) -> QueryFilter {
    let mut f = filter.clone();
    f.date_range = Some(match filter.date_range {
        Some((s, e)) => {
            let (s, e) = (s.max(from), e.min(to));
            (s, e.max(s))
        }
        None => (from, to),
    });
    f
}

/// Daily counts of ads matching `filter` over `[from, to)`. Days outside the
/// filter's own date clause count as zero.
pub fn daily_counts(
    store: &Store,
    filter: &QueryFilter,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<DailySeries, AnalyticsError> {
    if from > to {
        return Err(AnalyticsError::InvalidRange { from, to });
    }
    let counts = store.count_by_day(&intersect(filter, from, to))?;
    Ok(DailySeries {
        filter: filter.clone(),
        points: zero_filled(&counts, from, to)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodComparison {
    pub period_a: (NaiveDate, NaiveDate),
    pub period_b: (NaiveDate, NaiveDate),
    pub count_a: u64,
    pub count_b: u64,
    /// `(count_a - count_b) / count_a`.
    pub deficit_fraction: f64,
}

/// Relative shortfall of `count_b` against `count_a`.
pub fn deficit(count_a: u64, count_b: u64) -> Result<f64, AnalyticsError> {
    if count_a == 0 {
        return Err(AnalyticsError::ZeroBaseline);
    }
    Ok((count_a as f64 - count_b as f64) / count_a as f64)
}

/// Deficit between two already-counted periods.
pub fn compare_counts(
    period_a: (NaiveDate, NaiveDate),
    count_a: u64,
    period_b: (NaiveDate, NaiveDate),
    count_b: u64,
) -> Result<PeriodComparison, AnalyticsError> {
    for (from, to) in [period_a, period_b] {
        if from >= to {
            return Err(AnalyticsError::InvalidRange { from, to });
        }
    }
    Ok(PeriodComparison {
        period_a,
        period_b,
        count_a,
        count_b,
        deficit_fraction: deficit(count_a, count_b)?,
    })
}

pub fn period_deficit(
    store: &Store,
    filter: &QueryFilter,
    period_a: (NaiveDate, NaiveDate),
    period_b: (NaiveDate, NaiveDate),
) -> Result<PeriodComparison, AnalyticsError> {
    for (from, to) in [period_a, period_b] {
        if from >= to {
            return Err(AnalyticsError::InvalidRange { from, to });
        }
    }
    let count_a = store.count(&intersect(filter, period_a.0, period_a.1))?;
    let count_b = store.count(&intersect(filter, period_b.0, period_b.1))?;
    compare_counts(period_a, count_a, period_b, count_b)
}

/// Ads per person for every region in `regions`. Counts keyed by a code
/// the set does not know, or regions with no population, are errors.
pub fn per_capita<T: Scalar>(
    region_counts: &BTreeMap<String, u64>,
    regions: &RegionSet<T>,
) -> Result<BTreeMap<String, f64>, AnalyticsError> {
    let mut merged: BTreeMap<String, u64> = BTreeMap::new();
    for (code, n) in region_counts {
        let code = canonical_region_code(code);
        if regions.by_code(code).is_none() {
            return Err(AnalyticsError::MissingPopulation(code.to_string()));
        }
        *merged.entry(code.to_string()).or_default() += n;
    }
    regions
        .regions()
        .iter()
        .map(|r| {
            if r.population == 0 {
                return Err(AnalyticsError::MissingPopulation(r.code.clone()));
            }
            let n = merged.get(&r.code).copied().unwrap_or(0);
            Ok((r.code.clone(), n as f64 / r.population as f64))
        })
        .collect()
}

/// Matching-ad counts per region code (unassigned ads omitted).
pub fn region_counts(store: &Store, filter: &QueryFilter) -> Result<BTreeMap<String, u64>, AnalyticsError> {
    let mut out = BTreeMap::new();
    for row in store.query(filter)? {
        if let Some(code) = row.region_code {
            *out.entry(canonical_region_code(&code).to_string()).or_default() += 1;
        }
    }
    Ok(out)
}
