//! Daily series, period deficits, per-capita counts, distributions and the
//! two-sample tests used to compare periods.

mod distribution;
mod series;
pub mod special;
mod stats;

pub use distribution::{
    category_proportions, category_proportions_of, median, salary_distribution, salary_distribution_of, CategoryAxis,
    CategoryDistribution, HistogramBin, SalaryDistribution,
};
pub use series::{
    compare_counts, daily_counts, deficit, per_capita, period_deficit, region_counts, zero_filled, DailySeries,
    PeriodComparison,
};
pub use stats::{chi_square_test, ks_statistic, ks_two_sample, t_test, welch_t_test, StatTest, StatTestResult, TTestKind};

use chrono::NaiveDate;
use thiserror::Error;

use crate::store::StoreError;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("invalid date range: {from} > {to}")]
    InvalidRange { from: NaiveDate, to: NaiveDate },
    #[error("baseline period has zero ads")]
    ZeroBaseline,
    #[error("region {0} has no population")]
    MissingPopulation(String),
    #[error("both samples have zero variance")]
    DegenerateSample,
    #[error("sample too small: need {needed}, got {got}")]
    SampleTooSmall { needed: usize, got: usize },
    #[error("expected count is zero at row {row}, column {col}")]
    ZeroExpected { row: usize, col: usize },
    #[error("contingency table must be rectangular and at least 2x2, got {rows}x{cols}")]
    BadTable { rows: usize, cols: usize },
    #[error(transparent)]
    Store(#[from] StoreError),
}
