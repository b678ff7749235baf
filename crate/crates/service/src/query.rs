//! Request parameters and response bodies shared by the CLI and the HTTP API,
//! so both surfaces compute identical results for identical filters.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::Serialize;
use vacobs_core::analytics::{
    self, category_proportions_of, chi_square_test, ks_two_sample, salary_distribution_of, welch_t_test,
    CategoryAxis, CategoryDistribution, DailySeries, HistogramBin, PeriodComparison, SalaryDistribution,
};
use vacobs_core::classify::{top_terms, TermScope};
use vacobs_core::ingest::{ContractType, EmploymentMode};
use vacobs_core::store::{AdRecordRow, QueryFilter, Store};
use vacobs_core::TestResult;

use crate::data::GeoData;

pub const MAX_LIMIT: usize = 10_000;
pub const DEFAULT_LIMIT: usize = 1_000;
pub const DEFAULT_TOP_TERMS: usize = 20;
pub const DEFAULT_BIN_WIDTH: f64 = 5_000.0;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ParamError {
    #[error("unknown parameter {0:?}")]
    Unknown(String),
    #[error("bad value for {name}: {value:?}")]
    BadValue { name: String, value: String },
    #[error("missing parameter {0:?}")]
    Missing(String),
    #[error("{0}")]
    Invalid(String),
}

/// Filter clauses as given by a caller, before region names are resolved.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FilterParams {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub label: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub region: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub contract: Vec<ContractType>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mode: Vec<EmploymentMode>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub exclude_employer: Vec<String>,
}

pub const FILTER_KEYS: [&str; 7] = ["label", "region", "from", "to", "contract", "mode", "exclude_employer"];

pub fn parse_date_param(name: &str, value: &str) -> Result<NaiveDate, ParamError> {
    value.trim().parse().map_err(|_| ParamError::BadValue {
        name: name.into(),
        value: value.into(),
    })
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Key/value pairs with the filter keys consumed and the rest kept for the
/// endpoint to interpret. Keys outside `FILTER_KEYS` and `extra` are errors.
#[derive(Debug, Clone, Default)]
pub struct Params {
    pub filter: FilterParams,
    pub extra: BTreeMap<String, String>,
}

impl Params {
    pub fn parse(pairs: &[(String, String)], extra_keys: &[&str]) -> Result<Self, ParamError> {
        let mut f = FilterParams::default();
        let mut extra = BTreeMap::new();
        for (k, v) in pairs {
            match k.as_str() {
                "label" => f.label.extend(split_list(v).map(str::to_string)),
                "region" => f.region.extend(split_list(v).map(str::to_string)),
                "from" => f.from = Some(parse_date_param(k, v)?),
                "to" => f.to = Some(parse_date_param(k, v)?),
                "contract" => {
                    for c in split_list(v) {
                        f.contract.push(ContractType::parse(c).ok_or_else(|| ParamError::BadValue {
                            name: k.clone(),
                            value: c.into(),
                        })?);
                    }
                }
                "mode" => {
                    for m in split_list(v) {
                        f.mode.push(EmploymentMode::parse(m).ok_or_else(|| ParamError::BadValue {
                            name: k.clone(),
                            value: m.into(),
                        })?);
                    }
                }
                "exclude_employer" => f.exclude_employer.push(v.trim().to_string()),
                other if extra_keys.contains(&other) => {
                    if extra.insert(other.to_string(), v.clone()).is_some() {
                        return Err(ParamError::Invalid(format!("parameter {other:?} given twice")));
                    }
                }
                other => return Err(ParamError::Unknown(other.to_string())),
            }
        }
        f.validate()?;
        Ok(Self { filter: f, extra })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.extra.get(key).map(String::as_str)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ParamError> {
        self.get(key).map_or(Ok(default), |v| {
            v.trim().parse().map_err(|_| ParamError::BadValue {
                name: key.into(),
                value: v.into(),
            })
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ParamError> {
        self.get(key).map_or(Ok(default), |v| {
            v.trim()
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| ParamError::BadValue {
                    name: key.into(),
                    value: v.into(),
                })
        })
    }

    pub fn date(&self, key: &str) -> Result<NaiveDate, ParamError> {
        let v = self.get(key).ok_or_else(|| ParamError::Missing(key.into()))?;
        parse_date_param(key, v)
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if let (Some(from), Some(to)) = (self.from, self.to) {
            if from > to {
                return Err(ParamError::Invalid(format!("from {from} is after to {to}")));
            }
        }
        Ok(())
    }

    /// The store filter, with region names mapped to codes.
    pub fn query_filter(&self, geo: &GeoData) -> QueryFilter {
        let set = |v: &[String]| (!v.is_empty()).then(|| v.iter().cloned().collect::<BTreeSet<_>>());
        QueryFilter {
            labels: set(&self.label),
            region_codes: (!self.region.is_empty())
                .then(|| self.region.iter().map(|r| geo.region_code(r)).collect()),
            date_range: match (self.from, self.to) {
                (None, None) => None,
                (from, to) => Some((from.unwrap_or(NaiveDate::MIN), to.unwrap_or(NaiveDate::MAX))),
            },
            contract_types: (!self.contract.is_empty()).then(|| self.contract.iter().copied().collect()),
            modes: (!self.mode.is_empty()).then(|| self.mode.iter().copied().collect()),
            employer_excludes: set(&self.exclude_employer),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub date: NaiveDate,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesBody {
    pub filter: QueryFilter,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub total: u64,
    pub points: Vec<SeriesPoint>,
}

impl SeriesBody {
    pub fn to_csv(&self) -> String {
        DailySeries {
            filter: self.filter.clone(),
            points: self.points.iter().map(|p| (p.date, p.count)).collect(),
        }
        .to_csv()
    }
}

/// Daily counts over `[from, to)`; open ends default to the first and last
/// posting day among matching ads.
pub fn series(store: &Store, geo: &GeoData, f: &FilterParams) -> anyhow::Result<SeriesBody> {
    let filter = f.query_filter(geo);
    let bounds = match (f.from, f.to) {
        (Some(a), Some(b)) => Some((a, b)),
        (a, b) => store
            .date_bounds(&filter)?
            .map(|(lo, hi)| (a.unwrap_or(lo), b.unwrap_or(hi + chrono::Duration::days(1)))),
    };
    let (from, to, points) = match bounds {
        Some((from, to)) if from <= to => {
            let s = analytics::daily_counts(store, &filter, from, to)?;
            (Some(from), Some(to), s.points)
        }
        Some((from, to)) => (Some(from), Some(to), Vec::new()),
        None => (f.from, f.to, Vec::new()),
    };
    Ok(SeriesBody {
        filter,
        from,
        to,
        total: points.iter().map(|p| p.1).sum(),
        points: points.into_iter().map(|(date, count)| SeriesPoint { date, count }).collect(),
    })
}

/// A test outcome or the reason it could not be run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TestOutcome {
    Ran(TestResult),
    Skipped { skipped: String },
}

impl From<Result<TestResult, analytics::AnalyticsError>> for TestOutcome {
    fn from(r: Result<TestResult, analytics::AnalyticsError>) -> Self {
        match r {
            Ok(t) => Self::Ran(t),
            Err(e) => Self::Skipped { skipped: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareBody {
    pub filter: QueryFilter,
    pub comparison: PeriodComparison,
    pub salary_welch: TestOutcome,
    pub salary_ks: TestOutcome,
    pub contract_chi_square: TestOutcome,
    pub mode_chi_square: TestOutcome,
}

/// Period × category table with all-zero columns dropped.
fn category_table(a: &CategoryDistribution, b: &CategoryDistribution) -> Vec<Vec<f64>> {
    let cols: Vec<&String> = a.counts.keys().filter(|k| a.counts[*k] + b.counts.get(*k).copied().unwrap_or(0) > 0).collect();
    [a, b]
        .iter()
        .map(|d| cols.iter().map(|k| d.counts.get(*k).copied().unwrap_or(0) as f64).collect())
        .collect()
}

fn salaries(rows: &[AdRecordRow]) -> Vec<f64> {
    rows.iter().filter_map(|r| r.ad.yearly_min_salary).collect()
}

/// Deficit between two half-open periods plus the salary, contract and mode
/// tests between them.
pub fn compare(
    store: &Store,
    geo: &GeoData,
    f: &FilterParams,
    period_a: (NaiveDate, NaiveDate),
    period_b: (NaiveDate, NaiveDate),
) -> anyhow::Result<CompareBody> {
    let filter = f.query_filter(geo);
    let comparison = analytics::period_deficit(store, &filter, period_a, period_b)?;
    let within = |(from, to): (NaiveDate, NaiveDate)| {
        let mut g = filter.clone();
        g.date_range = Some(match filter.date_range {
            Some((s, e)) => (s.max(from), e.min(to).max(s.max(from))),
            None => (from, to),
        });
        store.query(&g)
    };
    let rows_a = within(period_a)?;
    let rows_b = within(period_b)?;
    let (sa, sb) = (salaries(&rows_a), salaries(&rows_b));
    let table = |axis| {
        category_table(&category_proportions_of(&rows_a, axis), &category_proportions_of(&rows_b, axis))
    };
    Ok(CompareBody {
        filter,
        comparison,
        salary_welch: welch_t_test(&sa, &sb).into(),
        salary_ks: ks_two_sample(&sa, &sb).into(),
        contract_chi_square: chi_square_test(&table(CategoryAxis::Contract)).into(),
        mode_chi_square: chi_square_test(&table(CategoryAxis::Mode)).into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SalaryBody {
    pub filter: QueryFilter,
    #[serde(flatten)]
    pub distribution: SalaryDistribution,
    pub bin_width: f64,
    pub histogram: Vec<HistogramBin>,
}

pub fn salary(store: &Store, geo: &GeoData, f: &FilterParams, bin_width: f64) -> anyhow::Result<SalaryBody> {
    if !(bin_width > 0.0) {
        anyhow::bail!(ParamError::BadValue {
            name: "bin_width".into(),
            value: bin_width.to_string()
        });
    }
    let filter = f.query_filter(geo);
    let distribution = salary_distribution_of(&store.query(&filter)?);
    let histogram = distribution.histogram(bin_width);
    Ok(SalaryBody {
        filter,
        distribution,
        bin_width,
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionsBody {
    pub filter: QueryFilter,
    #[serde(flatten)]
    pub distribution: CategoryDistribution,
}

pub fn proportions(store: &Store, geo: &GeoData, f: &FilterParams, axis: CategoryAxis) -> anyhow::Result<ProportionsBody> {
    let filter = f.query_filter(geo);
    let distribution = category_proportions_of(&store.query(&filter)?, axis);
    Ok(ProportionsBody { filter, distribution })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermCount {
    pub term: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopTermsBody {
    pub filter: QueryFilter,
    pub scope: TermScope,
    pub terms: Vec<TermCount>,
}

pub fn top_terms_body(store: &Store, geo: &GeoData, f: &FilterParams, n: usize, scope: TermScope) -> anyhow::Result<TopTermsBody> {
    let filter = f.query_filter(geo);
    let docs = store.documents(&filter)?;
    let terms = top_terms(&docs, n, scope)
        .into_iter()
        .map(|(term, count)| TermCount { term, count })
        .collect();
    Ok(TopTermsBody { filter, scope, terms })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdsBody {
    pub filter: QueryFilter,
    pub offset: usize,
    pub limit: usize,
    pub total: u64,
    pub ads: Vec<AdRecordRow>,
}

pub fn ads(store: &Store, geo: &GeoData, f: &FilterParams, offset: usize, limit: usize) -> anyhow::Result<AdsBody> {
    if !(1..=MAX_LIMIT).contains(&limit) {
        anyhow::bail!(ParamError::Invalid(format!("limit must be within 1..={MAX_LIMIT}")));
    }
    let filter = f.query_filter(geo);
    Ok(AdsBody {
        total: store.count(&filter)?,
        ads: store.query_page(&filter, offset, Some(limit))?,
        filter,
        offset,
        limit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionEntry {
    pub code: String,
    pub name: String,
    pub population: u64,
    pub count: u64,
    pub per_capita: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionsBody {
    pub filter: QueryFilter,
    pub unassigned: u64,
    pub regions: Vec<RegionEntry>,
}

/// Matching ads per region, raw and divided by population.
pub fn regions(store: &Store, geo: &GeoData, f: &FilterParams) -> anyhow::Result<RegionsBody> {
    let filter = f.query_filter(geo);
    let mut counts = analytics::region_counts(store, &filter)?;
    let total = store.count(&filter)?;
    let known: BTreeSet<&str> = geo.regions.regions().iter().map(|r| r.code.as_str()).collect();
    counts.retain(|code, _| known.contains(code.as_str()));
    let assigned: u64 = counts.values().sum();
    let per_capita = analytics::per_capita(&counts, &geo.regions)?;
    Ok(RegionsBody {
        filter,
        unassigned: total - assigned,
        regions: geo
            .regions
            .regions()
            .iter()
            .map(|r| RegionEntry {
                code: r.code.clone(),
                name: r.name.clone(),
                population: r.population,
                count: counts.get(&r.code).copied().unwrap_or(0),
                per_capita: per_capita[&r.code],
            })
            .collect(),
    })
}
