use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::record::RawAdRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContractType {
    Temporary,
    Permanent,
    Contract,
    Unknown,
}

impl ContractType {
    pub const ALL: [ContractType; 4] = [Self::Temporary, Self::Permanent, Self::Contract, Self::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Temporary => "Temporary",
            Self::Permanent => "Permanent",
            Self::Contract => "Contract",
            Self::Unknown => "Unknown",
        }
    }

    /// Case-insensitive; ignores spaces, hyphens and underscores.
    pub fn parse(s: &str) -> Option<Self> {
        let key = squash(s);
        Self::ALL.into_iter().find(|c| c.as_str().eq_ignore_ascii_case(&key))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EmploymentMode {
    FullTime,
    PartTime,
    Both,
    Unknown,
}

impl EmploymentMode {
    pub const ALL: [EmploymentMode; 4] = [Self::FullTime, Self::PartTime, Self::Both, Self::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::FullTime => "FullTime",
            Self::PartTime => "PartTime",
            Self::Both => "Both",
            Self::Unknown => "Unknown",
        }
    }

    /// Case-insensitive; ignores spaces, hyphens and underscores.
    pub fn parse(s: &str) -> Option<Self> {
        let key = squash(s);
        Self::ALL.into_iter().find(|c| c.as_str().eq_ignore_ascii_case(&key))
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !matches!(c, ' ' | '-' | '_')).collect()
}

/// A parsed job advertisement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobAd {
    pub ad_id: u64,
    pub title: String,
    pub description: String,
    pub employer: String,
    pub location_name: String,
    pub posted_date: NaiveDate,
    /// GBP per year.
    pub yearly_min_salary: Option<f64>,
    pub yearly_max_salary: Option<f64>,
    pub contract_type: ContractType,
    pub employment_mode: EmploymentMode,
}

/// Half-open `[start, end)` range of posting dates accepted by ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl CollectionWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("missing or blank title")]
    MissingTitle,
    #[error("unparseable date {0:?}")]
    BadDate(String),
    #[error("posting date {0} outside the collection window")]
    OutOfWindow(NaiveDate),
}

/// Accepts day-first `DD/MM/YYYY` and ISO `YYYY-MM-DD`, optionally followed by a time part.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let s = raw.trim();
    let date_part = s.split(['T', ' ']).next().unwrap_or(s);
    NaiveDate::parse_from_str(date_part, "%d/%m/%Y")
        .or_else(|_| NaiveDate::parse_from_str(date_part, "%Y-%m-%d"))
        .ok()
}

fn text(rec: &RawAdRecord, key: &str) -> String {
    match rec.field(key) {
        Some(Value::String(s)) => s.trim().to_string(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::Bool(b)) => b.to_string(),
        _ => String::new(),
    }
}

fn flag(rec: &RawAdRecord, key: &str) -> bool {
    match rec.field(key) {
        Some(Value::Bool(b)) => *b,
        Some(Value::String(s)) => s.eq_ignore_ascii_case("true"),
        Some(Value::Number(n)) => n.as_f64().is_some_and(|x| x != 0.0),
        _ => false,
    }
}

fn amount(rec: &RawAdRecord, key: &str) -> Option<f64> {
    let v = match rec.field(key)? {
        Value::Number(n) => n.as_f64()?,
        Value::String(s) => s.trim().replace(',', "").parse().ok()?,
        _ => return None,
    };
    (v.is_finite() && v >= 0.0).then_some(v)
}

fn contract_of(rec: &RawAdRecord) -> ContractType {
    let flags = [
        (flag(rec, "temporary"), ContractType::Temporary),
        (flag(rec, "permanent"), ContractType::Permanent),
        (flag(rec, "contract"), ContractType::Contract),
    ];
    let mut set = flags.iter().filter(|(on, _)| *on);
    match (set.next(), set.next()) {
        (Some((_, c)), None) => *c,
        _ => ContractType::Unknown,
    }
}

fn mode_of(rec: &RawAdRecord) -> EmploymentMode {
    match (flag(rec, "fullTime"), flag(rec, "partTime")) {
        (true, true) => EmploymentMode::Both,
        (true, false) => EmploymentMode::FullTime,
        (false, true) => EmploymentMode::PartTime,
        (false, false) => EmploymentMode::Unknown,
    }
}

/// Maps a non-null raw record onto a [`JobAd`].
///
/// Salaries quoted in a currency other than GBP are dropped. A minimum above
/// the maximum is treated as a transposition and swapped.
pub fn parse_ad(record: &RawAdRecord) -> Result<JobAd, ParseError> {
    let title = text(record, "jobTitle");
    if title.is_empty() {
        return Err(ParseError::MissingTitle);
    }
    let raw_date = text(record, "date");
    let posted_date = parse_date(&raw_date).ok_or(ParseError::BadDate(raw_date))?;

    let currency = text(record, "currency");
    let gbp = currency.is_empty() || currency.eq_ignore_ascii_case("GBP");
    let (mut lo, mut hi) = if gbp {
        (amount(record, "minimumSalary"), amount(record, "maximumSalary"))
    } else {
        (None, None)
    };
    if let (Some(a), Some(b)) = (lo, hi) {
        if a > b {
            lo = Some(b);
            hi = Some(a);
        }
    }

    Ok(JobAd {
        ad_id: record.ad_id,
        title,
        description: text(record, "jobDescription"),
        employer: text(record, "employerName"),
        location_name: text(record, "locationName"),
        posted_date,
        yearly_min_salary: lo,
        yearly_max_salary: hi,
        contract_type: contract_of(record),
        employment_mode: mode_of(record),
    })
}
